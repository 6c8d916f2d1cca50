// SPDX-License-Identifier: Apache-2.0
//
// comabench - multiuser MISO precoding workbench for constructive multiple access
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "comabench/complex_ops.hpp"

namespace comabench {

/// M-PSK constellation: symbol m sits at amplitude * e^{j 2 pi m / M}.
/// The constructive (decision) sector of each symbol has half-angle pi/M.
class PskConstellation {
  public:
    explicit PskConstellation(int order, double amplitude = 1.0)
        : order_(order), amplitude_(amplitude) {
        if (order < 2 || (order & (order - 1)) != 0)
            throw std::invalid_argument("PskConstellation: order must be a power of two >= 2");
        if (!(amplitude > 0.0))
            throw std::invalid_argument("PskConstellation: amplitude must be positive");
    }

    int order() const { return order_; }
    double amplitude() const { return amplitude_; }
    double half_angle() const { return std::numbers::pi / order_; }

    double phase(int m) const { return 2.0 * std::numbers::pi * m / order_; }

    cx symbol(int m) const {
        const double p = phase(m);
        return {amplitude_ * std::cos(p), amplitude_ * std::sin(p)};
    }

  private:
    int order_;
    double amplitude_;
};

}  // namespace comabench
