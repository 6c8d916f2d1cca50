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

#include <stdexcept>
#include <utility>

#include "comabench/complex_ops.hpp"
#include "comabench/rng.hpp"

namespace comabench {

/// Flat Rayleigh channel realization for one user: h ~ CN(0, I_N * gen_variance).
struct ChannelVector {
    cvec coeffs;
    double gen_variance = 1.0;

    std::size_t size() const { return coeffs.size(); }
    double norm_sq() const { return comabench::norm_sq(coeffs); }
};

/// i.i.d. circularly-symmetric complex Gaussian entries, per-entry variance
/// `variance` (variance/2 per real dimension). Deterministic under a fixed rng.
inline ChannelVector sample_channel(int n, double variance, Rng& rng) {
    if (n < 1) throw std::invalid_argument("sample_channel: n must be >= 1");
    if (!(variance > 0.0)) throw std::invalid_argument("sample_channel: variance must be > 0");
    ChannelVector h;
    h.gen_variance = variance;
    h.coeffs.resize(static_cast<std::size_t>(n));
    for (auto& c : h.coeffs) c = rng.normal_complex(variance);
    return h;
}

/// Orders a pair by instantaneous squared channel norm, strong first.
/// Ties go to h_a.
inline std::pair<ChannelVector, ChannelVector> order_pair(const ChannelVector& h_a,
                                                          const ChannelVector& h_b) {
    if (h_a.size() != h_b.size()) throw std::invalid_argument("order_pair: length mismatch");
    if (h_b.norm_sq() > h_a.norm_sq()) return {h_b, h_a};
    return {h_a, h_b};
}

}  // namespace comabench
