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

#include <complex>
#include <stdexcept>
#include <vector>

namespace comabench {

using cx = std::complex<double>;
using cvec = std::vector<cx>;

// Convention used throughout: the channel/precoder pairing is the
// UNCONJUGATED inner product h^T w = sum_i h_i w_i. Beamforming gain for a
// channel h is therefore maximized by w along conj(h), and all |h^T w|^2
// expressions below follow that convention.

/// Unconjugated inner product a^T b.
inline cx dotu(const cvec& a, const cvec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dotu: length mismatch");
    cx acc{0.0, 0.0};
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

/// Squared Euclidean norm sum_i |a_i|^2.
inline double norm_sq(const cvec& a) {
    double acc = 0.0;
    for (const auto& v : a) acc += std::norm(v);
    return acc;
}

inline cvec scale(const cvec& a, cx factor) {
    cvec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * factor;
    return out;
}

inline cvec add(const cvec& a, const cvec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("add: length mismatch");
    cvec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

inline cvec conj(const cvec& a) {
    cvec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::conj(a[i]);
    return out;
}

inline bool all_finite(const cvec& a) {
    for (const auto& v : a)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
}

}  // namespace comabench
