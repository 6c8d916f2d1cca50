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

// Receiver complexity in complex operations per detected pair. ML detection
// over an M-point constellation with N antennas costs 4NM + 2M^N; the SIC
// receiver runs it three times per pair (twice at the strong user, once at
// the weak) plus an O(M^2) subtraction stage, while the constructive
// receiver runs it once plus a D(M) sector decision. M^N overflows any fixed
// width long before the swept grid ends, hence arbitrary precision.

#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <stdexcept>

namespace comabench {

using BigInt = boost::multiprecision::cpp_int;

namespace complexity_detail {

inline void check_args(int n, int m, int k) {
    if (n < 1) throw std::invalid_argument("complexity: N must be >= 1");
    if (m < 2 || (m & (m - 1)) != 0) throw std::invalid_argument("complexity: M must be a power of two >= 2");
    if (k < 1) throw std::invalid_argument("complexity: K must be >= 1");
}

inline BigInt ml_detection_ops(int n, int m) {
    BigInt mn = boost::multiprecision::pow(BigInt(m), static_cast<unsigned>(n));
    return BigInt(4) * n * m + 2 * mn;
}

}  // namespace complexity_detail

/// Conventional NOMA pair: three ML detection passes plus the subtraction
/// stage c*M^2; K pairs scale linearly.
inline BigInt complexity_noma(int n, int m, int k, int subtraction_const = 1) {
    complexity_detail::check_args(n, m, k);
    if (subtraction_const < 0)
        throw std::invalid_argument("complexity_noma: subtraction constant must be >= 0");
    const BigInt per_pair =
        3 * complexity_detail::ml_detection_ops(n, m) + BigInt(subtraction_const) * m * m;
    return per_pair * k;
}

/// Constructive pair: one ML detection pass plus the D(M) sector decision;
/// K pairs scale linearly.
inline BigInt complexity_coma(int n, int m, int k, int d_of_m) {
    complexity_detail::check_args(n, m, k);
    if (d_of_m < 1) throw std::invalid_argument("complexity_coma: D(M) must be >= 1");
    const BigInt per_pair = complexity_detail::ml_detection_ops(n, m) + d_of_m;
    return per_pair * k;
}

struct ComplexityReport {
    int n_antennas = 0;
    int mod_order = 0;
    int n_pairs = 0;
    int d_of_m = 0;
    BigInt ops_noma;
    BigInt ops_coma;
};

inline ComplexityReport complexity_report(int n, int m, int k, int d_of_m = -1,
                                          int subtraction_const = 1) {
    ComplexityReport r;
    r.n_antennas = n;
    r.mod_order = m;
    r.n_pairs = k;
    r.d_of_m = (d_of_m > 0) ? d_of_m : m;  // default decision cost: one test per point
    r.ops_noma = complexity_noma(n, m, k, subtraction_const);
    r.ops_coma = complexity_coma(n, m, k, r.d_of_m);
    return r;
}

}  // namespace comabench
