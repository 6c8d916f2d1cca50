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
#include <stdexcept>
#include <utility>

#include "comabench/channel.hpp"
#include "comabench/scenario.hpp"

namespace comabench {

/// SINR at the strong user when detecting the weak user's symbol ahead of
/// SIC: |h1^T w2|^2 / (|h1^T w1|^2 + noise1).
inline double noma_sic_sinr(const ChannelVector& h1, const PrecoderPair& p, double noise1) {
    if (p.w1.size() != h1.size() || p.w2.size() != h1.size())
        throw std::invalid_argument("noma_sic_sinr: dimension mismatch");
    const double num = std::norm(dotu(h1.coeffs, p.w2));
    const double den = std::norm(dotu(h1.coeffs, p.w1)) + noise1;
    return num / den;
}

/// Post-SIC SINRs of the pair under conventional NOMA.
/// User 1: |h1^T w1|^2 / (sic_err_var + noise1).
/// User 2: |h2^T w2|^2 / (|h2^T w1|^2 + noise2).
inline std::pair<double, double> noma_sinrs(const ChannelVector& h1, const ChannelVector& h2,
                                            const PrecoderPair& p, const PairScenario& sc) {
    if (p.w1.size() != h1.size() || p.w2.size() != h2.size() || h1.size() != h2.size())
        throw std::invalid_argument("noma_sinrs: dimension mismatch");
    const double g_u1 = std::norm(dotu(h1.coeffs, p.w1)) / (sc.sic_err_var + sc.noise1);
    const double g_u2 =
        std::norm(dotu(h2.coeffs, p.w2)) / (std::norm(dotu(h2.coeffs, p.w1)) + sc.noise2);
    return {g_u1, g_u2};
}

/// Receive SNR/SINR of the pair under constructive superposition: the whole
/// superimposed signal counts toward user 1, user 2 is unchanged.
/// User 1: |h1^T (w1 x1 + w2 x2)|^2 / noise1.
/// User 2: |h2^T w2|^2 / (|h2^T w1|^2 + noise2).
inline std::pair<double, double> coma_snrs(const ChannelVector& h1, const ChannelVector& h2,
                                           const PrecoderPair& p, cx x1, cx x2,
                                           const PairScenario& sc) {
    if (p.w1.size() != h1.size() || p.w2.size() != h2.size() || h1.size() != h2.size())
        throw std::invalid_argument("coma_snrs: dimension mismatch");
    const cx rx = dotu(h1.coeffs, p.w1) * x1 + dotu(h1.coeffs, p.w2) * x2;
    const double snr_u1 = std::norm(rx) / sc.noise1;
    const double sinr_u2 =
        std::norm(dotu(h2.coeffs, p.w2)) / (std::norm(dotu(h2.coeffs, p.w1)) + sc.noise2);
    return {snr_u1, sinr_u2};
}

/// Constructive-interference sector margin for user 1.
///
/// With y~ = h1^T sum_k w_k e^{j(phi_k - phi_1)}, returns
///   (Re(y~) - sqrt(r1*noise1)) * tan(theta) - |Im(y~)|.
/// The received point lies in the constructive region (with the SNR-floor
/// offset) iff the result is >= 0.
inline double ci_region_residual(const ChannelVector& h1, const PrecoderPair& p, double phi1,
                                 double phi2, double r1, double noise1, double theta) {
    if (p.w1.size() != h1.size() || p.w2.size() != h1.size())
        throw std::invalid_argument("ci_region_residual: dimension mismatch");
    const cx rot = std::polar(1.0, phi2 - phi1);
    const cx y = dotu(h1.coeffs, p.w1) + dotu(h1.coeffs, p.w2) * rot;
    return (y.real() - std::sqrt(r1 * noise1)) * std::tan(theta) - std::abs(y.imag());
}

/// Composite transmit vector u = w1 + w2 e^{j(phi2 - phi1)}; ||u||^2 is the
/// instantaneous transmit power of the superimposed symbol pair.
inline cvec composite_vector(const PrecoderPair& p, double phi1, double phi2) {
    return add(p.w1, scale(p.w2, std::polar(1.0, phi2 - phi1)));
}

}  // namespace comabench
