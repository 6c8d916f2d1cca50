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

// Symbol-level Monte-Carlo link simulation under block fading: precoders are
// recomputed per channel draw, a batch of symbols rides each draw.

#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

#include "comabench/power_min.hpp"
#include "comabench/receiver.hpp"
#include "comabench/sdr.hpp"

namespace comabench {

enum class Scheme { OMA, NOMA, CoMA };

inline const char* scheme_name(Scheme s) {
    switch (s) {
        case Scheme::OMA: return "OMA";
        case Scheme::NOMA: return "NOMA";
        default: return "CoMA";
    }
}

/// 95% Wilson score interval for a binomial proportion.
struct Interval {
    double lo = 0.0, hi = 0.0;
};

inline Interval wilson_interval_95(long errors, long trials) {
    if (trials <= 0) return {0.0, 1.0};
    const double z = 1.959963984540054;
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(errors) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

struct SimReport {
    Scheme scheme = Scheme::CoMA;
    long trials = 0;  // symbols per user
    long errors_u1 = 0;
    long errors_u2 = 0;
    double ser_u1 = 0.0, ser_u2 = 0.0, ser_max = 0.0;
    Interval wilson_u1, wilson_u2;
    long resampled_draws = 0;  // draws replaced after optimizer failure
};

/// Precoder factory per channel draw. For the constructive scheme the design
/// depends on the symbol pair through the phase difference index
/// delta = (m2 - m1) mod M and is queried once per delta; the other schemes
/// are queried once per draw with delta = 0.
using PrecoderSource =
    std::function<PrecoderPair(const ChannelVector& h1, const ChannelVector& h2, int delta_idx)>;

struct MonteCarloOptions {
    int symbols_per_draw = 100;
    int max_resamples_per_draw = 25;
    // simulated noise overrides (the precoder source may target different
    // noise than the link actually has); negative means "use the scenario"
    double sim_noise1 = -1.0;
    double sim_noise2 = -1.0;
    // OMA transmits each user's data in its own slot; matching the pair's
    // spectral efficiency needs order^2 points per symbol
    bool oma_squared_constellation = true;
};

/// Runs `n_trials` symbols per user through the scheme's transmitter and
/// receiver. Per channel draw: sample both channels, order the pair, design
/// precoders via `source`, send a batch of uniform symbols, count errors.
/// Optimizer failures resample the draw and are tallied in the report.
inline SimReport monte_carlo_ser(Scheme scheme, const PairScenario& sc,
                                 const PrecoderSource& source, long n_trials, Rng& rng,
                                 const MonteCarloOptions& opt = {}) {
    if (n_trials < 1) throw std::invalid_argument("monte_carlo_ser: n_trials must be >= 1");
    const int M = sc.constellation.order();
    const double noise1 = opt.sim_noise1 >= 0.0 ? opt.sim_noise1 : sc.noise1;
    const double noise2 = opt.sim_noise2 >= 0.0 ? opt.sim_noise2 : sc.noise2;

    SimReport rep;
    rep.scheme = scheme;

    const PskConstellation oma_const(
        opt.oma_squared_constellation ? M * M : M, sc.constellation.amplitude());

    long done = 0;
    std::uint64_t draw_idx = 0;
    while (done < n_trials) {
        const long batch = std::min<long>(opt.symbols_per_draw, n_trials - done);
        Rng draw_rng = rng.fork(draw_idx++);

        auto ha = sample_channel(sc.n_antennas, sc.var1, draw_rng);
        auto hb = sample_channel(sc.n_antennas, sc.var2, draw_rng);
        auto [h1, h2] = order_pair(ha, hb);

        // precoders for this draw
        std::vector<PrecoderPair> per_delta;
        try {
            if (scheme == Scheme::CoMA) {
                per_delta.reserve(static_cast<std::size_t>(M));
                for (int d = 0; d < M; ++d) per_delta.push_back(source(h1, h2, d));
            } else {
                per_delta.push_back(source(h1, h2, 0));
            }
        } catch (const InfeasibleProblem&) {
            ++rep.resampled_draws;
            if (rep.resampled_draws > opt.max_resamples_per_draw + done)
                throw;  // systematically infeasible configuration
            continue;
        } catch (const RandomizationFailure&) {
            ++rep.resampled_draws;
            if (rep.resampled_draws > opt.max_resamples_per_draw + done) throw;
            continue;
        }

        for (long s = 0; s < batch; ++s) {
            const int m1 = static_cast<int>(draw_rng.uniform_int(M));
            const int m2 = static_cast<int>(draw_rng.uniform_int(M));

            if (scheme == Scheme::OMA) {
                // each user in its own slot, boosted constellation
                const int Mo = oma_const.order();
                const int q1 = static_cast<int>(draw_rng.uniform_int(Mo));
                const int q2 = static_cast<int>(draw_rng.uniform_int(Mo));
                const auto& pr = per_delta[0];
                const cx y1 = dotu(h1.coeffs, pr.w1) * oma_const.symbol(q1) +
                              draw_rng.normal_complex(noise1);
                const cx y2 = dotu(h2.coeffs, pr.w2) * oma_const.symbol(q2) +
                              draw_rng.normal_complex(noise2);
                if (ml_detect(y1, dotu(h1.coeffs, pr.w1), oma_const) != q1) ++rep.errors_u1;
                if (ml_detect(y2, dotu(h2.coeffs, pr.w2), oma_const) != q2) ++rep.errors_u2;
                continue;
            }

            const int delta = (scheme == Scheme::CoMA) ? ((m2 - m1 + M) % M) : 0;
            const auto& pr = per_delta[static_cast<std::size_t>(delta)];
            const cx x1 = sc.constellation.symbol(m1);
            const cx x2 = sc.constellation.symbol(m2);
            const cx tx1 = dotu(h1.coeffs, pr.w1) * x1 + dotu(h1.coeffs, pr.w2) * x2;
            const cx tx2 = dotu(h2.coeffs, pr.w1) * x1 + dotu(h2.coeffs, pr.w2) * x2;
            const cx y1 = tx1 + draw_rng.normal_complex(noise1);
            const cx y2 = tx2 + draw_rng.normal_complex(noise2);

            if (scheme == Scheme::NOMA) {
                auto [m1_hat, m2_at_u1] = sic_receive(y1, h1, pr, sc.constellation, draw_rng,
                                                      sc.sic_err_var);
                (void)m2_at_u1;
                if (m1_hat != m1) ++rep.errors_u1;
            } else {
                if (ci_receive(y1, sc.constellation) != m1) ++rep.errors_u1;
            }
            // weak user detects its own symbol treating the rest as noise
            if (ml_detect(y2, dotu(h2.coeffs, pr.w2), sc.constellation) != m2) ++rep.errors_u2;
        }
        done += batch;
    }

    rep.trials = done;
    rep.ser_u1 = static_cast<double>(rep.errors_u1) / static_cast<double>(done);
    rep.ser_u2 = static_cast<double>(rep.errors_u2) / static_cast<double>(done);
    rep.ser_max = std::max(rep.ser_u1, rep.ser_u2);
    rep.wilson_u1 = wilson_interval_95(rep.errors_u1, done);
    rep.wilson_u2 = wilson_interval_95(rep.errors_u2, done);
    return rep;
}

}  // namespace comabench
