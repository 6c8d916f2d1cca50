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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "comabench/ser_min.hpp"

using comabench::ChannelVector;
using comabench::cvec;
using comabench::cx;
using comabench::PairScenario;
using comabench::Rng;

namespace {

// high-precision tail integral of the standard normal via adaptive Simpson,
// used as an independent quadrature reference for ser_from_snr
double gauss_tail_simpson(double a, double b, double fa, double fm, double fb, double eps,
                          int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    auto f = [](double x) {
        return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    };
    const double flm = f(lm), frm = f(rm);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * eps)
        return left + right + (left + right - whole) / 15.0;
    return gauss_tail_simpson(a, m, fa, flm, fm, eps / 2.0, depth - 1) +
           gauss_tail_simpson(m, b, fm, frm, fb, eps / 2.0, depth - 1);
}

double q_function_reference(double x) {
    auto f = [](double t) {
        return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi);
    };
    const double b = x + 45.0;
    return gauss_tail_simpson(x, b, f(x), f(0.5 * (x + b)), f(b), 1e-16, 40);
}

PairScenario base_scenario(int n, double P) {
    PairScenario sc;
    sc.n_antennas = n;
    sc.var1 = 2.0;
    sc.var2 = 1.0;
    sc.power_budget = P;
    return sc;
}

}  // namespace

TEST_CASE("ser_from_snr against quadrature and basic shape", "[sermin]") {
    REQUIRE(comabench::ser_from_snr(0.0) == Catch::Approx(0.5).epsilon(1e-12));
    for (double snr : {0.25, 1.0, 2.0, 4.0, 9.0}) {
        const double ref = q_function_reference(std::sqrt(snr));
        REQUIRE(comabench::ser_from_snr(snr) == Catch::Approx(ref).epsilon(1e-12));
    }
    REQUIRE(comabench::ser_from_snr(4.0) < comabench::ser_from_snr(1.0));
    REQUIRE_THROWS_AS(comabench::ser_from_snr(-0.1), std::invalid_argument);
}

TEST_CASE("update_y closed form and tangency", "[sermin]") {
    // A = 4, B = 2 -> y* = 1
    ChannelVector h2{{cx(1, 0)}, 1.0};
    cvec w2{cx(2, 0)}, w1{cx(1, 0)};
    REQUIRE(comabench::update_y(w1, w2, h2, 1.0, w2) == Catch::Approx(1.0).epsilon(1e-12));

    // tangency: w2 = wbar2 gives y* = |h2'w2| / B
    Rng rng(50);
    for (int rep = 0; rep < 20; ++rep) {
        auto h = comabench::sample_channel(2, 1.0, rng);
        auto v1 = comabench::sample_channel(2, 1.0, rng);
        auto v2 = comabench::sample_channel(2, 1.0, rng);
        const double noise2 = 0.8;
        const double y = comabench::update_y(v1.coeffs, v2.coeffs, h, noise2, v2.coeffs);
        const double expect = std::abs(comabench::dotu(h.coeffs, v2.coeffs)) /
                              (std::norm(comabench::dotu(h.coeffs, v1.coeffs)) + noise2);
        REQUIRE(y == Catch::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("update_y maximizes the auxiliary surrogate", "[sermin][oracle]") {
    Rng rng(51);
    for (int inst = 0; inst < 100; ++inst) {
        Rng crng = rng.fork(inst);
        auto h2 = comabench::sample_channel(2, 1.0, crng);
        auto w1 = comabench::sample_channel(2, 1.0, crng);
        auto wbar2 = comabench::sample_channel(2, 1.0, crng);
        // evaluate at w2 near the expansion point so the numerator bound stays positive
        cvec w2 = wbar2.coeffs;
        for (auto& v : w2) v *= 1.0 + 0.1 * crng.normal();
        const double noise2 = 0.5 + crng.uniform();

        comabench::FractionalPieces fp{comabench::taylor_lower_bound(h2, wbar2.coeffs),
                                       h2.coeffs, noise2};
        const double A = fp.A(w2);
        if (A < 0.0) continue;
        const double B = fp.B(w1.coeffs);
        const double ystar = comabench::update_y(w1.coeffs, w2, h2, noise2, wbar2.coeffs);
        const double fstar = 2.0 * ystar * std::sqrt(A) - ystar * ystar * B;
        for (int k = 0; k < 1000; ++k) {
            const double y = 3.0 * ystar * crng.uniform();
            REQUIRE(2.0 * y * std::sqrt(A) - y * y * B <= fstar + 1e-12 * (1.0 + std::abs(fstar)));
        }
    }
}

TEST_CASE("coma max-min: vanishing budget gives vanishing SNR", "[sermin]") {
    Rng rng(52);
    auto h1 = comabench::sample_channel(2, 2.0, rng);
    auto h2 = comabench::sample_channel(2, 1.0, rng);
    PairScenario sc = base_scenario(2, 1e-8);
    auto res = comabench::solve_sermin_coma(sc, h1, h2, sc.constellation.symbol(0),
                                            sc.constellation.symbol(1));
    REQUIRE(res.t_star >= 0.0);
    REQUIRE(res.t_star < 1e-6);
}

TEST_CASE("coma max-min matches a scalar grid search", "[sermin][oracle]") {
    // N = 1, QPSK. Both received points are pinned to their sector centers,
    // so the composite scalar u has its phase fixed at -arg(h1) and the
    // search space is (|u|, zeta). A 3-D sweep including the phase confirms
    // the pinned phase is where the optimum lives.
    ChannelVector h1{{cx(1.2, 0.3)}, 2.0};
    ChannelVector h2{{cx(0.9, -0.2)}, 1.0};
    PairScenario sc = base_scenario(1, 4.0);
    // identical symbols keep the weak user's gain maximizer interior (for
    // quarter-turn pairs this channel pair saturates; covered separately)
    const cx x1 = sc.constellation.symbol(0), x2 = sc.constellation.symbol(0);
    const cx beta = x2 / x1;

    auto res = comabench::solve_sermin_coma(sc, h1, h2, x1, x2);

    const double P = sc.power_budget;
    const double zeta_cap = 60.0;
    const double phase0 = -std::arg(h1.coeffs[0]);
    double best = 0.0, best_r = 0.0, best_zeta = -1.0;
    auto scan = [&](double r_lo, double r_hi, double z_lo, double z_hi, int nr, int nz) {
        for (int ir = 0; ir <= nr; ++ir) {
            const double r = r_lo + (r_hi - r_lo) * ir / nr;
            if (r < 0.0 || r * r > P + 1e-12) continue;
            const cx u = std::polar(r, phase0);  // alignment: h1 u real >= 0
            const double snr1 = std::norm(h1.coeffs[0] * u) / sc.noise1;
            if (snr1 <= best) continue;  // min can't beat the incumbent
            const cx a = h2.coeffs[0] * u;
            for (int iz = 0; iz <= nz; ++iz) {
                const double zeta = z_lo + (z_hi - z_lo) * iz / nz;
                if (zeta < 0.0) continue;
                const double sinr2 = zeta * zeta / (std::norm(a - beta * zeta) + sc.noise2);
                const double t = std::min(snr1, sinr2);
                if (t > best) {
                    best = t;
                    best_r = r;
                    best_zeta = zeta;
                }
            }
        }
    };
    scan(0.0, std::sqrt(P), 0.0, zeta_cap, 4000, 4000);
    REQUIRE(best_zeta < zeta_cap - 1e-9);  // optimum interior to the grid
    const double dr = std::sqrt(P) / 4000, dz = zeta_cap / 4000;
    scan(best_r - 2 * dr, best_r + 2 * dr, best_zeta - 2 * dz, best_zeta + 2 * dz, 80, 80);
    REQUIRE(res.t_star == Catch::Approx(best).epsilon(1e-3));
}

TEST_CASE("coma max-min saturation branch: min SNR approaches one", "[sermin]") {
    // with a quarter-turn symbol pair on this channel pair the aligned
    // weak-user gain term has a negative rotation component, so its SINR
    // only approaches 1 from below as the gain grows; the achieved min-SNR
    // must sit just under that ceiling
    ChannelVector h1{{cx(1.2, 0.3)}, 2.0};
    ChannelVector h2{{cx(0.9, -0.2)}, 1.0};
    PairScenario sc = base_scenario(1, 4.0);
    auto res = comabench::solve_sermin_coma(sc, h1, h2, sc.constellation.symbol(0),
                                            sc.constellation.symbol(1));
    REQUIRE(res.t_star <= 1.0 + 1e-6);
    REQUIRE(res.t_star >= 0.9);
}

TEST_CASE("coma max-min satisfies its constraints and ascends", "[sermin]") {
    Rng rng(53);
    for (int rep = 0; rep < 15; ++rep) {
        Rng crng = rng.fork(rep);
        const int n = (rep % 2) ? 4 : 2;
        auto ha = comabench::sample_channel(n, 2.0, crng);
        auto hb = comabench::sample_channel(n, 1.0, crng);
        auto [h1, h2] = comabench::order_pair(ha, hb);
        PairScenario sc = base_scenario(n, 2.0 + 6.0 * crng.uniform());
        const int m1 = static_cast<int>(crng.uniform_int(4));
        const int m2 = static_cast<int>(crng.uniform_int(4));
        const cx x1 = sc.constellation.symbol(m1), x2 = sc.constellation.symbol(m2);

        auto res = comabench::solve_sermin_coma(sc, h1, h2, x1, x2);

        // power budget on the composite vector
        const cvec u = comabench::composite_vector(res.precoders, sc.constellation.phase(m1),
                                                   sc.constellation.phase(m2));
        REQUIRE(comabench::norm_sq(u) <= sc.power_budget + 1e-8);

        // weak-user alignment is exact by construction
        const cx g2 = comabench::dotu(h2.coeffs, res.precoders.w2);
        REQUIRE(std::abs(g2.imag()) <= 1e-8);
        REQUIRE(g2.real() >= -1e-10);

        // strong user's composite receive point sits on its sector center
        const cvec uc = comabench::composite_vector(res.precoders, sc.constellation.phase(m1),
                                                    sc.constellation.phase(m2));
        const cx y1 = comabench::dotu(h1.coeffs, uc);
        REQUIRE(std::abs(y1.imag()) <= 1e-7 * (1.0 + std::abs(y1.real())));
        REQUIRE(y1.real() >= -1e-10);

        // original strong-user and weak-user floors at the reported t
        auto [snr1, sinr2] = comabench::coma_snrs(h1, h2, res.precoders, x1, x2, sc);
        REQUIRE(snr1 - res.t_star >= -1e-6 * (1.0 + res.t_star));
        REQUIRE(sinr2 - res.t_star >= -1e-6 * (1.0 + res.t_star));

        // the reported objective is the achieved min SNR
        REQUIRE(res.t_star ==
                Catch::Approx(std::min(snr1, sinr2)).epsilon(1e-5));

        // ascent with the documented slack
        const auto& tr = res.state.t_trace;
        for (std::size_t i = 1; i < tr.size(); ++i) REQUIRE(tr[i] >= tr[i - 1] - 1e-9);

        // convergence within 50 outer iterations at the 1e-6 measure
        bool converged = false;
        for (std::size_t i = 1; i < tr.size() && i <= 50; ++i)
            if (std::abs(tr[i] - tr[i - 1]) <= 1e-6 * (1.0 + std::abs(tr[i]))) {
                converged = true;
                break;
            }
        REQUIRE(converged);
    }
}

TEST_CASE("noma max-min: zero SIC target reaches the single-user bracket top", "[sermin]") {
    Rng rng(54);
    auto h1 = comabench::sample_channel(2, 2.0, rng);
    auto h2 = comabench::sample_channel(2, 1.0, rng);
    PairScenario sc = base_scenario(2, 5.0);
    sc.r2 = 0.0;
    auto res = comabench::solve_sermin_noma(sc, h1, h2);
    const double t_ub = sc.power_budget * h2.norm_sq() / sc.noise2;
    REQUIRE(res.t_star == Catch::Approx(t_ub).epsilon(1e-4));
    REQUIRE(comabench::norm_sq(res.precoders.w1) < 1e-8);
}

TEST_CASE("noma max-min matches scalar oracles for both formulations", "[sermin][oracle]") {
    ChannelVector h1{{cx(1.4, 0.2)}, 2.0};
    ChannelVector h2{{cx(0.8, -0.5)}, 1.0};
    PairScenario sc = base_scenario(1, 6.0);
    sc.r2 = 1.0;
    const double g1 = std::norm(h1.coeffs[0]), g2 = std::norm(h2.coeffs[0]);
    const double P = sc.power_budget;

    // default formulation: w1 = 0 optimal, t* = max t with P g2 >= t n2 given
    // the SIC constraint P g1 >= n1 r2 holds
    REQUIRE(P * g1 >= sc.noise1 * sc.r2);
    auto lit = comabench::solve_sermin_noma(sc, h1, h2);
    REQUIRE(lit.t_star == Catch::Approx(P * g2 / sc.noise2).epsilon(1e-4));

    // with the strong-user floor the min covers all three detection stages;
    // 1-D search over the power split
    auto flo = comabench::solve_sermin_noma(sc, h1, h2, 1e-6, true);
    double best = 0.0;
    const int steps = 200000;
    for (int i = 0; i <= steps; ++i) {
        const double p1 = P * i / steps;
        const double p2 = P - p1;
        const double s_sic = p2 * g1 / (p1 * g1 + sc.noise1);
        if (s_sic < sc.r2) continue;  // hard SIC decodability target
        const double t = std::min(std::min(p1 * g1 / sc.noise1, s_sic),
                                  p2 * g2 / (p1 * g2 + sc.noise2));
        best = std::max(best, t);
    }
    REQUIRE(flo.t_star == Catch::Approx(best).margin(1e-4 * (1.0 + best)));
}

TEST_CASE("noma max-min reports infeasibility when SIC is unattainable", "[sermin]") {
    ChannelVector h1{{cx(0.1, 0.0)}, 2.0};
    ChannelVector h2{{cx(1.0, 0.0)}, 1.0};
    PairScenario sc = base_scenario(1, 0.01);
    sc.r2 = 100.0;  // needs |h1'w2|^2 >= 100 n1 with power 0.01
    REQUIRE_THROWS_AS(comabench::solve_sermin_noma(sc, h1, h2), comabench::InfeasibleProblem);
}

TEST_CASE("scheme ordering of the achieved min-SNR (smoke)", "[sermin]") {
    Rng rng(55);
    const int draws = 15;
    for (int d = 0; d < draws; ++d) {
        Rng crng = rng.fork(d);
        auto ha = comabench::sample_channel(2, 2.0, crng);
        auto hb = comabench::sample_channel(2, 1.0, crng);
        auto [h1, h2] = comabench::order_pair(ha, hb);
        PairScenario sc = base_scenario(2, 8.0);
        auto coma = comabench::solve_sermin_coma(sc, h1, h2, sc.constellation.symbol(0),
                                                 sc.constellation.symbol(1));

        // the default formulation leaves the strong user silent, so its
        // achieved min-SNR is zero and never beats the constructive scheme
        auto lit = comabench::solve_sermin_noma(sc, h1, h2, 1e-4, false);
        const double lit_min =
            std::min(std::norm(comabench::dotu(h1.coeffs, lit.precoders.w1)) / sc.noise1,
                     std::norm(comabench::dotu(h2.coeffs, lit.precoders.w2)) /
                         (std::norm(comabench::dotu(h2.coeffs, lit.precoders.w1)) + sc.noise2));
        REQUIRE(lit_min <= coma.t_star + 1e-9);

        // all-stage variant: bounded by the two-constraint relaxation's top
        // and never above the literal variant's weak-user level
        auto noma = comabench::solve_sermin_noma(sc, h1, h2, 1e-4, true);
        REQUIRE(noma.t_star <= sc.power_budget * h2.norm_sq() / sc.noise2 + 1e-6);
        REQUIRE(noma.t_star <= lit.t_star + 1e-4 * (1.0 + lit.t_star));
    }
}

TEST_CASE("oma baseline equalizes the slot SNRs on the average budget", "[sermin]") {
    Rng rng(56);
    auto h1 = comabench::sample_channel(3, 2.0, rng);
    auto h2 = comabench::sample_channel(3, 1.0, rng);
    PairScenario sc = base_scenario(3, 5.0);
    auto [pr, snr] = comabench::solve_sermin_oma(sc, h1, h2);
    const double s1 = std::norm(comabench::dotu(h1.coeffs, pr.w1)) / sc.noise1;
    const double s2 = std::norm(comabench::dotu(h2.coeffs, pr.w2)) / sc.noise2;
    REQUIRE(s1 == Catch::Approx(s2).epsilon(1e-9));
    REQUIRE(s1 == Catch::Approx(snr).epsilon(1e-9));
    const double avg = 0.5 * (comabench::norm_sq(pr.w1) + comabench::norm_sq(pr.w2));
    REQUIRE(avg == Catch::Approx(sc.power_budget).epsilon(1e-9));
}

TEST_CASE("larger budget never lowers the coma min-SNR", "[sermin]") {
    Rng rng(57);
    auto ha = comabench::sample_channel(2, 2.0, rng);
    auto hb = comabench::sample_channel(2, 1.0, rng);
    auto [h1, h2] = comabench::order_pair(ha, hb);
    double prev = -1.0;
    for (double P : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
        PairScenario sc = base_scenario(2, P);
        auto res = comabench::solve_sermin_coma(sc, h1, h2, sc.constellation.symbol(0),
                                                sc.constellation.symbol(3));
        REQUIRE(res.t_star >= prev - 1e-7 * (1.0 + std::abs(prev)));
        prev = res.t_star;
    }
}
