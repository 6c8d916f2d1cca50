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

// SER-minimizing precoders under a total power budget. Minimizing the worst
// per-user symbol error rate is equivalent to maximizing the minimum receive
// SNR, handled here as a max-min problem:
//  - constructive superposition (CoMA): block coordinate ascent alternating a
//    closed-form auxiliary update with a convex subproblem built from
//    first-order lower bounds;
//  - conventional NOMA: bisection on the target SNR, each feasibility probe
//    decided by the lifted (SDR) power minimization plus rank-1 extraction;
//  - orthogonal baseline: closed-form max-min power split across slots.

#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "comabench/power_min.hpp"

namespace comabench {

/// Q(sqrt(snr)): tail error probability of a unit-variance Gaussian at the
/// square-root SNR threshold. Relative error of erfc is a few ulp, well
/// inside 1e-12.
inline double ser_from_snr(double snr) {
    if (!(snr >= 0.0)) throw std::invalid_argument("ser_from_snr: snr must be >= 0");
    return 0.5 * std::erfc(std::sqrt(snr / 2.0));
}

/// The two pieces of the fractional weak-user SINR constraint:
/// A(w2) first-order lower bound of the numerator |h2^T w2|^2 at wbar2,
/// B(w1) the exact denominator |h2^T w1|^2 + noise2.
struct FractionalPieces {
    TaylorBound A_of_w2;
    cvec h2;
    double noise2 = 0.0;

    double A(const cvec& w2) const { return A_of_w2.value(h2, w2); }
    double B(const cvec& w1) const { return std::norm(dotu(h2, w1)) + noise2; }
};

/// Closed-form maximizer of y -> 2 y sqrt(A(w2)) - y^2 B(w1):
/// y* = sqrt(A(w2)) / B(w1).
inline double update_y(const cvec& w1, const cvec& w2, const ChannelVector& h2, double noise2,
                       const cvec& wbar2) {
    FractionalPieces fp{taylor_lower_bound(h2, wbar2), h2.coeffs, noise2};
    const double a = fp.A(w2);
    if (a < 0.0) throw std::invalid_argument("update_y: numerator bound negative at w2");
    return std::sqrt(a) / fp.B(w1);
}

/// Max-min bookkeeping across the outer iterations.
struct MaxMinState {
    double t = 0.0;
    double y = 0.0;
    PrecoderPair expansion_point;
    std::vector<double> t_trace;
};

struct ComaSerResult {
    PrecoderPair precoders;
    double t_star = 0.0;  // achieved min SNR
    MaxMinState state;
};

/// CoMA max-min SNR under the composite power budget (block coordinate
/// ascent). Constraints: power ||u||^2 <= P; BOTH received points pinned to
/// their sector centers (Im h1^T u = 0, Re >= 0 for the strong user - the
/// equal-margin geometry, any sector slack would let the optimizer trade
/// margin away and park the point on a decision boundary - and likewise
/// Im h2^T w2 = 0, Re >= 0 for the weak user); the strong-user SNR floor via
/// a first-order lower bound refreshed each outer iteration; and the
/// fractional weak-user SINR via the auxiliary-variable surrogate with y
/// fixed at its closed-form optimum.
inline ComaSerResult solve_sermin_coma(const PairScenario& sc, const ChannelVector& h1,
                                       const ChannelVector& h2, cx x1, cx x2, int max_outer = 100,
                                       double stop_tol = 1e-8) {
    using Eigen::MatrixXd;
    using Eigen::VectorXd;
    const int n = static_cast<int>(h1.size());
    if (static_cast<int>(h2.size()) != n)
        throw std::invalid_argument("solve_sermin_coma: dimension mismatch");
    if (!(sc.power_budget > 0.0))
        throw std::invalid_argument("solve_sermin_coma: power budget must be positive");
    if (!(norm_sq(h1.coeffs) > 0.0) || !(norm_sq(h2.coeffs) > 0.0))
        throw InfeasibleProblem("solve_sermin_coma: zero channel");

    const double amp = std::abs(x1);
    const cx beta = x2 / x1;
    const double n1 = sc.noise1 / (amp * amp);
    const double n2 = sc.noise2 / (amp * amp);
    const double P = sc.power_budget;

    // exact maximizer of the weak-user SINR zeta^2 / (|h2^T u - beta zeta|^2 + n2)
    // over the aligned gain zeta >= 0 at fixed u; used both as a warm-start
    // polish and as an extra exact block step each outer iteration (the next
    // subproblem's numerator bound is tangent at the new point, so ascent is
    // preserved)
    // the min-SNR can never exceed the strong user's full-power ceiling, so
    // the gain only needs to reach that level; keeps expansions well scaled
    const double t_ceiling = 1.05 * P * norm_sq(h1.coeffs) / n1 + 1e-12;
    auto best_zeta_for = [&](const cvec& u) -> double {
        const cx a = dotu(h2.coeffs, u);
        const double b = (std::conj(beta) * a).real();
        const double c = std::norm(a) + n2;
        const double sup = (b > 0.0 && c > b * b) ? c / (c - b * b)
                                                  : std::numeric_limits<double>::infinity();
        if (b > 0.0 && sup <= t_ceiling) return c / b;  // interior maximizer, moderate size
        // smallest zeta with sinr2 >= s: zeta^2 (1-s) + 2 s b zeta - s c = 0
        const double s = std::min(std::min(sup * (1.0 - 1e-9), t_ceiling), 1.0 - 1e-6);
        const double disc = s * s * b * b + (1.0 - s) * s * c;
        double zeta = (disc >= 0.0 && s < 1.0)
                          ? (-s * b + std::sqrt(disc)) / (1.0 - s)
                          : std::sqrt(c);
        return std::min(std::max(zeta, 0.0), 1e3 * std::sqrt(c));
    };

    // warm start from one cheap power-minimization at low targets; a zero
    // expansion point would make the strong-user bound identically
    // nonpositive and stall the first subproblem
    cvec u_bar;
    try {
        PairScenario warm = sc;
        warm.r1 = 0.1;
        warm.r2 = 0.1;
        auto seed = solve_power_min_coma(warm, h1, h2, x1, x2, 10);
        u_bar = composite_vector(seed.precoders, std::arg(x1), std::arg(x2));
    } catch (const InfeasibleProblem&) {
        u_bar = conj(h1.coeffs);  // MRT fallback
    }
    {  // scale onto the power budget and rotate onto the alignment axis
        const double pw = norm_sq(u_bar);
        if (!(pw > 0.0)) u_bar = conj(h1.coeffs);
        const double s = std::sqrt(0.9 * P / norm_sq(u_bar));
        for (auto& v : u_bar) v *= s;
        const cx a1 = dotu(h1.coeffs, u_bar);
        if (std::abs(a1) > 0.0) {
            const cx rot = std::conj(a1) / std::abs(a1);
            for (auto& v : u_bar) v *= rot;
        }
    }
    // modest initial expansion (the in-loop jumps may range much further
    // once an iterate exists and the retry ladder can catch a bad start)
    cx zeta_bar = std::min(best_zeta_for(u_bar),
                           30.0 * std::sqrt(std::norm(dotu(h2.coeffs, u_bar)) + n2));

    const int nv = 2 * n + 4;  // [Re u; Im u; Re zeta; Im zeta; t; rho]
    const int iz_re = 2 * n, iz_im = 2 * n + 1, it_ = 2 * n + 2, irho = 2 * n + 3;
    const auto g1 = detail::rows_for_gain(h1.coeffs, nv, 0);
    const auto g2 = detail::rows_for_gain(h2.coeffs, nv, 0);

    MaxMinState state;
    double t_prev = -std::numeric_limits<double>::infinity();
    cvec u_best = u_bar;
    cx zeta_best = zeta_bar;
    bool have_iterate = false;
    bool retried_conservative = false;

    for (int q = 0; q < max_outer; ++q) {
        // closed-form auxiliary update at the current expansion point; the
        // numerator bound is exact there
        const PrecoderPair bar = detail::pair_from_reduced(u_bar, zeta_bar, h2.coeffs, beta);
        ChannelVector h2n{h2.coeffs, h2.gen_variance};
        const double y = update_y(bar.w1, bar.w2, h2n, n2, bar.w2);
        state.y = y;

        ConicProgram p;
        p.n_vars = nv;
        p.c = VectorXd::Zero(nv);
        p.c(it_) = -1.0;  // maximize t

        // C1: ||u|| <= sqrt(P)
        SocConstraint pow;
        pow.A = MatrixXd::Zero(2 * n, nv);
        pow.A.topLeftCorner(2 * n, 2 * n).setIdentity();
        pow.d = VectorXd::Zero(2 * n);
        pow.g = VectorXd::Zero(nv);
        pow.f = std::sqrt(P);
        p.soc.push_back(pow);

        // C2: strong user's received point on the sector center
        p.lin_eq.push_back({g1.im, 0.0});
        p.lin_ineq.push_back({-g1.re, 0.0});

        // C3: Im(zeta) = 0, Re(zeta) >= 0
        VectorXd zim = VectorXd::Zero(nv), zre = VectorXd::Zero(nv);
        zim(iz_im) = 1.0;
        zre(iz_re) = -1.0;
        p.lin_eq.push_back({zim, 0.0});
        p.lin_ineq.push_back({zre, 0.0});

        // C4: 2 Re(conj(a_bar) h1^T u) - |a_bar|^2 >= n1 t, a_bar = h1^T u_bar
        const cx a_bar = dotu(h1.coeffs, u_bar);
        VectorXd c4 = -2.0 * (a_bar.real() * g1.re + a_bar.imag() * g1.im);
        c4(it_) += n1;
        p.lin_ineq.push_back({c4, -std::norm(a_bar)});

        // C5 with y fixed: y^2 ||h2^T u - beta zeta||^2 <= 2 y rho - t - y^2 n2
        // plus rho^2 <= Alin(zeta)
        VectorXd v_re = g2.re, v_im = g2.im;
        v_re(iz_re) -= beta.real();
        v_re(iz_im) += beta.imag();
        v_im(iz_re) -= beta.imag();
        v_im(iz_im) -= beta.real();
        VectorXd srow = VectorXd::Zero(nv);  // s = 2 y rho - t - y^2 n2
        srow(irho) = 2.0 * y;
        srow(it_) = -1.0;
        const double soff = -y * y * n2;
        SocConstraint c5;
        c5.A = MatrixXd::Zero(3, nv);
        c5.A.row(0) = 2.0 * y * v_re.transpose();
        c5.A.row(1) = 2.0 * y * v_im.transpose();
        c5.A.row(2) = -srow.transpose();
        c5.d = Eigen::Vector3d(0.0, 0.0, 1.0 - soff);
        c5.g = srow;
        c5.f = 1.0 + soff;
        p.soc.push_back(c5);

        VectorXd alin = VectorXd::Zero(nv);  // Alin = 2 Re(conj(zeta_bar) zeta) - |zeta_bar|^2
        alin(iz_re) = 2.0 * zeta_bar.real();
        alin(iz_im) = 2.0 * zeta_bar.imag();
        const double alin_off = -std::norm(zeta_bar);
        SocConstraint rho2;
        rho2.A = MatrixXd::Zero(2, nv);
        rho2.A(0, irho) = 2.0;
        rho2.A.row(1) = -alin.transpose();
        rho2.d = Eigen::Vector2d(0.0, 1.0 - alin_off);
        rho2.g = alin;
        rho2.f = 1.0 + alin_off;
        p.soc.push_back(rho2);

        auto sol = comabench::solve(p, 1e-8, 100);
        const bool usable =
            sol.status == SolveStatus::Optimal ||
            (sol.status == SolveStatus::MaxIter && sol.x.size() == nv && sol.x.allFinite() &&
             sol.kkt_residuals.max() <= 1e-6);
        if (!usable) {
            if (have_iterate) break;
            if (!retried_conservative) {
                // a far-flung first expansion can leave the subproblem badly
                // scaled; retry once from a modest one
                retried_conservative = true;
                zeta_bar = std::sqrt(std::norm(dotu(h2.coeffs, u_bar)) + n2);
                --q;
                continue;
            }
            throw InfeasibleProblem("solve_sermin_coma: subproblem failed");
        }

        const double t_new = sol.x(it_);
        if (t_new < t_prev - 1e-9 * (1.0 + std::abs(t_prev))) break;  // solver noise floor

        u_best = detail::unstack_u(sol.x, n, 0);
        zeta_best = cx(sol.x(iz_re), 0.0);  // exact alignment
        have_iterate = true;
        state.t_trace.push_back(t_new);
        state.t = t_new;
        const bool converged =
            t_prev > -1e300 && std::abs(t_new - t_prev) <= stop_tol * (1.0 + std::abs(t_new));
        t_prev = t_new;
        u_bar = u_best;
        // exact block step on the weak-user gain before re-expanding
        const double zj = best_zeta_for(u_bar);
        const double sinr_j = zj * zj / (std::norm(dotu(h2.coeffs, u_bar) - beta * zj) + n2);
        const double sinr_cur =
            std::norm(zeta_best) /
            (std::norm(dotu(h2.coeffs, u_bar) - beta * zeta_best) + n2);
        zeta_bar = (sinr_j > sinr_cur) ? cx(zj, 0.0) : zeta_best;
        if (converged) break;
    }
    if (!have_iterate) throw InfeasibleProblem("solve_sermin_coma: no feasible iterate");

    ComaSerResult out;
    out.precoders = detail::pair_from_reduced(u_best, zeta_best, h2.coeffs, beta);
    out.t_star = state.t;
    out.state = std::move(state);
    out.state.expansion_point = out.precoders;
    return out;
}

struct NomaSerResult {
    PrecoderPair precoders;
    double t_star = 0.0;
};

/// Conventional NOMA max-min SNR by bisection on t. Each probe solves the
/// lifted power minimization under
///   SIC decodability  |h1^T w2|^2 >= (|h1^T w1|^2 + noise1) r2
///   weak user         |h2^T w2|^2 >= t (|h2^T w1|^2 + noise2)
/// and accepts t when the rank-1 extracted pair fits the power budget. The
/// optimal answer to this formulation silences the strong user (w1 = 0),
/// since nothing rewards |h1^T w1|.
///
/// With `include_strong_floor` the max-min covers every detection stage of
/// the SIC receiver instead: the strong user's own SNR enters the min
/// (|h1^T w1|^2 >= t noise1) and the SIC stage threshold scales with the
/// target (max(r2, t) instead of r2). That variant feeds the link-level
/// comparisons, where the end-to-end error rate is limited by the weakest
/// detection stage.
inline NomaSerResult solve_sermin_noma(const PairScenario& sc, const ChannelVector& h1,
                                       const ChannelVector& h2, double tol = 1e-5,
                                       bool include_strong_floor = false, int n_draws = 200) {
    const int n = static_cast<int>(h1.size());
    if (static_cast<int>(h2.size()) != n)
        throw std::invalid_argument("solve_sermin_noma: dimension mismatch");
    if (!(sc.power_budget > 0.0))
        throw std::invalid_argument("solve_sermin_noma: power budget must be positive");

    const cmat H1 = lifted_gain_matrix(h1.coeffs);
    const cmat H2 = lifted_gain_matrix(h2.coeffs);
    const cmat Z = cmat::Zero(n, n);
    const double P = sc.power_budget;

    Rng rng(0x5e7f100dULL);
    PrecoderPair best_pair;
    bool have_pair = false;

    auto probe = [&](double t) {
        SdrProgram prog;
        prog.n = n;
        const double sic = include_strong_floor ? std::max(sc.r2, t) : sc.r2;
        if (sic > 0.0) prog.constraints.push_back({cmat(-sic * H1), H1, sc.noise1 * sic});
        if (t > 0.0) {
            prog.constraints.push_back({cmat(-t * H2), H2, t * sc.noise2});
            if (include_strong_floor) prog.constraints.push_back({H1, Z, t * sc.noise1});
        }
        if (prog.constraints.empty()) {  // zero power is trivially feasible
            best_pair = PrecoderPair{cvec(static_cast<std::size_t>(n), cx(0, 0)),
                                     cvec(static_cast<std::size_t>(n), cx(0, 0))};
            have_pair = true;
            return true;
        }
        auto res = solve_sdr(prog, 1e-8, 100);
        if (res.status == SdrStatus::Infeasible) return false;
        if (res.status != SdrStatus::Optimal) return false;
        if (res.objective > P * (1.0 + 1e-9) + 1e-12) return false;
        try {
            auto pair = extract_rank1_pair(res.W1, res.W2, prog.constraints, n_draws, rng);
            const double pw = norm_sq(pair.first) + norm_sq(pair.second);
            if (pw > P * (1.0 + 1e-9) + 1e-12) return false;
            best_pair = PrecoderPair{pair.first, pair.second};
            have_pair = true;
            return true;
        } catch (const RandomizationFailure&) {
            return false;
        }
    };

    if (!probe(0.0))
        throw InfeasibleProblem("solve_sermin_noma: SIC target unattainable within the budget");

    double t_ub = P * norm_sq(h2.coeffs) / sc.noise2;
    // the bracket top is a hard analytic cap; still verify and widen if the
    // probe accepts it (boundary numerics)
    while (t_ub > 0.0 && probe(t_ub)) t_ub *= 2.0;

    double lo = 0.0, hi = t_ub;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (probe(mid))
            lo = mid;
        else
            hi = mid;
    }
    if (lo > 0.0) probe(lo);  // leave best_pair at the accepted level
    if (!have_pair) throw InfeasibleProblem("solve_sermin_noma: no feasible pair recovered");

    NomaSerResult out;
    out.precoders = best_pair;
    out.t_star = lo;
    return out;
}

/// Orthogonal baseline under the same average power budget: per-user MRT in
/// its own slot with the max-min split p_i ~ noise_i/||h_i||^2 over 2P
/// (power P averaged over both slots). Equalizes the two slot SNRs.
inline std::pair<PrecoderPair, double> solve_sermin_oma(const PairScenario& sc,
                                                        const ChannelVector& h1,
                                                        const ChannelVector& h2) {
    const double nh1 = h1.norm_sq(), nh2 = h2.norm_sq();
    if (!(nh1 > 0.0) || !(nh2 > 0.0)) throw InfeasibleProblem("solve_sermin_oma: zero channel");
    const double a1 = sc.noise1 / nh1, a2 = sc.noise2 / nh2;
    const double p1 = 2.0 * sc.power_budget * a1 / (a1 + a2);
    const double p2 = 2.0 * sc.power_budget * a2 / (a1 + a2);
    PrecoderPair pr;
    pr.w1.resize(h1.size());
    pr.w2.resize(h2.size());
    for (std::size_t i = 0; i < h1.size(); ++i) {
        pr.w1[i] = std::sqrt(p1) * std::conj(h1.coeffs[i]) / std::sqrt(nh1);
        pr.w2[i] = std::sqrt(p2) * std::conj(h2.coeffs[i]) / std::sqrt(nh2);
    }
    const double snr = p1 * nh1 / sc.noise1;  // equalized across users
    return {pr, snr};
}

}  // namespace comabench
