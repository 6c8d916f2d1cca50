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

// Power-minimizing precoder design for one NOMA pair. Three schemes:
//  - constructive superposition (CoMA), by successive convex approximation
//    on the constructive-interference formulation;
//  - conventional NOMA, by semidefinite relaxation plus rank-1 recovery;
//  - an orthogonal (time-division) baseline in closed form.
//
// The CoMA problem only constrains the precoders through the composite
// transmit vector u = w1 + w2 e^{j(phi2-phi1)} and the weak-user gain
// zeta = h2^T w2, so the subproblems are solved over (u, zeta) directly and
// the returned pair uses the minimum-norm w2 with h2^T w2 = zeta. Every
// problem quantity (powers, SINRs, receive points) is invariant to that
// choice of representative.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "comabench/channel.hpp"
#include "comabench/conic.hpp"
#include "comabench/scenario.hpp"
#include "comabench/sdr.hpp"
#include "comabench/sinr.hpp"

namespace comabench {

struct InfeasibleProblem : std::runtime_error {
    explicit InfeasibleProblem(const std::string& what) : std::runtime_error(what) {}
};

/// First-order lower bound of w -> |h^T w|^2 around the expansion point wbar:
///   value(w) = 2 Re( conj(h^T wbar) (h^T w) ) - |h^T wbar|^2.
/// Tangent at wbar, global lower bound everywhere (convexity of |.|^2).
struct TaylorBound {
    cx gain_at_expansion;  // h^T wbar

    double value_from_gain(cx h_dot_w) const {
        return 2.0 * (std::conj(gain_at_expansion) * h_dot_w).real() -
               std::norm(gain_at_expansion);
    }
    double value(const cvec& h, const cvec& w) const { return value_from_gain(dotu(h, w)); }
};

inline TaylorBound taylor_lower_bound(const ChannelVector& h, const cvec& wbar) {
    if (h.size() != wbar.size())
        throw std::invalid_argument("taylor_lower_bound: dimension mismatch");
    return TaylorBound{dotu(h.coeffs, wbar)};
}

/// Successive-convex-approximation bookkeeping.
struct ScaState {
    int iter = 0;
    PrecoderPair expansion_point;
    std::vector<double> objective_trace;
};

struct ComaPowerResult {
    PrecoderPair precoders;
    double power = 0.0;  // composite-vector power, the optimization objective
    ScaState state;
};

namespace detail {

// index helpers for the stacked real parameterization [Re u; Im u; ...]
struct ComplexRows {
    Eigen::VectorXd re, im;  // Re(c^T u) = re' x, Im(c^T u) = im' x over the u slice
};

inline ComplexRows rows_for_gain(const cvec& h, int n_vars, int offset) {
    const int n = static_cast<int>(h.size());
    ComplexRows r{Eigen::VectorXd::Zero(n_vars), Eigen::VectorXd::Zero(n_vars)};
    for (int i = 0; i < n; ++i) {
        r.re(offset + i) = h[static_cast<std::size_t>(i)].real();
        r.re(offset + n + i) = -h[static_cast<std::size_t>(i)].imag();
        r.im(offset + i) = h[static_cast<std::size_t>(i)].imag();
        r.im(offset + n + i) = h[static_cast<std::size_t>(i)].real();
    }
    return r;
}

inline cvec unstack_u(const Eigen::VectorXd& x, int n, int offset) {
    cvec u(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        u[static_cast<std::size_t>(i)] = cx(x(offset + i), x(offset + n + i));
    return u;
}

// minimum-norm w2 with h2^T w2 = zeta, then w1 = u - beta w2
inline PrecoderPair pair_from_reduced(const cvec& u, cx zeta, const cvec& h2, cx beta) {
    const double nh2 = norm_sq(h2);
    cvec w2(h2.size());
    for (std::size_t i = 0; i < h2.size(); ++i) w2[i] = zeta * std::conj(h2[i]) / nh2;
    cvec w1(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) w1[i] = u[i] - beta * w2[i];
    return PrecoderPair{w1, w2};
}

}  // namespace detail

/// CoMA power minimization (successive convex approximation).
///
/// minimize ||u||^2 subject to the user-1 constructive-interference sector
/// (with SNR offset sqrt(r1 sigma1^2)) and the weak-user QoS
/// |h2^T w2|^2 >= r2 (|h2^T w1|^2 + sigma2^2), whose concave left side is
/// replaced by its first-order lower bound at the current expansion point.
/// The interference term on the right is kept exact (second-order cone), so
/// every iterate is feasible for the original constraint and the objective
/// trace is nonincreasing.
///
/// `stop_tol` ends the loop when the relative objective change falls below
/// it; pass 0 to always run `q_max` iterations.
inline ComaPowerResult solve_power_min_coma(const PairScenario& sc, const ChannelVector& h1,
                                            const ChannelVector& h2, cx x1, cx x2, int q_max = 20,
                                            double stop_tol = 1e-7) {
    using Eigen::MatrixXd;
    using Eigen::VectorXd;
    const int n = static_cast<int>(h1.size());
    if (static_cast<int>(h2.size()) != n || sc.n_antennas != n)
        throw std::invalid_argument("solve_power_min_coma: dimension mismatch");
    if (!(norm_sq(h1.coeffs) > 0.0) || !(norm_sq(h2.coeffs) > 0.0))
        throw InfeasibleProblem("solve_power_min_coma: zero channel");

    const double amp = std::abs(x1);
    const cx beta = x2 / x1;
    const double theta = sc.constellation.half_angle();
    const double tan_t = std::tan(theta);
    // unit-amplitude normalization: scale noise by the symbol power
    const double n1 = sc.noise1 / (amp * amp);
    const double n2 = sc.noise2 / (amp * amp);
    const double c0 = std::sqrt(sc.r1 * n1);

    const int nv = 2 * n + 2;  // [Re u; Im u; Re zeta; Im zeta]
    const int iz_re = 2 * n, iz_im = 2 * n + 1;

    const auto g1 = detail::rows_for_gain(h1.coeffs, nv, 0);
    const auto g2 = detail::rows_for_gain(h2.coeffs, nv, 0);

    // MRT-scaled start: |zeta|^2 ~ r2 sigma2^2 so the first linearization has
    // a sensible slope
    cx zeta_bar = std::sqrt(std::max(sc.r2 * n2, 1e-12));

    ScaState state;
    double prev_obj = std::numeric_limits<double>::infinity();
    cvec u_best;
    cx zeta_best = zeta_bar;
    bool have_iterate = false;
    bool restarted = false;
    Rng restart_rng(0x5ca1ab1eULL);

    for (int q = 0; q < q_max; ++q) {
        ConicProgram p;
        p.n_vars = nv;
        p.c = VectorXd::Zero(nv);
        p.Q = MatrixXd::Zero(nv, nv);
        p.Q.topLeftCorner(2 * n, 2 * n).setIdentity();

        // CI sector rows: +-Im - tan(theta) Re <= -c0 tan(theta)
        p.lin_ineq.push_back({g1.im - tan_t * g1.re, -c0 * tan_t});
        p.lin_ineq.push_back({-g1.im - tan_t * g1.re, -c0 * tan_t});

        // weak-user QoS: Alin(zeta) - r2 n2 >= r2 |h2^T u - beta zeta|^2
        // Alin(zeta) = 2 Re(conj(zeta_bar) zeta) - |zeta_bar|^2
        VectorXd alin = VectorXd::Zero(nv);
        alin(iz_re) = 2.0 * zeta_bar.real();
        alin(iz_im) = 2.0 * zeta_bar.imag();
        const double alin_off = -std::norm(zeta_bar) - sc.r2 * n2;

        VectorXd v_re = g2.re, v_im = g2.im;  // h2^T u - beta zeta
        v_re(iz_re) -= beta.real();
        v_re(iz_im) += beta.imag();
        v_im(iz_re) -= beta.imag();
        v_im(iz_im) -= beta.real();

        SocConstraint qos;
        const double srt = 2.0 * std::sqrt(sc.r2);
        qos.A.resize(3, nv);
        qos.A.row(0) = srt * v_re.transpose();
        qos.A.row(1) = srt * v_im.transpose();
        qos.A.row(2) = -alin.transpose();
        qos.d = Eigen::Vector3d(0.0, 0.0, 1.0 - alin_off);
        qos.g = alin;
        qos.f = 1.0 + alin_off;
        p.soc.push_back(qos);

        auto sol = comabench::solve(p, 1e-8, 100);
        const bool usable =
            sol.status == SolveStatus::Optimal ||
            (sol.status == SolveStatus::MaxIter && sol.x.size() == nv && sol.x.allFinite() &&
             sol.kkt_residuals.max() <= 1e-6);
        if (!usable) {
            if (have_iterate) break;  // keep the last good iterate
            if (!restarted) {
                restarted = true;
                zeta_bar = cx(restart_rng.normal(), restart_rng.normal()) *
                           std::sqrt(std::max(sc.r2 * n2, 1e-6));
                --q;
                continue;
            }
            throw InfeasibleProblem("solve_power_min_coma: subproblem infeasible");
        }

        cvec u = detail::unstack_u(sol.x, n, 0);
        const cx zeta(sol.x(iz_re), sol.x(iz_im));
        const double obj = sol.objective_value;

        if (obj > prev_obj + 1e-9 * (1.0 + std::abs(prev_obj))) break;  // solver noise floor
        u_best = u;
        zeta_best = zeta;
        have_iterate = true;
        state.objective_trace.push_back(obj);
        state.iter = q + 1;
        const bool converged = std::abs(prev_obj - obj) <= stop_tol * (1.0 + std::abs(obj));
        prev_obj = obj;
        zeta_bar = zeta;
        if (converged && stop_tol > 0.0) break;
    }
    if (!have_iterate) throw InfeasibleProblem("solve_power_min_coma: no feasible iterate");

    ComaPowerResult out;
    out.precoders = detail::pair_from_reduced(u_best, zeta_best, h2.coeffs, beta);
    out.power = norm_sq(u_best);
    out.state = std::move(state);
    out.state.expansion_point = out.precoders;
    return out;
}

struct NomaPowerResult {
    PrecoderPair precoders;
    double power = 0.0;  // ||w1||^2 + ||w2||^2
    double sdr_bound = 0.0;
    bool randomization_gap = false;  // extraction missed the bound by > 1%
};

/// Conventional NOMA power minimization via the lifted (SDR) problem and
/// rank-1 recovery. Constraints: strong-user SINR floor r1, weak-user SINR
/// floor r2, and SIC decodability of the weak user's symbol at the strong
/// user.
inline NomaPowerResult solve_power_min_noma(const PairScenario& sc, const ChannelVector& h1,
                                            const ChannelVector& h2, int n_draws = 1000) {
    const int n = static_cast<int>(h1.size());
    if (static_cast<int>(h2.size()) != n)
        throw std::invalid_argument("solve_power_min_noma: dimension mismatch");

    const cmat H1 = lifted_gain_matrix(h1.coeffs);
    const cmat H2 = lifted_gain_matrix(h2.coeffs);
    const cmat Z = cmat::Zero(n, n);

    SdrProgram prog;
    prog.n = n;
    prog.constraints.push_back({H1, Z, (sc.sic_err_var + sc.noise1) * sc.r1});
    if (sc.r2 > 0.0) {
        prog.constraints.push_back({cmat(-sc.r2 * H2), H2, sc.noise2 * sc.r2});
        prog.constraints.push_back({cmat(-sc.r2 * H1), H1, sc.noise1 * sc.r2});
    }

    auto res = solve_sdr(prog, 1e-9, 100);
    if (res.status == SdrStatus::Infeasible)
        throw InfeasibleProblem("solve_power_min_noma: QoS targets unattainable");
    if (res.status != SdrStatus::Optimal)
        throw InfeasibleProblem("solve_power_min_noma: lifted solve did not converge");

    Rng rng(0xba5e11ULL);
    auto pair = extract_rank1_pair(res.W1, res.W2, prog.constraints, n_draws, rng);

    NomaPowerResult out;
    out.precoders = PrecoderPair{pair.first, pair.second};
    out.power = norm_sq(pair.first) + norm_sq(pair.second);
    out.sdr_bound = res.objective;
    out.randomization_gap = out.power > 1.01 * res.objective + 1e-9;
    return out;
}

/// Orthogonal (time-division) baseline: each user is served alone in half
/// the resources with maximum-ratio transmission. Delivering the same
/// per-user rate in half the resources needs the boosted SINR
/// rt_i = (1 + r_i)^2 - 1; the reported power is the average over both
/// slots, (1/2) sum_i rt_i sigma_i^2 / ||h_i||^2.
inline std::pair<PrecoderPair, double> solve_power_min_oma(const PairScenario& sc,
                                                           const ChannelVector& h1,
                                                           const ChannelVector& h2) {
    const double nh1 = h1.norm_sq(), nh2 = h2.norm_sq();
    if (!(nh1 > 0.0) || !(nh2 > 0.0))
        throw InfeasibleProblem("solve_power_min_oma: zero channel");
    const double rt1 = (1.0 + sc.r1) * (1.0 + sc.r1) - 1.0;
    const double rt2 = (1.0 + sc.r2) * (1.0 + sc.r2) - 1.0;
    const double p1 = rt1 * sc.noise1 / nh1;
    const double p2 = rt2 * sc.noise2 / nh2;

    PrecoderPair pr;
    pr.w1.resize(h1.size());
    pr.w2.resize(h2.size());
    for (std::size_t i = 0; i < h1.size(); ++i) {
        pr.w1[i] = std::sqrt(p1) * std::conj(h1.coeffs[i]) / std::sqrt(nh1);
        pr.w2[i] = std::sqrt(p2) * std::conj(h2.coeffs[i]) / std::sqrt(nh2);
    }
    return {pr, 0.5 * (p1 + p2)};
}

}  // namespace comabench
