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

// Semidefinite relaxation path of the transmit beamforming baselines: the
// lifted variables W_i = w_i w_i^H are optimized as Hermitian PSD matrices.
// Each Hermitian matrix is embedded as the real symmetric 2n x 2n matrix
// [[Re W, -Im W], [Im W, Re W]] and handed to the interior-point core; an
// unstructured feasible point can always be symmetrized back onto that
// structure without changing objective or constraints, so the embedding is
// exact.

#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "comabench/complex_ops.hpp"
#include "comabench/conelp.hpp"
#include "comabench/rng.hpp"

namespace comabench {

using cmat = Eigen::MatrixXcd;

/// Tr(F1 W1) + Tr(F2 W2) >= rhs with F1, F2 Hermitian.
struct SdrConstraint {
    cmat F1;
    cmat F2;
    double rhs = 0.0;
};

/// min Tr(C1 W1) + Tr(C2 W2)  s.t.  trace constraints, W1, W2 >= 0.
struct SdrProgram {
    int n = 0;
    cmat C1, C2;  // empty means identity (total power)
    std::vector<SdrConstraint> constraints;

    void validate() const {
        if (n < 1) throw std::invalid_argument("SdrProgram: n must be >= 1");
        auto check_herm = [&](const cmat& F, const char* what) {
            if (F.size() == 0) return;
            if (F.rows() != n || F.cols() != n)
                throw std::invalid_argument(std::string("SdrProgram: bad dimension in ") + what);
            if ((F - F.adjoint()).cwiseAbs().maxCoeff() >
                1e-10 * (1.0 + F.cwiseAbs().maxCoeff()))
                throw std::invalid_argument(std::string("SdrProgram: non-Hermitian ") + what);
        };
        check_herm(C1, "objective");
        check_herm(C2, "objective");
        for (const auto& cn : constraints) {
            check_herm(cn.F1, "constraint");
            check_herm(cn.F2, "constraint");
        }
    }
};

enum class SdrStatus { Optimal, Infeasible, MaxIter };

struct SdrResult {
    SdrStatus status = SdrStatus::MaxIter;
    cmat W1, W2;
    double objective = 0.0;
    double max_residual = 0.0;
};

/// Rank-1 lifted matrix conj(h) h^T for the unconjugated gain convention:
/// w^H (conj(h) h^T) w = |h^T w|^2.
inline cmat lifted_gain_matrix(const cvec& h) {
    const int n = static_cast<int>(h.size());
    cmat F(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) F(i, j) = std::conj(h[i]) * h[j];
    return F;
}

namespace sdr_detail {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline MatrixXd embed(const cmat& H) {
    const int n = static_cast<int>(H.rows());
    MatrixXd E(2 * n, 2 * n);
    E.topLeftCorner(n, n) = H.real();
    E.bottomRightCorner(n, n) = H.real();
    E.topRightCorner(n, n) = -H.imag();
    E.bottomLeftCorner(n, n) = H.imag();
    return 0.5 * (E + E.transpose());
}

inline cmat unembed(const MatrixXd& V) {
    const int n = static_cast<int>(V.rows()) / 2;
    MatrixXd A = 0.5 * (V.topLeftCorner(n, n) + V.bottomRightCorner(n, n));
    MatrixXd B = 0.5 * (V.bottomLeftCorner(n, n) - V.topRightCorner(n, n));
    cmat W = A.cast<cx>() + cx(0.0, 1.0) * B.cast<cx>();
    return 0.5 * (W + W.adjoint());
}

}  // namespace sdr_detail

/// Solves the lifted pair problem. Optimal exits are re-verified against the
/// original trace constraints and PSD requirement.
inline SdrResult solve_sdr(const SdrProgram& prog, double tol = 1e-8, int max_iter = 100) {
    using namespace sdr_detail;
    using Eigen::MatrixXd;
    using Eigen::VectorXd;
    prog.validate();

    const int n = prog.n;
    const int nn = 2 * n;
    const int d = conelp_detail::svec_dim(nn);

    const cmat C1 = prog.C1.size() ? prog.C1 : cmat(cmat::Identity(n, n));
    const cmat C2 = prog.C2.size() ? prog.C2 : cmat(cmat::Identity(n, n));

    VectorXd c(2 * d);
    conelp_detail::svec_into(embed(C1), c.data());
    conelp_detail::svec_into(embed(C2), c.data() + d);
    c *= 0.5;  // Tr(embed(H) V) = 2 Tr(H W)

    const int mc = static_cast<int>(prog.constraints.size());
    MatrixXd G = MatrixXd::Zero(mc + 2 * d, 2 * d);
    VectorXd h = VectorXd::Zero(mc + 2 * d);
    for (int i = 0; i < mc; ++i) {
        VectorXd row(2 * d);
        cmat F1 = prog.constraints[i].F1.size() ? prog.constraints[i].F1 : cmat(cmat::Zero(n, n));
        cmat F2 = prog.constraints[i].F2.size() ? prog.constraints[i].F2 : cmat(cmat::Zero(n, n));
        conelp_detail::svec_into(embed(F1), row.data());
        conelp_detail::svec_into(embed(F2), row.data() + d);
        G.row(i) = -0.5 * row.transpose();
        h(i) = -prog.constraints[i].rhs;
    }
    G.block(mc, 0, 2 * d, 2 * d) = -MatrixXd::Identity(2 * d, 2 * d);

    ConeSpec cones;
    cones.nonneg = mc;
    cones.psd_dims = {nn, nn};

    const ConelpResult raw =
        conelp_solve(c, MatrixXd(0, 2 * d), VectorXd(0), G, h, cones, tol, max_iter);

    SdrResult out;
    out.max_residual = std::max(raw.pres, std::max(raw.dres, raw.relgap));
    if (raw.status == ConeStatus::PrimalInfeasible) {
        out.status = SdrStatus::Infeasible;
        return out;
    }
    if (raw.status == ConeStatus::DualInfeasible) {
        out.status = SdrStatus::MaxIter;
        return out;
    }

    MatrixXd V1 = conelp_detail::smat(raw.x.data(), nn);
    MatrixXd V2 = conelp_detail::smat(raw.x.data() + d, nn);
    out.W1 = unembed(V1);
    out.W2 = unembed(V2);
    out.objective = ((C1 * out.W1).trace() + (C2 * out.W2).trace()).real();

    if (raw.status == ConeStatus::Optimal) {
        // independent feasibility pass on the recovered Hermitian pair
        double viol = 0.0;
        for (const auto& cn : prog.constraints) {
            double v = 0.0;
            if (cn.F1.size()) v += (cn.F1 * out.W1).trace().real();
            if (cn.F2.size()) v += (cn.F2 * out.W2).trace().real();
            viol = std::max(viol, (cn.rhs - v) / (1.0 + std::abs(cn.rhs)));
        }
        Eigen::SelfAdjointEigenSolver<cmat> e1(out.W1, Eigen::EigenvaluesOnly);
        Eigen::SelfAdjointEigenSolver<cmat> e2(out.W2, Eigen::EigenvaluesOnly);
        const double scale =
            std::max(1.0, std::max(e1.eigenvalues().cwiseAbs().maxCoeff(),
                                   e2.eigenvalues().cwiseAbs().maxCoeff()));
        viol = std::max(viol, -e1.eigenvalues().minCoeff() / scale);
        viol = std::max(viol, -e2.eigenvalues().minCoeff() / scale);
        out.status = (viol <= 50.0 * tol) ? SdrStatus::Optimal : SdrStatus::MaxIter;
    } else {
        out.status = SdrStatus::MaxIter;
    }
    return out;
}

/// w^H F w >= rhs on a single vector variable.
struct QuadConstraint {
    cmat F;
    double rhs = 0.0;
};

struct RandomizationFailure : std::runtime_error {
    RandomizationFailure() : std::runtime_error("rank-1 randomization found no feasible candidate") {}
};

/// Rank-1 recovery from a lifted PSD solution. Numerically rank-1 matrices
/// (second eigenvalue <= 1e-6 * first) return the principal eigenvector
/// scaled to sqrt(lambda_1); otherwise the best of `n_draws` Gaussian
/// randomizations, rescaled to the minimum power that satisfies every
/// constraint.
inline cvec extract_rank1(const cmat& W, const std::vector<QuadConstraint>& constraints,
                          int n_draws, Rng& rng) {
    const int n = static_cast<int>(W.rows());
    Eigen::SelfAdjointEigenSolver<cmat> es(0.5 * (W + W.adjoint()));
    const Eigen::VectorXd ev = es.eigenvalues();
    const double lmax = std::max(0.0, ev(n - 1));
    const double lsecond = (n > 1) ? std::max(0.0, ev(n - 2)) : 0.0;

    auto to_cvec = [&](const Eigen::VectorXcd& v) {
        cvec out(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = v(i);
        return out;
    };

    if (lsecond <= 1e-6 * lmax) {
        Eigen::VectorXcd v = es.eigenvectors().col(n - 1) * std::sqrt(lmax);
        return to_cvec(v);
    }

    // W^{1/2} for sampling candidates ~ CN(0, W)
    cmat root = cmat::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        const double li = std::max(0.0, ev(i));
        root += std::sqrt(li) * es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
    }

    double best_power = std::numeric_limits<double>::infinity();
    Eigen::VectorXcd best;
    for (int d = 0; d < n_draws; ++d) {
        Eigen::VectorXcd g(n);
        for (int i = 0; i < n; ++i) g(i) = rng.normal_complex(1.0);
        Eigen::VectorXcd cand = root * g;
        double scale_sq = 0.0;
        double scale_ub = std::numeric_limits<double>::infinity();
        bool ok = true;
        for (const auto& qc : constraints) {
            const double q = (cand.adjoint() * qc.F * cand).value().real();
            if (qc.rhs > 0.0) {
                if (q <= 0.0) {
                    ok = false;
                    break;
                }
                scale_sq = std::max(scale_sq, qc.rhs / q);
            } else if (q < 0.0) {
                scale_ub = std::min(scale_ub, qc.rhs / q);  // alpha^2 q >= rhs caps the scale
            }
        }
        if (!ok || scale_sq > scale_ub) continue;
        const double power = scale_sq * cand.squaredNorm();
        if (power < best_power) {
            best_power = power;
            best = cand * std::sqrt(scale_sq);
        }
    }
    if (!std::isfinite(best_power)) throw RandomizationFailure{};
    return to_cvec(best);
}

/// Joint rank-1 recovery for the lifted pair: candidates are the principal
/// eigenvector pair plus Gaussian draws (w_i ~ CN(0, W_i)); each candidate
/// pair is scaled by the smallest common factor satisfying every coupled
/// constraint, and the minimum-power pair wins.
inline std::pair<cvec, cvec> extract_rank1_pair(const cmat& W1, const cmat& W2,
                                                const std::vector<SdrConstraint>& constraints,
                                                int n_draws, Rng& rng) {
    const int n = static_cast<int>(W1.rows());
    auto eig_parts = [&](const cmat& W) {
        Eigen::SelfAdjointEigenSolver<cmat> es(0.5 * (W + W.adjoint()));
        cmat root = cmat::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            const double li = std::max(0.0, es.eigenvalues()(i));
            root += std::sqrt(li) * es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
        }
        // deterministic candidates: the principal direction alone plus the
        // full eigen-sum with a phase grid on the runner-up (exact for
        // cross-term-free rank-2 solutions)
        std::vector<Eigen::VectorXcd> cands;
        Eigen::VectorXcd principal =
            es.eigenvectors().col(n - 1) * std::sqrt(std::max(0.0, es.eigenvalues()(n - 1)));
        cands.push_back(principal);
        if (n > 1 && es.eigenvalues()(n - 2) > 1e-10 * std::max(1.0, es.eigenvalues()(n - 1))) {
            for (int k = 0; k < 4; ++k) {
                const cx ph = std::polar(1.0, k * 1.5707963267948966);
                Eigen::VectorXcd v = principal;
                for (int i = 0; i < n - 1; ++i)
                    v += (i == n - 2 ? ph : cx(1.0, 0.0)) *
                         std::sqrt(std::max(0.0, es.eigenvalues()(i))) * es.eigenvectors().col(i);
                cands.push_back(v);
            }
        }
        return std::make_pair(root, cands);
    };
    auto [root1, cands1] = eig_parts(W1);
    auto [root2, cands2] = eig_parts(W2);

    auto quad = [&](const cmat& F, const Eigen::VectorXcd& w) {
        if (!F.size()) return 0.0;
        return (w.adjoint() * F * w).value().real();
    };

    double best_power = std::numeric_limits<double>::infinity();
    Eigen::VectorXcd best1, best2;
    auto consider = [&](const Eigen::VectorXcd& w1, const Eigen::VectorXcd& w2) {
        double scale_sq = 0.0;
        double scale_ub = std::numeric_limits<double>::infinity();
        for (const auto& cn : constraints) {
            const double v = quad(cn.F1, w1) + quad(cn.F2, w2);
            if (cn.rhs > 0.0) {
                if (v <= 0.0) return;
                scale_sq = std::max(scale_sq, cn.rhs / v);
            } else if (v < 0.0) {
                scale_ub = std::min(scale_ub, cn.rhs / v);
            }
        }
        if (scale_sq > scale_ub) return;
        const double power = scale_sq * (w1.squaredNorm() + w2.squaredNorm());
        if (power < best_power) {
            best_power = power;
            best1 = w1 * std::sqrt(scale_sq);
            best2 = w2 * std::sqrt(scale_sq);
        }
    };

    for (const auto& a : cands1)
        for (const auto& b : cands2) consider(a, b);
    for (int d = 0; d < n_draws; ++d) {
        Eigen::VectorXcd g1(n), g2(n);
        for (int i = 0; i < n; ++i) {
            g1(i) = rng.normal_complex(1.0);
            g2(i) = rng.normal_complex(1.0);
        }
        consider(root1 * g1, root2 * g2);
    }
    if (!std::isfinite(best_power)) throw RandomizationFailure{};

    auto to_cvec = [&](const Eigen::VectorXcd& v) {
        cvec out(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = v(i);
        return out;
    };
    return {to_cvec(best1), to_cvec(best2)};
}

}  // namespace comabench
