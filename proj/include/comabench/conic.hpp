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

#include <Eigen/Dense>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "comabench/conelp.hpp"

namespace comabench {

/// a'x = b  (Eq) or a'x <= b (Ineq).
struct LinearConstraint {
    Eigen::VectorXd a;
    double b = 0.0;
};

/// ||A x + d|| <= g'x + f.
struct SocConstraint {
    Eigen::MatrixXd A;
    Eigen::VectorXd d;
    Eigen::VectorXd g;
    double f = 0.0;
};

/// Canonical convex subproblem emitted by every optimizer in this project:
///
///     minimize    x' Q x + c' x          (Q symmetric PSD, possibly zero)
///     subject to  a'x  = b               for each lin_eq
///                 a'x <= b               for each lin_ineq
///                 ||A x + d|| <= g'x + f for each soc
struct ConicProgram {
    int n_vars = 0;
    Eigen::MatrixXd Q;  // n x n or empty for a linear objective
    Eigen::VectorXd c;
    std::vector<LinearConstraint> lin_eq;
    std::vector<LinearConstraint> lin_ineq;
    std::vector<SocConstraint> soc;

    void validate() const {
        if (n_vars < 1) throw std::invalid_argument("ConicProgram: n_vars must be >= 1");
        if (c.size() != n_vars) throw std::invalid_argument("ConicProgram: c length mismatch");
        if (Q.size() > 0) {
            if (Q.rows() != n_vars || Q.cols() != n_vars)
                throw std::invalid_argument("ConicProgram: Q dimension mismatch");
            if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + Q.cwiseAbs().maxCoeff()))
                throw std::invalid_argument("ConicProgram: Q not symmetric");
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (Q + Q.transpose()),
                                                              Eigen::EigenvaluesOnly);
            const double floor = -1e-10 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
            if (es.eigenvalues().minCoeff() < floor)
                throw std::invalid_argument("ConicProgram: Q not positive semidefinite");
        }
        for (const auto& le : lin_eq)
            if (le.a.size() != n_vars) throw std::invalid_argument("ConicProgram: eq row width");
        for (const auto& li : lin_ineq)
            if (li.a.size() != n_vars) throw std::invalid_argument("ConicProgram: ineq row width");
        for (const auto& sc : soc) {
            if (sc.A.cols() != n_vars || sc.g.size() != n_vars || sc.d.size() != sc.A.rows())
                throw std::invalid_argument("ConicProgram: soc block width");
        }
    }

    double objective(const Eigen::VectorXd& x) const {
        double v = c.dot(x);
        if (Q.size() > 0) v += x.dot(Q * x);
        return v;
    }
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, MaxIter };

struct KktResiduals {
    double primal = 0.0;
    double dual = 0.0;
    double gap = 0.0;

    double max() const { return std::max(primal, std::max(dual, gap)); }
};

struct SolveResult {
    SolveStatus status = SolveStatus::MaxIter;
    Eigen::VectorXd x;
    double objective_value = 0.0;
    KktResiduals kkt_residuals;
    double dual_bound = 0.0;  // certified lower bound on the optimum when Optimal
};

namespace conic_detail {

/// Max violation of the original constraints at x, each scaled unit-free.
inline double constraint_violation(const ConicProgram& p, const Eigen::VectorXd& x) {
    double viol = 0.0;
    for (const auto& le : p.lin_eq)
        viol = std::max(viol, std::abs(le.a.dot(x) - le.b) / (1.0 + std::abs(le.b)));
    for (const auto& li : p.lin_ineq)
        viol = std::max(viol, (li.a.dot(x) - li.b) / (1.0 + std::abs(li.b)));
    for (const auto& sc : p.soc) {
        const double lhs = (sc.A * x + sc.d).norm();
        const double rhs = sc.g.dot(x) + sc.f;
        viol = std::max(viol, (lhs - rhs) / (1.0 + std::abs(rhs)));
    }
    return viol;
}

}  // namespace conic_detail

/// Solves a ConicProgram with the interior-point core. A quadratic objective
/// is lowered to an epigraph second-order cone internally. Feasibility of an
/// Optimal exit is re-verified against the original constraint data (not the
/// solver's internal state) before it is reported.
inline SolveResult solve(const ConicProgram& progIn, double tol = 1e-8, int max_iter = 100) {
    using Eigen::MatrixXd;
    using Eigen::VectorXd;
    progIn.validate();

    // equilibrate constraint rows (constraint scaling leaves x and the
    // objective untouched); SOC blocks take one common factor
    ConicProgram prog = progIn;
    for (auto& le : prog.lin_eq) {
        const double s = le.a.norm();
        if (s > 0.0) {
            le.a /= s;
            le.b /= s;
        }
    }
    for (auto& li : prog.lin_ineq) {
        const double s = li.a.norm();
        if (s > 0.0) {
            li.a /= s;
            li.b /= s;
        }
    }
    for (auto& sc : prog.soc) {
        double s = std::max(sc.A.cwiseAbs().maxCoeff(), sc.g.cwiseAbs().maxCoeff());
        s = std::max(s, std::max(std::abs(sc.f), sc.d.cwiseAbs().maxCoeff()));
        if (s > 0.0) {
            sc.A /= s;
            sc.d /= s;
            sc.g /= s;
            sc.f /= s;
        }
    }

    const int n = prog.n_vars;

    // rank-revealing factor of Q: Q = Lq' Lq with Lq (r x n)
    MatrixXd Lq;
    bool has_quad = false;
    if (prog.Q.size() > 0 && prog.Q.cwiseAbs().maxCoeff() > 0.0) {
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (prog.Q + prog.Q.transpose()));
        const VectorXd ev = es.eigenvalues();
        const double cutoff = 1e-14 * std::max(1.0, ev.cwiseAbs().maxCoeff());
        std::vector<int> keep;
        for (int i = 0; i < n; ++i)
            if (ev(i) > cutoff) keep.push_back(i);
        if (!keep.empty()) {
            Lq.resize(static_cast<int>(keep.size()), n);
            for (std::size_t k = 0; k < keep.size(); ++k)
                Lq.row(static_cast<int>(k)) =
                    std::sqrt(ev(keep[k])) * es.eigenvectors().col(keep[k]).transpose();
            has_quad = true;
        }
    }

    const int nv = n + (has_quad ? 1 : 0);  // epigraph variable t at index n
    const int rq = has_quad ? static_cast<int>(Lq.rows()) : 0;

    ConeSpec cones;
    cones.nonneg = static_cast<int>(prog.lin_ineq.size());
    int m = cones.nonneg;
    for (const auto& sc : prog.soc) {
        cones.soc_dims.push_back(static_cast<int>(sc.A.rows()) + 1);
        m += static_cast<int>(sc.A.rows()) + 1;
    }
    if (has_quad) {
        cones.soc_dims.push_back(rq + 2);  // || (2 Lq x ; 1 - t) || <= 1 + t
        m += rq + 2;
    }

    VectorXd c = VectorXd::Zero(nv);
    c.head(n) = prog.c;
    if (has_quad) c(n) = 1.0;

    const int p = static_cast<int>(prog.lin_eq.size());
    MatrixXd A(p, nv);
    VectorXd b(p);
    for (int i = 0; i < p; ++i) {
        A.row(i).setZero();
        A.row(i).head(n) = prog.lin_eq[i].a.transpose();
        b(i) = prog.lin_eq[i].b;
    }

    MatrixXd G = MatrixXd::Zero(m, nv);
    VectorXd h = VectorXd::Zero(m);
    int row = 0;
    for (const auto& li : prog.lin_ineq) {
        G.row(row).head(n) = li.a.transpose();
        h(row) = li.b;
        ++row;
    }
    for (const auto& sc : prog.soc) {
        G.row(row).head(n) = -sc.g.transpose();
        h(row) = sc.f;
        ++row;
        const int k = static_cast<int>(sc.A.rows());
        G.block(row, 0, k, n) = -sc.A;
        h.segment(row, k) = sc.d;
        row += k;
    }
    if (has_quad) {
        G(row, n) = -1.0;  // s0 = 1 + t
        h(row) = 1.0;
        ++row;
        G.block(row, 0, rq, n) = -2.0 * Lq;  // s_mid = 2 Lq x
        row += rq;
        G(row, n) = 1.0;  // s_last = 1 - t
        h(row) = 1.0;
        ++row;
    }

    const ConelpResult raw = conelp_solve(c, A, b, G, h, cones, tol, max_iter);

    SolveResult out;
    out.kkt_residuals = {raw.pres, raw.dres, raw.relgap};
    switch (raw.status) {
        case ConeStatus::Optimal: out.status = SolveStatus::Optimal; break;
        case ConeStatus::PrimalInfeasible: out.status = SolveStatus::Infeasible; break;
        case ConeStatus::DualInfeasible: out.status = SolveStatus::Unbounded; break;
        case ConeStatus::MaxIter: out.status = SolveStatus::MaxIter; break;
    }
    if (out.status == SolveStatus::Optimal || out.status == SolveStatus::MaxIter) {
        out.x = raw.x.head(n);
        out.objective_value = progIn.objective(out.x);
        out.dual_bound = raw.dcost;
        if (out.status == SolveStatus::Optimal) {
            // independent feasibility pass on the original (unscaled) data
            const double viol = conic_detail::constraint_violation(progIn, out.x);
            if (viol > 50.0 * tol || !out.x.allFinite()) out.status = SolveStatus::MaxIter;
        }
    }
    return out;
}

/// Plain-text dump for offline inspection, one constraint per line.
/// Format:
///   conic_program n=<n_vars>
///   obj_quad i j value          (one line per nonzero upper-triangular Q entry)
///   obj_lin  i value            (one line per nonzero c entry)
///   eq   a_0 .. a_{n-1} = b
///   ineq a_0 .. a_{n-1} <= b
///   soc  k | A row-major (k*n values) | d (k values) | g (n values) | f
inline void dump_program(const ConicProgram& p, std::ostream& os) {
    os << "conic_program n=" << p.n_vars << "\n";
    if (p.Q.size() > 0)
        for (int i = 0; i < p.n_vars; ++i)
            for (int j = i; j < p.n_vars; ++j)
                if (p.Q(i, j) != 0.0) os << "obj_quad " << i << " " << j << " " << p.Q(i, j) << "\n";
    for (int i = 0; i < p.c.size(); ++i)
        if (p.c(i) != 0.0) os << "obj_lin " << i << " " << p.c(i) << "\n";
    for (const auto& le : p.lin_eq) {
        os << "eq";
        for (int i = 0; i < le.a.size(); ++i) os << " " << le.a(i);
        os << " = " << le.b << "\n";
    }
    for (const auto& li : p.lin_ineq) {
        os << "ineq";
        for (int i = 0; i < li.a.size(); ++i) os << " " << li.a(i);
        os << " <= " << li.b << "\n";
    }
    for (const auto& sc : p.soc) {
        os << "soc " << sc.A.rows() << " |";
        for (int i = 0; i < sc.A.rows(); ++i)
            for (int j = 0; j < sc.A.cols(); ++j) os << " " << sc.A(i, j);
        os << " |";
        for (int i = 0; i < sc.d.size(); ++i) os << " " << sc.d(i);
        os << " |";
        for (int i = 0; i < sc.g.size(); ++i) os << " " << sc.g(i);
        os << " | " << sc.f << "\n";
    }
}

}  // namespace comabench
