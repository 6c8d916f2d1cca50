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

// Primal-dual interior-point core for the cone LP
//
//     minimize    c'x
//     subject to  G x + s = h,  s in K,
//                 A x = b,
//
// with K a product of nonnegative orthant, second-order cones and (svec'd)
// PSD cones. Homogeneous self-dual embedding with Nesterov-Todd scaling and
// a Mehrotra predictor-corrector, dense linear algebra throughout. Problem
// sizes in this project are tiny (tens to low hundreds of variables), so
// robustness is preferred over sparsity everywhere.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace comabench {

enum class ConeStatus { Optimal, PrimalInfeasible, DualInfeasible, MaxIter };

struct ConeSpec {
    int nonneg = 0;              // leading entries of s in R+
    std::vector<int> soc_dims;   // then one block per second-order cone
    std::vector<int> psd_dims;   // then one svec'd block per PSD cone (matrix side length)

    int total_dim() const {
        int m = nonneg;
        for (int q : soc_dims) m += q;
        for (int p : psd_dims) m += p * (p + 1) / 2;
        return m;
    }
    // Jordan-algebraic rank: l + one per SOC block + matrix side per PSD block.
    int degree() const {
        int d = nonneg + static_cast<int>(soc_dims.size());
        for (int p : psd_dims) d += p;
        return d;
    }
};

struct ConelpResult {
    ConeStatus status = ConeStatus::MaxIter;
    Eigen::VectorXd x, y, z, s;
    double pcost = 0.0, dcost = 0.0;
    double pres = 0.0, dres = 0.0, relgap = 0.0;
    int iterations = 0;
};

namespace conelp_detail {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline int svec_dim(int p) { return p * (p + 1) / 2; }

// svec with sqrt(2) off-diagonal scaling so <X,Y>_F = svec(X)'svec(Y).
inline void svec_into(const MatrixXd& X, double* out) {
    const int p = static_cast<int>(X.rows());
    const double rt2 = std::sqrt(2.0);
    int k = 0;
    for (int j = 0; j < p; ++j) {
        out[k++] = X(j, j);
        for (int i = j + 1; i < p; ++i) out[k++] = rt2 * 0.5 * (X(i, j) + X(j, i));
    }
}

inline MatrixXd smat(const double* v, int p) {
    MatrixXd X(p, p);
    const double inv_rt2 = 1.0 / std::sqrt(2.0);
    int k = 0;
    for (int j = 0; j < p; ++j) {
        X(j, j) = v[k++];
        for (int i = j + 1; i < p; ++i) {
            X(i, j) = v[k] * inv_rt2;
            X(j, i) = X(i, j);
            ++k;
        }
    }
    return X;
}

// Nesterov-Todd scaling data for one cone block.
struct BlockScaling {
    VectorXd w;       // nonneg
    double eta = 1.0;  // soc
    VectorXd wbar;     // soc
    MatrixXd r, rti;   // psd; rti = r^{-T}
    VectorXd lambda;   // scaled point, lambda = W z = W^{-T} s
};

// Block layout of the cone product: kind 0 = nonneg, 1 = soc, 2 = psd.
class BlockView {
  public:
    explicit BlockView(const ConeSpec& spec) {
        int off = 0;
        if (spec.nonneg > 0) {
            offsets_.push_back(off);
            dims_.push_back(spec.nonneg);
            kinds_.push_back(0);
            sizes_.push_back(spec.nonneg);
            off += spec.nonneg;
        }
        for (int q : spec.soc_dims) {
            offsets_.push_back(off);
            dims_.push_back(q);
            kinds_.push_back(1);
            sizes_.push_back(q);
            off += q;
        }
        for (int p : spec.psd_dims) {
            offsets_.push_back(off);
            dims_.push_back(svec_dim(p));
            kinds_.push_back(2);
            sizes_.push_back(p);
            off += svec_dim(p);
        }
        total_ = off;
    }

    int count() const { return static_cast<int>(offsets_.size()); }
    int offset(int b) const { return offsets_[b]; }
    int dim(int b) const { return dims_[b]; }
    int kind(int b) const { return kinds_[b]; }
    int size(int b) const { return sizes_[b]; }
    int total() const { return total_; }

  private:
    std::vector<int> offsets_, dims_, kinds_, sizes_;
    int total_ = 0;
};

inline VectorXd cone_identity(const BlockView& bv) {
    VectorXd e = VectorXd::Zero(bv.total());
    for (int b = 0; b < bv.count(); ++b) {
        const int off = bv.offset(b);
        if (bv.kind(b) == 0) {
            e.segment(off, bv.dim(b)).setOnes();
        } else if (bv.kind(b) == 1) {
            e(off) = 1.0;
        } else {
            const int p = bv.size(b);
            MatrixXd I = MatrixXd::Identity(p, p);
            svec_into(I, e.data() + off);
        }
    }
    return e;
}

// NT scaling from strictly interior s, z. Returns false when a factorization
// degenerates (iterate fell out of the cone numerically).
inline bool compute_scaling(const BlockView& bv, const VectorXd& s, const VectorXd& z,
                            std::vector<BlockScaling>& W) {
    W.assign(bv.count(), BlockScaling{});
    for (int b = 0; b < bv.count(); ++b) {
        const int off = bv.offset(b);
        const int d = bv.dim(b);
        BlockScaling& bs = W[b];
        if (bv.kind(b) == 0) {
            bs.w.resize(d);
            bs.lambda.resize(d);
            for (int i = 0; i < d; ++i) {
                const double si = s(off + i), zi = z(off + i);
                if (!(si > 0.0) || !(zi > 0.0)) return false;
                bs.w(i) = std::sqrt(si / zi);
                bs.lambda(i) = std::sqrt(si * zi);
            }
        } else if (bv.kind(b) == 1) {
            const auto sb = s.segment(off, d);
            const auto zb = z.segment(off, d);
            const double js = sb(0) * sb(0) - sb.tail(d - 1).squaredNorm();
            const double jz = zb(0) * zb(0) - zb.tail(d - 1).squaredNorm();
            if (!(js > 0.0) || !(jz > 0.0) || !(sb(0) > 0.0) || !(zb(0) > 0.0)) return false;
            const double rs = std::sqrt(js), rz = std::sqrt(jz);
            VectorXd sbar = sb / rs, zbar = zb / rz;
            const double gamma = std::sqrt((1.0 + sbar.dot(zbar)) / 2.0);
            VectorXd jzbar = zbar;
            jzbar.tail(d - 1) *= -1.0;
            // geometric-mean point, then its Jordan square root: the scaling
            // matrix is W = eta (2 v v' - J) and needs W^2 = Q_w, not Q_wbar
            VectorXd wb = (sbar + jzbar) / (2.0 * gamma);
            VectorXd v = wb;
            v(0) += 1.0;
            v /= std::sqrt(2.0 * (1.0 + wb(0)));
            bs.wbar = v;
            bs.eta = std::sqrt(rs / rz);
            VectorXd jz_full = zb;
            jz_full.tail(d - 1) *= -1.0;
            bs.lambda = bs.eta * (2.0 * bs.wbar * bs.wbar.dot(zb) - jz_full);
        } else {
            const int p = bv.size(b);
            MatrixXd S = smat(s.data() + off, p);
            MatrixXd Z = smat(z.data() + off, p);
            Eigen::LLT<MatrixXd> lls(S), llz(Z);
            if (lls.info() != Eigen::Success || llz.info() != Eigen::Success) return false;
            MatrixXd Ls = lls.matrixL();
            MatrixXd Lz = llz.matrixL();
            Eigen::JacobiSVD<MatrixXd> svd(Lz.transpose() * Ls,
                                           Eigen::ComputeFullU | Eigen::ComputeFullV);
            VectorXd sig = svd.singularValues();
            if (!(sig.minCoeff() > 0.0)) return false;
            VectorXd isqrt = sig.array().sqrt().inverse();
            bs.r = Ls * svd.matrixV() * isqrt.asDiagonal();
            bs.rti = Lz * svd.matrixU() * isqrt.asDiagonal();
            bs.lambda.resize(d);
            MatrixXd Lam = MatrixXd::Zero(p, p);
            Lam.diagonal() = sig;
            svec_into(Lam, bs.lambda.data());
        }
    }
    return true;
}

enum class ScaleOp { W, WT, WinvT, Winv };

// out_block <- op(W_b) u_block, writing only block b's segment of `out`.
inline void apply_scaling(const BlockView& bv, const std::vector<BlockScaling>& W, int b,
                          ScaleOp op, const VectorXd& u, VectorXd& out) {
    const int off = bv.offset(b);
    const int d = bv.dim(b);
    const BlockScaling& bs = W[b];
    if (bv.kind(b) == 0) {
        if (op == ScaleOp::W || op == ScaleOp::WT)
            out.segment(off, d) = bs.w.array() * u.segment(off, d).array();
        else
            out.segment(off, d) = u.segment(off, d).array() / bs.w.array();
        return;
    }
    if (bv.kind(b) == 1) {
        const auto ub = u.segment(off, d);
        if (op == ScaleOp::W || op == ScaleOp::WT) {
            VectorXd ju = ub;
            ju.tail(d - 1) *= -1.0;
            out.segment(off, d) = bs.eta * (2.0 * bs.wbar * bs.wbar.dot(ub) - ju);
        } else {
            // W^{-1} = (1/eta) * J * (2 wbar wbar' - J) * J; J u negates the tail
            VectorXd ju = ub;
            ju.tail(d - 1) *= -1.0;
            VectorXd t = 2.0 * bs.wbar * bs.wbar.dot(ju) - ub;  // (2 wbar wbar' - J) * (J u)
            t.tail(d - 1) *= -1.0;                              // outer J
            out.segment(off, d) = t / bs.eta;
        }
        return;
    }
    const int p = bv.size(b);
    MatrixXd U = smat(u.data() + off, p);
    MatrixXd R;
    switch (op) {
        case ScaleOp::W: R = bs.r.transpose() * U * bs.r; break;
        case ScaleOp::WT: R = bs.r * U * bs.r.transpose(); break;
        case ScaleOp::WinvT: R = bs.rti.transpose() * U * bs.rti; break;
        case ScaleOp::Winv: R = bs.rti * U * bs.rti.transpose(); break;
    }
    svec_into(R, out.data() + off);
}

inline void apply_scaling_all(const BlockView& bv, const std::vector<BlockScaling>& W, ScaleOp op,
                              const VectorXd& u, VectorXd& out) {
    for (int b = 0; b < bv.count(); ++b) apply_scaling(bv, W, b, op, u, out);
}

// (W'W)^{-1} u = W^{-1} (W^{-T} u).
inline void apply_wtw_inv(const BlockView& bv, const std::vector<BlockScaling>& W,
                          const VectorXd& u, VectorXd& tmp, VectorXd& out) {
    apply_scaling_all(bv, W, ScaleOp::WinvT, u, tmp);
    apply_scaling_all(bv, W, ScaleOp::Winv, tmp, out);
}

// Dense matrix of (W'W)^{-1} for one block (reduced-KKT assembly).
inline MatrixXd wtw_inverse_block(const BlockView& bv, const std::vector<BlockScaling>& W, int b) {
    const int d = bv.dim(b);
    const BlockScaling& bs = W[b];
    if (bv.kind(b) == 0) {
        return MatrixXd(bs.w.array().square().inverse().matrix().asDiagonal());
    }
    if (bv.kind(b) == 1) {
        MatrixXd J = -MatrixXd::Identity(d, d);
        J(0, 0) = 1.0;
        MatrixXd Wbar = 2.0 * bs.wbar * bs.wbar.transpose() - J;
        MatrixXd W2 = Wbar * Wbar;
        return (J * W2 * J) / (bs.eta * bs.eta);
    }
    const int p = bv.size(b);
    MatrixXd Pinv = bs.rti * bs.rti.transpose();
    MatrixXd M(d, d);
    VectorXd basis = VectorXd::Zero(d);
    for (int j = 0; j < d; ++j) {
        basis(j) = 1.0;
        MatrixXd U = smat(basis.data(), p);
        MatrixXd R = Pinv * U * Pinv;
        VectorXd col(d);
        svec_into(R, col.data());
        M.col(j) = col;
        basis(j) = 0.0;
    }
    return 0.5 * (M + M.transpose());
}

// Jordan product lambda o u over all blocks.
inline void jordan_prod(const BlockView& bv, const VectorXd& lam, const VectorXd& u,
                        VectorXd& out) {
    for (int b = 0; b < bv.count(); ++b) {
        const int off = bv.offset(b);
        const int d = bv.dim(b);
        if (bv.kind(b) == 0) {
            out.segment(off, d) = lam.segment(off, d).array() * u.segment(off, d).array();
        } else if (bv.kind(b) == 1) {
            const auto lb = lam.segment(off, d);
            const auto ub = u.segment(off, d);
            const double head = lb.dot(ub);
            out.segment(off + 1, d - 1) = lb(0) * ub.tail(d - 1) + ub(0) * lb.tail(d - 1);
            out(off) = head;
        } else {
            const int p = bv.size(b);
            MatrixXd L = smat(lam.data() + off, p);
            MatrixXd U = smat(u.data() + off, p);
            MatrixXd R = 0.5 * (L * U + U * L);
            svec_into(R, out.data() + off);
        }
    }
}

// Solve lambda o v = u over all blocks (lambda strictly interior).
inline bool jordan_div(const BlockView& bv, const VectorXd& lam, const VectorXd& u,
                       VectorXd& out) {
    for (int b = 0; b < bv.count(); ++b) {
        const int off = bv.offset(b);
        const int d = bv.dim(b);
        if (bv.kind(b) == 0) {
            out.segment(off, d) = u.segment(off, d).array() / lam.segment(off, d).array();
        } else if (bv.kind(b) == 1) {
            const auto lb = lam.segment(off, d);
            const auto ub = u.segment(off, d);
            const double det = lb(0) * lb(0) - lb.tail(d - 1).squaredNorm();
            if (!(det > 0.0) || !(lb(0) > 0.0)) return false;
            const double v0 = (lb(0) * ub(0) - lb.tail(d - 1).dot(ub.tail(d - 1))) / det;
            out.segment(off + 1, d - 1) = (ub.tail(d - 1) - v0 * lb.tail(d - 1)) / lb(0);
            out(off) = v0;
        } else {
            const int p = bv.size(b);
            MatrixXd L = smat(lam.data() + off, p);
            MatrixXd U = smat(u.data() + off, p);
            MatrixXd V(p, p);
            for (int i = 0; i < p; ++i)
                for (int j = 0; j < p; ++j) {
                    const double den = L(i, i) + L(j, j);
                    if (!(den > 0.0)) return false;
                    V(i, j) = 2.0 * U(i, j) / den;
                }
            svec_into(V, out.data() + off);
        }
    }
    return true;
}

// Largest alpha >= 0 with lam + alpha*d in the cone (lam strictly interior).
inline double max_step(const BlockView& bv, const VectorXd& lam, const VectorXd& d) {
    double alpha = std::numeric_limits<double>::infinity();
    for (int b = 0; b < bv.count(); ++b) {
        const int off = bv.offset(b);
        const int dd = bv.dim(b);
        if (bv.kind(b) == 0) {
            for (int i = 0; i < dd; ++i)
                if (d(off + i) < 0.0) alpha = std::min(alpha, -lam(off + i) / d(off + i));
        } else if (bv.kind(b) == 1) {
            const auto lb = lam.segment(off, dd);
            const auto db = d.segment(off, dd);
            if (db(0) < 0.0) alpha = std::min(alpha, -lb(0) / db(0));
            const double a = db(0) * db(0) - db.tail(dd - 1).squaredNorm();
            const double bq = 2.0 * (lb(0) * db(0) - lb.tail(dd - 1).dot(db.tail(dd - 1)));
            const double cq = lb(0) * lb(0) - lb.tail(dd - 1).squaredNorm();
            double root = std::numeric_limits<double>::infinity();
            if (std::abs(a) < 1e-300) {
                if (bq < 0.0) root = -cq / bq;
            } else {
                const double disc = bq * bq - 4.0 * a * cq;
                if (disc >= 0.0) {
                    const double sq = std::sqrt(disc);
                    const double q = -0.5 * (bq + (bq >= 0 ? sq : -sq));
                    const double r1 = q / a;
                    if (r1 > 1e-300) root = std::min(root, r1);
                    if (std::abs(q) > 1e-300) {
                        const double r2 = cq / q;
                        if (r2 > 1e-300) root = std::min(root, r2);
                    }
                }
            }
            alpha = std::min(alpha, root);
        } else {
            const int p = bv.size(b);
            MatrixXd L = smat(lam.data() + off, p);
            MatrixXd D = smat(d.data() + off, p);
            VectorXd linv = L.diagonal().array().sqrt().inverse();
            MatrixXd M = linv.asDiagonal() * D * linv.asDiagonal();
            Eigen::SelfAdjointEigenSolver<MatrixXd> es(M, Eigen::EigenvaluesOnly);
            const double mn = es.eigenvalues().minCoeff();
            if (mn < 0.0) alpha = std::min(alpha, -1.0 / mn);
        }
    }
    return alpha;
}

}  // namespace conelp_detail

/// Cone LP solver; see header comment for the problem form. `A` may have zero
/// rows (no equalities). Deterministic: the same data gives a bitwise
/// identical result.
inline ConelpResult conelp_solve(const Eigen::VectorXd& c, const Eigen::MatrixXd& A,
                                 const Eigen::VectorXd& b, const Eigen::MatrixXd& G,
                                 const Eigen::VectorXd& h, const ConeSpec& cones,
                                 double tol = 1e-8, int max_iter = 100,
                                 std::ostream* trace = nullptr) {
    using namespace conelp_detail;
    using Eigen::MatrixXd;
    using Eigen::VectorXd;

    const int n = static_cast<int>(c.size());
    const int p = static_cast<int>(A.rows());
    const int m = cones.total_dim();
    if (G.rows() != m || G.cols() != n || h.size() != m)
        throw std::invalid_argument("conelp_solve: G/h dimensions do not match cone spec");
    if (p > 0 && A.cols() != n) throw std::invalid_argument("conelp_solve: A width mismatch");
    if (b.size() != p) throw std::invalid_argument("conelp_solve: b length mismatch");
    if (m == 0) throw std::invalid_argument("conelp_solve: empty cone");

    BlockView bv(cones);
    const double nu = static_cast<double>(cones.degree());

    // Cone blocks whose G rows are -Identity over a variable slice (the PSD
    // blocks of the SDR embedding) skip the dense G' M G product in the
    // reduced KKT assembly.
    std::vector<int> ident_col(bv.count(), -1);
    for (int bidx = 0; bidx < bv.count(); ++bidx) {
        const int off = bv.offset(bidx);
        const int d = bv.dim(bidx);
        int first = -1;
        bool is_ident = true;
        for (int i = 0; i < d && is_ident; ++i) {
            int nz = -1;
            for (int j = 0; j < n; ++j) {
                const double val = G(off + i, j);
                if (val != 0.0) {
                    if (nz >= 0 || val != -1.0) {
                        is_ident = false;
                        break;
                    }
                    nz = j;
                }
            }
            if (!is_ident || nz < 0) {
                is_ident = false;
                break;
            }
            if (i == 0)
                first = nz;
            else if (nz != first + i)
                is_ident = false;
        }
        if (is_ident && first >= 0 && first + d <= n) ident_col[bidx] = first;
    }

    VectorXd x = VectorXd::Zero(n), y = VectorXd::Zero(p);
    const VectorXd e = cone_identity(bv);
    VectorXd s = e, z = e;
    double tau = 1.0, kappa = 1.0;

    const double resx0 = std::max(1.0, c.norm());
    const double resy0 = std::max(1.0, b.norm());
    const double resz0 = std::max(1.0, h.norm());

    ConelpResult res;
    std::vector<conelp_detail::BlockScaling> W;
    Eigen::PartialPivLU<MatrixXd> lu;
    MatrixXd K2(n + p, n + p);
    MatrixXd K2reg(n + p, n + p);

    VectorXd tmp_m(m), tmp2_m(m);

    auto kkt_base_solve = [&](const VectorXd& bx, const VectorXd& by, const VectorXd& bz,
                              VectorXd& ux, VectorXd& uy, VectorXd& uz) {
        apply_wtw_inv(bv, W, bz, tmp_m, tmp2_m);
        VectorXd rhs(n + p);
        rhs.head(n) = bx + G.transpose() * tmp2_m;
        rhs.tail(p) = by;
        VectorXd sol = lu.solve(rhs);
        VectorXd resid = rhs - K2 * sol;
        sol += lu.solve(resid);
        ux = sol.head(n);
        uy = sol.tail(p);
        VectorXd gxb = G * ux - bz;
        apply_wtw_inv(bv, W, gxb, tmp_m, uz);
    };

    // solve the 3x3 block KKT system with iterative refinement against the
    // full system (the reduced solve alone loses digits once mu is tiny)
    auto kkt_solve = [&](const VectorXd& bx, const VectorXd& by, const VectorXd& bz, VectorXd& ux,
                         VectorXd& uy, VectorXd& uz) {
        kkt_base_solve(bx, by, bz, ux, uy, uz);
        VectorXd cx(n), cy(p), cz(m), wuz(m), wtwuz(m);
        for (int it = 0; it < 2; ++it) {
            apply_scaling_all(bv, W, ScaleOp::W, uz, wuz);
            apply_scaling_all(bv, W, ScaleOp::WT, wuz, wtwuz);
            VectorXd r1 = bx - (A.transpose() * uy + G.transpose() * uz);
            VectorXd r2 = by - A * ux;
            VectorXd r3 = bz - (G * ux - wtwuz);
            if (r1.lpNorm<Eigen::Infinity>() < 1e-14 && r3.lpNorm<Eigen::Infinity>() < 1e-14 &&
                (p == 0 || r2.lpNorm<Eigen::Infinity>() < 1e-14))
                break;
            kkt_base_solve(r1, r2, r3, cx, cy, cz);
            ux += cx;
            uy += cy;
            uz += cz;
        }
    };

    VectorXd rx(n), ry(p), rz(m);
    VectorXd lam(m), lamlam(m);
    VectorXd dx(n), dy(p), dz(m), ds(m);
    VectorXd wx(n), wy(p), wz(m);
    VectorXd ux(n), uy(p), uz(m);
    VectorXd ds_scaled(m), dz_scaled(m), corr(m), v(m), rhs_compl(m), wtv(m);

    // late iterations can lose ground numerically; remember the best iterate
    double best_score = std::numeric_limits<double>::infinity();
    VectorXd best_x = x, best_y = y, best_z = z, best_s = s;
    double best_tau = tau;
    double best_pres = 0, best_dres = 0, best_relgap = 0, best_pcost = 0, best_dcost = 0;

    auto finalize = [&](ConeStatus st) {
        res.status = st;
        if (st == ConeStatus::Optimal || st == ConeStatus::MaxIter) {
            if (best_score < std::numeric_limits<double>::infinity()) {
                res.pres = best_pres;
                res.dres = best_dres;
                res.relgap = best_relgap;
                res.pcost = best_pcost;
                res.dcost = best_dcost;
                res.x = best_x / best_tau;
                res.y = best_y / best_tau;
                res.z = best_z / best_tau;
                res.s = best_s / best_tau;
                if (best_score <= tol) res.status = ConeStatus::Optimal;
                return res;
            }
            res.x = x / tau;
            res.y = y / tau;
            res.z = z / tau;
            res.s = s / tau;
        } else if (st == ConeStatus::PrimalInfeasible) {
            const double sc = -(b.dot(y) + h.dot(z));
            res.x = VectorXd::Zero(n);
            res.y = y / sc;
            res.z = z / sc;
            res.s = VectorXd::Zero(m);
        } else {
            const double sc = -c.dot(x);
            res.x = x / sc;
            res.y = VectorXd::Zero(p);
            res.z = VectorXd::Zero(m);
            res.s = s / sc;
        }
        return res;
    };

    for (int iter = 0; iter < max_iter; ++iter) {
        res.iterations = iter + 1;
        rx = A.transpose() * y + G.transpose() * z + c * tau;
        ry = A * x - b * tau;
        rz = G * x + s - h * tau;
        const double rt = kappa + c.dot(x) + b.dot(y) + h.dot(z);
        const double gap = s.dot(z);
        const double mu = (gap + tau * kappa) / (nu + 1.0);

        res.pcost = c.dot(x) / tau;
        res.dcost = -(b.dot(y) + h.dot(z)) / tau;
        res.pres = std::max(p > 0 ? ry.norm() / resy0 : 0.0, rz.norm() / resz0) / tau;
        res.dres = rx.norm() / resx0 / tau;
        const double g = gap / (tau * tau);
        double relgap;
        if (res.pcost < 0.0)
            relgap = g / (-res.pcost);
        else if (res.dcost > 0.0)
            relgap = g / res.dcost;
        else
            relgap = g;
        res.relgap = relgap;

        if (trace)
            *trace << "it " << iter << " pcost " << res.pcost << " dcost " << res.dcost
                   << " pres " << res.pres << " dres " << res.dres << " gap " << g << " tau "
                   << tau << " kappa " << kappa << " mu " << mu << "\n";

        const double score = std::max(res.pres, std::max(res.dres, relgap));
        if (score < best_score) {
            best_score = score;
            best_x = x;
            best_y = y;
            best_z = z;
            best_s = s;
            best_tau = tau;
            best_pres = res.pres;
            best_dres = res.dres;
            best_relgap = relgap;
            best_pcost = res.pcost;
            best_dcost = res.dcost;
        }
        if (score <= tol) return finalize(ConeStatus::Optimal);

        const double hz_by = b.dot(y) + h.dot(z);
        if (hz_by < 0.0) {
            const double pinfres =
                (A.transpose() * y + G.transpose() * z).norm() / resx0 / (-hz_by);
            if (pinfres <= tol) return finalize(ConeStatus::PrimalInfeasible);
        }
        const double cx = c.dot(x);
        if (cx < 0.0) {
            const double dinfres =
                std::max(p > 0 ? (A * x).norm() / resy0 : 0.0, (G * x + s).norm() / resz0) / (-cx);
            if (dinfres <= tol) return finalize(ConeStatus::DualInfeasible);
        }

        if (!compute_scaling(bv, s, z, W)) return finalize(ConeStatus::MaxIter);
        for (int bidx = 0; bidx < bv.count(); ++bidx)
            lam.segment(bv.offset(bidx), bv.dim(bidx)) = W[bidx].lambda;
        jordan_prod(bv, lam, lam, lamlam);

        K2.setZero();
        for (int bidx = 0; bidx < bv.count(); ++bidx) {
            MatrixXd Minv = wtw_inverse_block(bv, W, bidx);
            const int off = bv.offset(bidx);
            const int d = bv.dim(bidx);
            if (ident_col[bidx] >= 0) {
                K2.block(ident_col[bidx], ident_col[bidx], d, d) += Minv;
            } else {
                const MatrixXd Gb = G.middleRows(off, d);
                K2.topLeftCorner(n, n).noalias() += Gb.transpose() * (Minv * Gb);
            }
        }
        if (p > 0) {
            K2.block(0, n, n, p) = A.transpose();
            K2.block(n, 0, p, n) = A;
        }
        // static quasidefinite regularization; solves are refined against K2
        const double delta = 1e-12 * (1.0 + K2.diagonal().cwiseAbs().maxCoeff());
        K2reg = K2;
        K2reg.topLeftCorner(n, n).diagonal().array() += delta;
        K2reg.bottomRightCorner(p, p).diagonal().array() -= delta;
        lu.compute(K2reg);

        kkt_solve(-c, b, h, wx, wy, wz);
        const double denom_base = c.dot(wx) + b.dot(wy) + h.dot(wz) - kappa / tau;

        double sigma = 0.0;
        corr.setZero();
        double corr_t = 0.0;
        bool numeric_failure = false;

        for (int pass = 0; pass < 2 && !numeric_failure; ++pass) {
            const double eta = (pass == 0) ? 1.0 : 1.0 - sigma;
            rhs_compl = -lamlam;
            if (pass == 1) rhs_compl += sigma * mu * e - corr;
            if (!jordan_div(bv, lam, rhs_compl, v)) {
                numeric_failure = true;
                break;
            }
            apply_scaling_all(bv, W, ScaleOp::WT, v, wtv);

            kkt_solve(-eta * rx, -eta * ry, -eta * rz - wtv, ux, uy, uz);

            const double kt_rhs =
                (pass == 0) ? (-tau * kappa) : (-tau * kappa + sigma * mu - corr_t);
            const double num = -eta * rt - kt_rhs / tau - (c.dot(ux) + b.dot(uy) + h.dot(uz));
            if (std::abs(denom_base) < 1e-300) {
                numeric_failure = true;
                break;
            }
            const double dtau = num / denom_base;
            dx = ux + dtau * wx;
            dy = uy + dtau * wy;
            dz = uz + dtau * wz;
            apply_scaling_all(bv, W, ScaleOp::W, dz, dz_scaled);
            ds_scaled = v - dz_scaled;
            apply_scaling_all(bv, W, ScaleOp::WT, ds_scaled, ds);
            const double dkappa = (kt_rhs - kappa * dtau) / tau;

            if (!dx.allFinite() || !dz.allFinite() || !std::isfinite(dtau)) {
                numeric_failure = true;
                break;
            }

            double amax = std::min(max_step(bv, lam, ds_scaled), max_step(bv, lam, dz_scaled));
            if (dtau < 0.0) amax = std::min(amax, -tau / dtau);
            if (dkappa < 0.0) amax = std::min(amax, -kappa / dkappa);

            if (pass == 0) {
                const double alpha = std::min(1.0, amax);
                const double gap_aff =
                    (lam + alpha * ds_scaled).dot(lam + alpha * dz_scaled);
                const double tk_aff = (tau + alpha * dtau) * (kappa + alpha * dkappa);
                const double mu_aff = (gap_aff + tk_aff) / (nu + 1.0);
                double ratio = std::min(1.0, std::max(0.0, mu_aff / mu));
                sigma = ratio * ratio * ratio;
                jordan_prod(bv, ds_scaled, dz_scaled, corr);
                corr_t = dtau * dkappa;
            } else {
                const double alpha = std::min(1.0, 0.99 * amax);
                x += alpha * dx;
                y += alpha * dy;
                z += alpha * dz;
                s += alpha * ds;
                tau += alpha * dtau;
                kappa += alpha * dkappa;
            }
        }

        if (numeric_failure) return finalize(ConeStatus::MaxIter);
        if (!(tau > 1e-300) || !std::isfinite(tau)) return finalize(ConeStatus::MaxIter);
    }
    return finalize(ConeStatus::MaxIter);
}

}  // namespace comabench
