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

#include <Eigen/Dense>
#include <sstream>

#include "comabench/conic.hpp"
#include "comabench/rng.hpp"
#include "oracles.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using comabench::ConeSpec;
using comabench::ConicProgram;
using comabench::LinearConstraint;
using comabench::SocConstraint;
using comabench::SolveStatus;

namespace {

ConicProgram make_empty(int n) {
    ConicProgram p;
    p.n_vars = n;
    p.c = VectorXd::Zero(n);
    return p;
}

}  // namespace

TEST_CASE("NT scaling internals satisfy lambda = W z = W^-T s", "[conic]") {
    using namespace comabench::conelp_detail;
    comabench::Rng rng(7);
    ConeSpec spec;
    spec.nonneg = 3;
    spec.soc_dims = {4};
    spec.psd_dims = {3};
    BlockView bv(spec);
    const int m = bv.total();

    // random strictly interior s, z
    VectorXd s(m), z(m);
    for (int rep = 0; rep < 20; ++rep) {
        for (int i = 0; i < 3; ++i) {
            s(i) = 0.1 + std::abs(rng.normal());
            z(i) = 0.1 + std::abs(rng.normal());
        }
        for (int i = 0; i < 3; ++i) {
            s(4 + i) = rng.normal();
            z(4 + i) = rng.normal();
        }
        s(3) = s.segment(4, 3).norm() + 0.2 + std::abs(rng.normal());
        z(3) = z.segment(4, 3).norm() + 0.2 + std::abs(rng.normal());
        MatrixXd Ms(3, 3), Mz(3, 3);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                Ms(i, j) = rng.normal();
                Mz(i, j) = rng.normal();
            }
        MatrixXd Smat = Ms * Ms.transpose() + 0.2 * MatrixXd::Identity(3, 3);
        MatrixXd Zmat = Mz * Mz.transpose() + 0.2 * MatrixXd::Identity(3, 3);
        svec_into(Smat, s.data() + 7);
        svec_into(Zmat, z.data() + 7);

        std::vector<BlockScaling> W;
        REQUIRE(compute_scaling(bv, s, z, W));
        VectorXd lam(m), wz(m), wis(m);
        for (int b = 0; b < bv.count(); ++b) lam.segment(bv.offset(b), bv.dim(b)) = W[b].lambda;
        apply_scaling_all(bv, W, ScaleOp::W, z, wz);
        apply_scaling_all(bv, W, ScaleOp::WinvT, s, wis);
        REQUIRE((wz - lam).cwiseAbs().maxCoeff() < 1e-9);
        REQUIRE((wis - lam).cwiseAbs().maxCoeff() < 1e-9);

        // W^T then W^-T round-trips
        VectorXd t1(m), t2(m);
        apply_scaling_all(bv, W, ScaleOp::WT, s, t1);
        apply_scaling_all(bv, W, ScaleOp::WinvT, t1, t2);
        // W^{-T} W^{T} = identity
        REQUIRE((t2 - s).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("projection onto a halfspace", "[conic]") {
    // min ||x||^2 s.t. a'x >= b  ->  x* = b a / ||a||^2, obj b^2/||a||^2
    ConicProgram p = make_empty(3);
    p.Q = MatrixXd::Identity(3, 3);
    VectorXd a(3);
    a << 1.0, 2.0, -2.0;
    const double b = 4.0;
    p.lin_ineq.push_back({-a, -b});  // a'x >= b
    auto r = comabench::solve(p);
    REQUIRE(r.status == SolveStatus::Optimal);
    const VectorXd xstar = b * a / a.squaredNorm();
    REQUIRE((r.x - xstar).norm() < 1e-7);
    REQUIRE(r.objective_value == Catch::Approx(b * b / a.squaredNorm()).margin(1e-8));
}

TEST_CASE("unit-ball support point", "[conic]") {
    // min c'x s.t. ||x|| <= 1 with c = (-1, 0): x* = (1, 0), obj -1
    ConicProgram p = make_empty(2);
    p.c << -1.0, 0.0;
    SocConstraint sc;
    sc.A = MatrixXd::Identity(2, 2);
    sc.d = VectorXd::Zero(2);
    sc.g = VectorXd::Zero(2);
    sc.f = 1.0;
    p.soc.push_back(sc);
    auto r = comabench::solve(p);
    REQUIRE(r.status == SolveStatus::Optimal);
    REQUIRE(r.x(0) == Catch::Approx(1.0).margin(1e-7));
    REQUIRE(std::abs(r.x(1)) < 1e-7);
    REQUIRE(r.objective_value == Catch::Approx(-1.0).margin(1e-8));
}

TEST_CASE("equality-constrained QP", "[conic]") {
    // min ||x||^2 s.t. sum x = 3  -> x* = (1,1,1)
    ConicProgram p = make_empty(3);
    p.Q = MatrixXd::Identity(3, 3);
    p.lin_eq.push_back({VectorXd::Ones(3), 3.0});
    auto r = comabench::solve(p);
    REQUIRE(r.status == SolveStatus::Optimal);
    REQUIRE((r.x - VectorXd::Ones(3)).norm() < 1e-7);
}

TEST_CASE("infeasible program yields certificate status", "[conic]") {
    ConicProgram p = make_empty(2);
    p.c << 1.0, 1.0;
    VectorXd a(2);
    a << 1.0, 0.0;
    p.lin_ineq.push_back({a, -1.0});   // x0 <= -1
    p.lin_ineq.push_back({-a, -1.0});  // x0 >= 1
    auto r = comabench::solve(p);
    REQUIRE(r.status == SolveStatus::Infeasible);
}

TEST_CASE("unbounded program detected", "[conic]") {
    ConicProgram p = make_empty(2);
    p.c << -1.0, 0.0;
    VectorXd a(2);
    a << -1.0, 0.0;
    p.lin_ineq.push_back({a, 0.0});  // x0 >= 0, objective -x0 unbounded below
    p.lin_ineq.push_back({VectorXd::Unit(2, 1), 1.0});
    p.lin_ineq.push_back({-VectorXd::Unit(2, 1), 1.0});
    auto r = comabench::solve(p);
    REQUIRE(r.status == SolveStatus::Unbounded);
}

TEST_CASE("random QPs match the active-set oracle", "[conic][oracle]") {
    comabench::Rng rng(12345);
    int solved = 0;
    for (int inst = 0; inst < 30; ++inst) {
        const int n = 4 + static_cast<int>(rng.uniform_int(5));  // 4..8
        MatrixXd R(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) R(i, j) = rng.normal();
        MatrixXd Q = R.transpose() * R / n + 0.2 * MatrixXd::Identity(n, n);
        VectorXd c(n);
        for (int i = 0; i < n; ++i) c(i) = rng.normal();

        // a few random halfspaces through points near the origin (0 feasible)
        const int mrand = 2 + static_cast<int>(rng.uniform_int(3));
        MatrixXd G(mrand, n);
        VectorXd h(mrand);
        for (int i = 0; i < mrand; ++i) {
            for (int j = 0; j < n; ++j) G(i, j) = rng.normal();
            h(i) = 0.3 + std::abs(rng.normal());
        }

        ConicProgram p = make_empty(n);
        p.Q = Q;
        p.c = c;
        for (int i = 0; i < mrand; ++i) p.lin_ineq.push_back({G.row(i).transpose(), h(i)});
        auto r = comabench::solve(p);
        REQUIRE(r.status == SolveStatus::Optimal);
        REQUIRE(r.kkt_residuals.max() <= 1e-8);

        auto oracle = oracles::active_set_qp(Q, c, MatrixXd(0, n), VectorXd(0), G, h);
        REQUIRE(oracle.found);
        REQUIRE(std::abs(r.objective_value - oracle.objective) <=
                1e-6 * (1.0 + std::abs(oracle.objective)));
        ++solved;
    }
    REQUIRE(solved == 30);
}

TEST_CASE("random cone-constrained programs match the KKT-Newton oracle", "[conic][oracle]") {
    comabench::Rng rng(777);
    for (int inst = 0; inst < 12; ++inst) {
        const int n = 4 + static_cast<int>(rng.uniform_int(3));  // 4..6
        MatrixXd R(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) R(i, j) = rng.normal();
        MatrixXd Q = R.transpose() * R / n + 0.3 * MatrixXd::Identity(n, n);
        VectorXd c(n);
        for (int i = 0; i < n; ++i) c(i) = 2.0 * rng.normal();

        MatrixXd G(1, n);
        for (int j = 0; j < n; ++j) G(0, j) = rng.normal();
        VectorXd h(1);
        h(0) = 0.5 + std::abs(rng.normal());

        std::vector<oracles::SocData> socs;
        const int ns = 1 + static_cast<int>(rng.uniform_int(2));
        for (int j = 0; j < ns; ++j) {
            oracles::SocData sd;
            const int k = 2 + static_cast<int>(rng.uniform_int(2));
            sd.A.resize(k, n);
            for (int a = 0; a < k; ++a)
                for (int bb = 0; bb < n; ++bb) sd.A(a, bb) = rng.normal();
            sd.d = VectorXd::Zero(k);
            for (int a = 0; a < k; ++a) sd.d(a) = 0.2 * rng.normal();
            sd.g = VectorXd::Zero(n);
            sd.f = sd.d.norm() + 0.5 + std::abs(rng.normal());
            socs.push_back(sd);
        }

        ConicProgram p = make_empty(n);
        p.Q = Q;
        p.c = c;
        p.lin_ineq.push_back({G.row(0).transpose(), h(0)});
        for (const auto& sd : socs) p.soc.push_back({sd.A, sd.d, sd.g, sd.f});

        auto r = comabench::solve(p);
        REQUIRE(r.status == SolveStatus::Optimal);
        REQUIRE(r.kkt_residuals.max() <= 1e-8);

        comabench::Rng orng(1000 + inst);
        auto oracle = oracles::kkt_newton_socp(Q, c, G, h, socs, orng);
        REQUIRE(oracle.found);
        REQUIRE(std::abs(r.objective_value - oracle.objective) <=
                1e-6 * (1.0 + std::abs(oracle.objective)));
    }
}

TEST_CASE("weak duality on every Optimal exit", "[conic]") {
    comabench::Rng rng(55);
    for (int inst = 0; inst < 10; ++inst) {
        const int n = 3 + static_cast<int>(rng.uniform_int(4));
        MatrixXd R(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) R(i, j) = rng.normal();
        ConicProgram p = make_empty(n);
        p.Q = R.transpose() * R / n + 0.1 * MatrixXd::Identity(n, n);
        for (int i = 0; i < n; ++i) p.c(i) = rng.normal();
        for (int i = 0; i < 3; ++i) {
            VectorXd a(n);
            for (int j = 0; j < n; ++j) a(j) = rng.normal();
            p.lin_ineq.push_back({a, 1.0 + std::abs(rng.normal())});
        }
        auto r = comabench::solve(p);
        REQUIRE(r.status == SolveStatus::Optimal);
        REQUIRE(r.objective_value >= r.dual_bound - 1e-6 * (1.0 + std::abs(r.objective_value)));
    }
}

TEST_CASE("determinism: identical program gives bitwise-identical result", "[conic]") {
    ConicProgram p = make_empty(4);
    p.Q = MatrixXd::Identity(4, 4);
    p.c << 1.0, -2.0, 0.5, 0.0;
    VectorXd a(4);
    a << 1.0, 1.0, -1.0, 2.0;
    p.lin_ineq.push_back({a, 1.5});
    SocConstraint sc;
    sc.A = MatrixXd::Identity(4, 4);
    sc.d = VectorXd::Zero(4);
    sc.g = VectorXd::Zero(4);
    sc.f = 3.0;
    p.soc.push_back(sc);

    auto r1 = comabench::solve(p);
    auto r2 = comabench::solve(p);
    REQUIRE(r1.status == r2.status);
    REQUIRE(r1.objective_value == r2.objective_value);
    for (int i = 0; i < 4; ++i) REQUIRE(r1.x(i) == r2.x(i));
}

TEST_CASE("minimal SDP: smallest eigenvalue via trace-one density matrix", "[conic][sdp]") {
    // min tr(C X) s.t. tr(X) = 1, X >= 0  has optimum lambda_min(C)
    using namespace comabench::conelp_detail;
    comabench::Rng rng(99);
    for (int rep = 0; rep < 5; ++rep) {
        const int pdim = 3 + static_cast<int>(rng.uniform_int(3));  // 3..5
        MatrixXd C(pdim, pdim);
        for (int i = 0; i < pdim; ++i)
            for (int j = 0; j <= i; ++j) {
                C(i, j) = rng.normal();
                C(j, i) = C(i, j);
            }
        const int d = svec_dim(pdim);
        VectorXd c(d), eye(d);
        svec_into(C, c.data());
        svec_into(MatrixXd::Identity(pdim, pdim), eye.data());

        MatrixXd A = eye.transpose();
        VectorXd b = VectorXd::Ones(1);
        MatrixXd G = -MatrixXd::Identity(d, d);
        VectorXd h = VectorXd::Zero(d);
        ConeSpec cones;
        cones.psd_dims = {pdim};

        auto r = comabench::conelp_solve(c, A, b, G, h, cones, 1e-9, 100);
        REQUIRE(r.status == comabench::ConeStatus::Optimal);
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(C, Eigen::EigenvaluesOnly);
        REQUIRE(r.pcost == Catch::Approx(es.eigenvalues().minCoeff()).margin(1e-6));
    }
}

TEST_CASE("minimal SDP: max lambda with C - lambda I psd", "[conic][sdp]") {
    using namespace comabench::conelp_detail;
    MatrixXd C(3, 3);
    C << 4.0, 1.0, 0.0, 1.0, 3.0, -1.0, 0.0, -1.0, 2.0;
    const int d = svec_dim(3);
    VectorXd eye(d), cc(d);
    svec_into(MatrixXd::Identity(3, 3), eye.data());
    svec_into(C, cc.data());

    // min -lambda s.t. svec(C) - lambda*svec(I) in PSD
    VectorXd c(1);
    c << -1.0;
    MatrixXd G(d, 1);
    G.col(0) = eye;
    VectorXd h = cc;
    ConeSpec cones;
    cones.psd_dims = {3};
    auto r = comabench::conelp_solve(c, MatrixXd(0, 1), VectorXd(0), G, h, cones, 1e-9, 100);
    REQUIRE(r.status == comabench::ConeStatus::Optimal);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(C, Eigen::EigenvaluesOnly);
    REQUIRE(r.x(0) == Catch::Approx(es.eigenvalues().minCoeff()).margin(1e-6));
}

TEST_CASE("program dump has one constraint per line", "[conic]") {
    ConicProgram p = make_empty(2);
    p.Q = MatrixXd::Identity(2, 2);
    p.c << 1.0, 0.0;
    VectorXd a(2);
    a << 1.0, -1.0;
    p.lin_eq.push_back({a, 0.5});
    p.lin_ineq.push_back({a, 1.0});
    SocConstraint sc;
    sc.A = MatrixXd::Identity(2, 2);
    sc.d = VectorXd::Zero(2);
    sc.g = VectorXd::Zero(2);
    sc.f = 2.0;
    p.soc.push_back(sc);

    std::ostringstream os;
    comabench::dump_program(p, os);
    const std::string text = os.str();
    REQUIRE(text.find("conic_program n=2") != std::string::npos);
    REQUIRE(text.find("eq 1 -1 = 0.5") != std::string::npos);
    REQUIRE(text.find("ineq 1 -1 <= 1") != std::string::npos);
    REQUIRE(text.find("soc 2 |") != std::string::npos);
}

TEST_CASE("validation rejects malformed programs", "[conic]") {
    ConicProgram p = make_empty(2);
    p.Q = MatrixXd(2, 2);
    p.Q << 1.0, 0.0, 0.0, -1.0;  // indefinite
    REQUIRE_THROWS_AS(comabench::solve(p), std::invalid_argument);

    ConicProgram q = make_empty(2);
    q.lin_eq.push_back({VectorXd::Ones(3), 1.0});  // wrong width
    REQUIRE_THROWS_AS(comabench::solve(q), std::invalid_argument);
}
