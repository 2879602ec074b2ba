#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "somersault/qp.hpp"

using namespace somersault;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

double objective(const QpProblem& qp, const VectorXd& x) {
    return 0.5 * x.dot(qp.H * x) + qp.g.dot(x);
}

// Brute-force reference: enumerate active subsets, solve the KKT system,
// keep the best feasible candidate with nonnegative multipliers. Independent
// of the production solver on purpose.
bool enumerate_qp(const QpProblem& qp, VectorXd& best_x, double& best_f) {
    const int n = static_cast<int>(qp.H.rows());
    const int me = static_cast<int>(qp.A.rows());
    const int mi = static_cast<int>(qp.C.rows());
    bool found = false;
    best_f = 1e300;
    for (unsigned mask = 0; mask < (1u << mi); ++mask) {
        std::vector<int> act;
        for (int i = 0; i < mi; ++i)
            if (mask & (1u << i)) act.push_back(i);
        const int k = static_cast<int>(act.size());
        MatrixXd K = MatrixXd::Zero(n + me + k, n + me + k);
        VectorXd rhs(n + me + k);
        K.topLeftCorner(n, n) = qp.H;
        rhs.head(n) = -qp.g;
        if (me > 0) {
            K.block(0, n, n, me) = qp.A.transpose();
            K.block(n, 0, me, n) = qp.A;
            rhs.segment(n, me) = qp.b;
        }
        for (int j = 0; j < k; ++j) {
            K.block(0, n + me + j, n, 1) = qp.C.row(act[j]).transpose();
            K.block(n + me + j, 0, 1, n) = qp.C.row(act[j]);
            rhs[n + me + j] = qp.d[act[j]];
        }
        Eigen::FullPivLU<MatrixXd> lu(K);
        if (!lu.isInvertible()) continue;
        const VectorXd sol = lu.solve(rhs);
        const VectorXd x = sol.head(n);
        bool ok = true;
        for (int j = 0; j < k; ++j)
            if (sol[n + me + j] < -1e-9) ok = false;
        if (mi > 0 && ok) ok = ((qp.C * x - qp.d).maxCoeff() < 1e-8);
        if (me > 0 && ok) ok = ((qp.A * x - qp.b).cwiseAbs().maxCoeff() < 1e-8);
        if (!ok) continue;
        const double f = objective(qp, x);
        if (f < best_f) {
            best_f = f;
            best_x = x;
            found = true;
        }
    }
    return found;
}

}  // namespace

TEST_CASE("unconstrained minimum") {
    QpProblem qp;
    qp.H = MatrixXd::Identity(3, 3) * 2.0;
    qp.g = VectorXd::Constant(3, -2.0);
    qp.A.resize(0, 3);
    qp.b.resize(0);
    qp.C.resize(0, 3);
    qp.d.resize(0);
    const QpResult r = solve_qp(qp);
    REQUIRE(r.status == QpStatus::Optimal);
    CHECK((r.x - VectorXd::Constant(3, 1.0)).norm() < 1e-12);
}

TEST_CASE("equality-only quadratic matches closed-form KKT solution") {
    // min 1/2 x'Hx + g'x  s.t.  x0 + x1 = 1
    QpProblem qp;
    qp.H.setZero(2, 2);
    qp.H << 2, 0, 0, 4;
    qp.g.resize(2);
    qp.g << -1, -2;
    qp.A.resize(1, 2);
    qp.A << 1, 1;
    qp.b.resize(1);
    qp.b << 1;
    qp.C.resize(0, 2);
    qp.d.resize(0);
    const QpResult r = solve_qp(qp);
    REQUIRE(r.status == QpStatus::Optimal);
    // KKT: 2x0 - 1 + l = 0, 4x1 - 2 + l = 0, x0 + x1 = 1 -> x = (1/2, 1/2), l = 0
    CHECK(r.x[0] == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(r.x[1] == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(std::abs(r.lambda_eq[0]) < 1e-10);
    CHECK(r.kkt_residual < 1e-10);
}

TEST_CASE("active box face found (2-torque subproblem, grid-verified)") {
    QpProblem qp;
    qp.H = MatrixXd::Identity(2, 2);
    qp.g.resize(2);
    qp.g << -10.0, -0.3;  // unconstrained optimum (10, 0.3), box caps x0 at 1
    qp.A.resize(0, 2);
    qp.b.resize(0);
    qp.C.resize(4, 2);
    qp.C << 1, 0, -1, 0, 0, 1, 0, -1;
    qp.d.resize(4);
    qp.d << 1, 1, 1, 1;
    const QpResult r = solve_qp(qp);
    REQUIRE(r.status == QpStatus::Optimal);
    CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(r.x[1] == doctest::Approx(0.3).epsilon(1e-10));

    // brute-force grid oracle
    double best = 1e300;
    Eigen::Vector2d bx;
    for (int i = 0; i <= 200; ++i)
        for (int j = 0; j <= 200; ++j) {
            Eigen::Vector2d x(-1.0 + 0.01 * i, -1.0 + 0.01 * j);
            const double f = objective(qp, x);
            if (f < best) {
                best = f;
                bx = x;
            }
        }
    CHECK((r.x - bx).norm() < 0.011);
    CHECK(objective(qp, r.x) <= best + 1e-9);
}

TEST_CASE("random feasible problems match enumeration oracle") {
    std::mt19937_64 rng(123);
    std::normal_distribution<double> gauss(0.0, 1.0);
    int solved = 0;
    for (int trial = 0; trial < 120; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 4);  // 2..5
        const int mi = 1 + static_cast<int>(rng() % 7); // 1..7
        const int me = static_cast<int>(rng() % std::min(3, n - 1));
        QpProblem qp;
        MatrixXd Q(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) Q(i, j) = gauss(rng);
        qp.H = Q.transpose() * Q + 0.3 * MatrixXd::Identity(n, n);
        qp.g = VectorXd::NullaryExpr(n, [&](Eigen::Index) { return gauss(rng); });
        VectorXd x_feas = VectorXd::NullaryExpr(n, [&](Eigen::Index) { return gauss(rng); });
        qp.A.resize(me, n);
        for (int i = 0; i < me; ++i)
            for (int j = 0; j < n; ++j) qp.A(i, j) = gauss(rng);
        qp.b = qp.A * x_feas;
        qp.C.resize(mi, n);
        qp.d.resize(mi);
        for (int i = 0; i < mi; ++i) {
            for (int j = 0; j < n; ++j) qp.C(i, j) = gauss(rng);
            qp.d[i] = qp.C.row(i) * x_feas + std::abs(gauss(rng)) * 0.5;
        }

        const QpResult r = solve_qp(qp);
        REQUIRE(r.status == QpStatus::Optimal);
        CHECK(r.kkt_residual < 1e-8);

        VectorXd x_ref;
        double f_ref;
        REQUIRE(enumerate_qp(qp, x_ref, f_ref));
        CHECK(std::abs(objective(qp, r.x) - f_ref) < 1e-6 * (1.0 + std::abs(f_ref)));
        ++solved;
    }
    CHECK(solved == 120);
}

TEST_CASE("infeasible inequalities detected") {
    QpProblem qp;
    qp.H = MatrixXd::Identity(2, 2);
    qp.g = VectorXd::Zero(2);
    qp.A.resize(0, 2);
    qp.b.resize(0);
    qp.C.resize(2, 2);
    qp.C << 1, 0, -1, 0;
    qp.d.resize(2);
    qp.d << -1.0, -1.0;  // x0 <= -1 and -x0 <= -1: empty
    const QpResult r = solve_qp(qp);
    CHECK(r.status == QpStatus::Infeasible);
}

TEST_CASE("inconsistent equalities detected") {
    QpProblem qp;
    qp.H = MatrixXd::Identity(2, 2);
    qp.g = VectorXd::Zero(2);
    qp.A.resize(2, 2);
    qp.A << 1, 1, 2, 2;
    qp.b.resize(2);
    qp.b << 1, 3;  // parallel rows, different rhs
    qp.C.resize(0, 2);
    qp.d.resize(0);
    const QpResult r = solve_qp(qp);
    CHECK(r.status == QpStatus::EqInconsistent);
}

TEST_CASE("consistent duplicate equalities are accepted") {
    QpProblem qp;
    qp.H = MatrixXd::Identity(2, 2);
    qp.g = VectorXd::Zero(2);
    qp.A.resize(2, 2);
    qp.A << 1, 1, 2, 2;
    qp.b.resize(2);
    qp.b << 1, 2;
    qp.C.resize(0, 2);
    qp.d.resize(0);
    const QpResult r = solve_qp(qp);
    REQUIRE(r.status == QpStatus::Optimal);
    CHECK(r.x[0] + r.x[1] == doctest::Approx(1.0).epsilon(1e-10));
}
