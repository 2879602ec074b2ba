#pragma once

#include <Eigen/Core>
#include <string>

namespace somersault {

// Strictly convex dense QP:
//   min 1/2 x' H x + g' x
//   s.t. A x = b,  C x <= d
// H must be positive definite (a small diagonal shift is applied if the
// Cholesky factorization fails marginally).
struct QpProblem {
    Eigen::MatrixXd H;
    Eigen::VectorXd g;
    Eigen::MatrixXd A;  // may have 0 rows
    Eigen::VectorXd b;
    Eigen::MatrixXd C;  // may have 0 rows
    Eigen::VectorXd d;
    // optional variable bounds (empty or size n; +-inf entries are skipped);
    // cheaper than spelling them out as C rows
    Eigen::VectorXd xlb, xub;
};

enum class QpStatus { Optimal, Infeasible, MaxIter, EqInconsistent };

struct QpResult {
    Eigen::VectorXd x;
    Eigen::VectorXd lambda_eq;  // stationarity: H x + g + A' lambda + C' mu = 0
    Eigen::VectorXd mu_ineq;    // mu >= 0, mu_i (C x - d)_i = 0
    Eigen::VectorXd mu_lb, mu_ub;  // bound multipliers (size n when bounds given)
    QpStatus status = QpStatus::MaxIter;
    int iterations = 0;
    double kkt_residual = 0.0;  // max of stationarity / feasibility / complementarity
};

const char* qp_status_name(QpStatus s);

// Equalities are eliminated through a rank-revealing QR of A'; inequalities
// are handled by a Goldfarb-Idnani dual active-set iteration in the reduced
// space. Exact (to factorization roundoff) at termination.
QpResult solve_qp(const QpProblem& qp, int max_iter = 0);

// Independent KKT residual evaluation (shared by tests and solver reporting).
double qp_kkt_residual(const QpProblem& qp, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& lambda_eq, const Eigen::VectorXd& mu_ineq);

}  // namespace somersault
