#pragma once

#include <Eigen/Core>
#include <string>

#include "somersault/nlp.hpp"

namespace somersault {

enum class SolverStatus { Converged, MaxIter, Infeasible };

const char* solver_status_name(SolverStatus s);

struct SqpOptions {
    int max_iter = 400;
    double tol_kkt = 1e-6;     // stationarity, absolute (projected on the box)
    double tol_feas = 1e-9;    // constraint violation
    double tol_step = 1e-11;   // accept convergence on a tiny feasible step
    int max_line_search = 30;
    double penalty_init = 10.0;
    double trust_init = 1.0;   // fallback normal-step ball radius
    double trust_max = 50.0;
    bool verbose = false;
};

struct SqpResult {
    Eigen::VectorXd x;
    Eigen::VectorXd lambda_eq;   // equality multipliers
    Eigen::VectorXd mu_ineq;     // general inequality multipliers (>= 0)
    SolverStatus status = SolverStatus::MaxIter;
    int iterations = 0;
    double objective = 0.0;
    double kkt_norm = 0.0;       // stationarity residual (inf-norm)
    double max_eq_violation = 0.0;
    double max_ineq_violation = 0.0;
    std::string message;
};

// Damped-BFGS SQP with an l1-merit line search and second-order correction.
// QP subproblems go through solve_qp (equality null-space + dual active set).
SqpResult solve_sqp(const NlpFunctions& nlp, const Eigen::VectorXd& x0,
                    const SqpOptions& opts = {});

}  // namespace somersault
