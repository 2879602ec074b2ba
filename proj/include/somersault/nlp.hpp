#pragma once

#include <Eigen/Core>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace somersault {

struct NlpError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Smooth NLP in standard form:
//   min f(x)   s.t.  c_eq(x) = 0,  c_in(x) <= 0,  lb <= x <= ub
// Jacobians are dense; every constraint row carries a name for diagnostics.
struct NlpFunctions {
    int num_vars = 0;
    int num_eq = 0;
    int num_ineq = 0;
    Eigen::VectorXd lb, ub;  // +-inf allowed
    std::vector<std::string> eq_names, ineq_names;

    std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)> objective;
    std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&, Eigen::MatrixXd*)> equalities;
    std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&, Eigen::MatrixXd*)> inequalities;

    // optional exact Lagrangian Hessian d2/dx2 [f + lam'c_eq + mu'c_in];
    // when absent the solver falls back to damped BFGS
    std::function<void(const Eigen::VectorXd&, const Eigen::VectorXd& lam,
                       const Eigen::VectorXd& mu, Eigen::MatrixXd&)>
        lagrangian_hessian;

    void check_finite(const Eigen::VectorXd& c, const std::vector<std::string>& names,
                      const char* kind) const;
};

struct NlpResiduals {
    double max_eq = 0.0;            // max |c_eq|
    double max_ineq = 0.0;          // max(0, c_in)
    double max_bound = 0.0;         // box violation
    std::string worst_eq, worst_ineq;
    std::vector<std::pair<std::string, double>> violations;  // sorted, worst first
};

// From-scratch feasibility evaluation at x; independent of any solver state.
NlpResiduals evaluate_residuals(const NlpFunctions& nlp, const Eigen::VectorXd& x,
                                double report_threshold = 1e-8);

struct GradientCheck {
    double max_rel_err_objective = 0.0;
    double max_rel_err_eq = 0.0;
    double max_rel_err_ineq = 0.0;
    double worst() const {
        return std::max(max_rel_err_objective, std::max(max_rel_err_eq, max_rel_err_ineq));
    }
};

// Central finite differences vs the analytic Jacobians at x.
GradientCheck check_gradients(const NlpFunctions& nlp, const Eigen::VectorXd& x, double h = 1e-6);

}  // namespace somersault
