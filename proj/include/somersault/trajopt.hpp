#pragma once

#include <Eigen/Core>
#include <memory>
#include <string>
#include <vector>

#include "somersault/fslip.hpp"
#include "somersault/nlp.hpp"
#include "somersault/reference.hpp"
#include "somersault/sqp.hpp"

namespace somersault {

struct TrajoptError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Jump task: lift-off vertical velocity (or apex rise), flip direction,
// optional forward displacement target at touch-down.
struct JumpTask {
    double liftoff_zd = 3.5;        // m/s; derived from apex_rise if that is set
    double apex_rise = 0.0;         // m; > 0 means liftoff_zd = sqrt(2 g apex)
    int direction = +1;             // +1 backflip, -1 frontflip
    double forward_target = 0.0;    // m at touch-down; 0 disables the row
    bool has_forward_target = false;
    FslipState standing;            // initial node

    double resolved_liftoff_zd(double g) const;
};

// T_flight = 2 zd / g;  thetad_lo = (dir*pi - beta_lo) g / zd.
struct LiftOffTargets {
    double t_flight;
    double thetad_liftoff;
};
LiftOffTargets lift_off_targets(const JumpTask& task, double beta_lo, double g);

// Trapezoidal integration defect x_{k+1} - x_k - dT/2 (f_k + f_{k+1}).
Eigen::VectorXd trapezoid_defect(const Eigen::VectorXd& x0, const Eigen::VectorXd& x1,
                                 const Eigen::VectorXd& f0, const Eigen::VectorXd& f1, double dT);

enum class PhaseKind { Jumping, Landing };

struct CostWeights {
    double c1 = 1e-3;  // Ldd^2
    double c2 = 1e-3;  // u^2
    double c3 = 1e-3;  // tau^2
    double alpha = 10.0;  // spring-rate penalty (landing only)
};

// Discretized FSLIP trajectory optimization: decision vector holds N nodes of
// (state slice, control slice) plus the free final time T.
struct NlpProblem {
    static constexpr int state_dim = 8;
    static constexpr int ctrl_dim = 3;
    static constexpr int per_node = state_dim + ctrl_dim;

    PhaseKind kind = PhaseKind::Jumping;
    int N = 40;
    FslipParams params;
    CostWeights weights;
    JumpTask task;            // jumping only
    FslipState init_state;    // node-0 pin
    double z_des = 0.0;       // landing terminal height
    double t_min = 0.2, t_max = 2.0;

    NlpFunctions nlp;  // assembled problem (scaled internally)

    int num_vars() const { return N * per_node + 1; }
    int state_offset(int k) const { return k * per_node; }
    int ctrl_offset(int k) const { return k * per_node + state_dim; }
    int time_index() const { return N * per_node; }

    Eigen::Vector3d ctrl_scale() const;

    // pack/unpack between physical node data and the (scaled) decision vector
    Eigen::VectorXd pack(const Eigen::MatrixXd& states, const Eigen::MatrixXd& controls,
                         double T) const;
    void unpack(const Eigen::VectorXd& x, Eigen::MatrixXd& states, Eigen::MatrixXd& controls,
                double& T) const;
};

struct NlpSolution {
    Eigen::MatrixXd states;    // N x 8, physical units
    Eigen::MatrixXd controls;  // N x 3, physical units
    double T = 0.0;
    double objective = 0.0;
    SolverStatus status = SolverStatus::MaxIter;
    int iterations = 0;
    double kkt_norm = 0.0;
    // independently recomputed residuals (physical units)
    double max_eq_residual = 0.0;
    double max_ineq_violation = 0.0;
    std::vector<std::pair<std::string, double>> worst_rows;

    std::string to_json() const;
};

NlpProblem build_jump_nlp(const FslipParams& params, const JumpTask& task, int N = 40,
                          const CostWeights& weights = {});
NlpProblem build_landing_nlp(const FslipParams& params, const FslipState& init, int N = 30,
                             double z_des = -1.0, const CostWeights& weights = {});

Eigen::VectorXd default_guess(const NlpProblem& problem);

NlpSolution solve_nlp(const NlpProblem& problem, const Eigen::VectorXd& guess,
                      const SqpOptions& opts = {});

// From-scratch recheck built on the public FSLIP operations (no solver or
// transcription internals); fills the residual fields of a solution.
void verify_solution(const NlpProblem& problem, NlpSolution& sol);

// Cubic references L(t), x(t), H(t) = I(L) thetad, pitch(t) = beta(t).
// Refuses non-converged solutions.
ReferenceBundle extract_reference(const NlpSolution& sol, const FslipParams& params);

}  // namespace somersault
