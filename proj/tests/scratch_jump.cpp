#include <chrono>
#include <cstdio>

#include "somersault/trajopt.hpp"

using namespace somersault;

int main(int argc, char** argv) {
    FslipParams p;
    p.mass = 33.0;
    p.gravity = 9.81;
    p.stiffness_poly = Polynomial({4600.0, 1000.0, 2500.0});
    p.damping_poly = Polynomial({50.0, 10.0, 0.0});
    p.inertia_poly = Polynomial({0.70, 1.0, 1.25});

    FslipState standing;
    standing.L = 0.8;
    standing.z = 0.8 - p.mass * p.gravity / p.stiffness_poly(0.8);

    JumpTask task;
    task.liftoff_zd = 3.5;
    task.direction = (argc > 1 && argv[1][0] == 'f') ? -1 : +1;
    task.standing = standing;
    if (argc > 2) {
        task.forward_target = std::atof(argv[2]);
        task.has_forward_target = true;
    }

    const int N = argc > 3 ? std::atoi(argv[3]) : 40;
    const NlpProblem prob = build_jump_nlp(p, task, N);
    const Eigen::VectorXd guess = default_guess(prob);

    SqpOptions opts;
    opts.verbose = true;
    opts.max_iter = 900;

    const auto t0 = std::chrono::steady_clock::now();
    const NlpSolution sol = solve_nlp(prob, guess, opts);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::printf("status=%s iters=%d time=%.2fs obj=%.6e kkt=%.2e\n",
                solver_status_name(sol.status), sol.iterations, secs, sol.objective,
                sol.kkt_norm);
    std::printf("T=%.4f max_eq=%.3e max_ineq=%.3e\n", sol.T, sol.max_eq_residual,
                sol.max_ineq_violation);
    for (const auto& [name, v] : sol.worst_rows) std::printf("  %-24s %.3e\n", name.c_str(), v);
    const int NN = static_cast<int>(sol.states.rows());
    for (int k = 0; k < NN; k += std::max(1, NN / 12)) {
        const auto grf = fslip_grf(FslipState::from_vec(sol.states.row(k).transpose()),
                                   FslipControl{sol.controls(k, 0), sol.controls(k, 1),
                                                sol.controls(k, 2)},
                                   p);
        std::printf(
            "k=%2d x=%+.3f z=%.3f L=%.3f zd=%+.3f thd=%+.3f | Ldd=%+.1f u=%+.1f tau=%+.1f | "
            "Fz=%7.1f Fx=%+7.1f\n",
            k, sol.states(k, 0), sol.states(k, 1), sol.states(k, 3), sol.states(k, 5),
            sol.states(k, 6), sol.controls(k, 0), sol.controls(k, 1), sol.controls(k, 2), grf.fz,
            grf.fx);
    }
    return sol.status == SolverStatus::Converged ? 0 : 1;
}
