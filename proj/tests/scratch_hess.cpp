#include <cstdio>
#include <random>

#include "somersault/trajopt.hpp"

using namespace somersault;
using Eigen::MatrixXd;
using Eigen::VectorXd;

int main() {
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
    task.direction = 1;
    task.standing = standing;
    task.forward_target = 0.5;
    task.has_forward_target = true;

    for (int kind = 0; kind < 2; ++kind) {
        const NlpProblem prob = kind == 0 ? build_jump_nlp(p, task, 12)
                                          : build_landing_nlp(p,
                                                              [] {
                                                                  FslipState s;
                                                                  s.x = -0.05;
                                                                  s.z = 0.86;
                                                                  s.L = 0.9;
                                                                  s.zd = -2.5;
                                                                  s.xd = 0.4;
                                                                  s.thetad = 1.0;
                                                                  return s;
                                                              }(),
                                                              12);
        const int n = prob.num_vars();
        std::mt19937_64 rng(3 + kind);
        std::normal_distribution<double> g01(0.0, 1.0);
        VectorXd x = default_guess(prob);
        for (int i = 0; i < n; ++i) x[i] += 0.05 * g01(rng);
        x[prob.time_index()] = std::max(0.35, x[prob.time_index()]);
        VectorXd lam(prob.nlp.num_eq), mu(prob.nlp.num_ineq);
        for (int i = 0; i < lam.size(); ++i) lam[i] = g01(rng);
        for (int i = 0; i < mu.size(); ++i) mu[i] = std::abs(g01(rng));

        MatrixXd H;
        prob.nlp.lagrangian_hessian(x, lam, mu, H);

        auto lag_grad = [&](const VectorXd& xx) {
            VectorXd gg(n);
            prob.nlp.objective(xx, &gg);
            VectorXd c;
            MatrixXd J;
            prob.nlp.equalities(xx, c, &J);
            gg += J.transpose() * lam;
            prob.nlp.inequalities(xx, c, &J);
            gg += J.transpose() * mu;
            return gg;
        };

        double worst = 0.0;
        int wi = -1, wj = -1;
        const double h = 1e-6;
        for (int j = 0; j < n; ++j) {
            VectorXd xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            const VectorXd col = (lag_grad(xp) - lag_grad(xm)) / (2 * h);
            for (int i = 0; i < n; ++i) {
                const double e = std::abs(col[i] - H(i, j)) / std::max(1.0, std::abs(H(i, j)));
                if (e > worst) {
                    worst = e;
                    wi = i;
                    wj = j;
                }
            }
        }
        std::printf("%s: max rel hessian err %.3e at (%d,%d)  sym err %.3e\n",
                    kind == 0 ? "jump" : "landing", worst, wi, wj,
                    (H - H.transpose()).cwiseAbs().maxCoeff());
    }
    return 0;
}
