#include "somersault/sqp.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <limits>

#include "somersault/qp.hpp"

namespace somersault {

namespace {

struct Eval {
    double f = 0.0;
    Eigen::VectorXd grad;
    Eigen::VectorXd ceq, cin;
    Eigen::MatrixXd Jeq, Jin;
};

void evaluate(const NlpFunctions& nlp, const Eigen::VectorXd& x, Eval& e, bool with_derivs) {
    e.f = nlp.objective(x, with_derivs ? &e.grad : nullptr);
    if (!std::isfinite(e.f)) throw NlpError("NaN/inf in objective");
    if (nlp.num_eq > 0) {
        nlp.equalities(x, e.ceq, with_derivs ? &e.Jeq : nullptr);
        nlp.check_finite(e.ceq, nlp.eq_names, "equality");
    } else {
        e.ceq.resize(0);
        e.Jeq.resize(0, nlp.num_vars);
    }
    if (nlp.num_ineq > 0) {
        nlp.inequalities(x, e.cin, with_derivs ? &e.Jin : nullptr);
        nlp.check_finite(e.cin, nlp.ineq_names, "inequality");
    } else {
        e.cin.resize(0);
        e.Jin.resize(0, nlp.num_vars);
    }
}

double violation_l1(const Eval& e) {
    double v = 0.0;
    for (Eigen::Index i = 0; i < e.ceq.size(); ++i) v += std::abs(e.ceq[i]);
    for (Eigen::Index i = 0; i < e.cin.size(); ++i) v += std::max(0.0, e.cin[i]);
    return v;
}

double violation_inf(const Eval& e) {
    double v = 0.0;
    for (Eigen::Index i = 0; i < e.ceq.size(); ++i) v = std::max(v, std::abs(e.ceq[i]));
    for (Eigen::Index i = 0; i < e.cin.size(); ++i) v = std::max(v, e.cin[i]);
    return v;
}

// dogleg step toward linearized feasibility within a 2-norm ball
Eigen::VectorXd normal_step(const Eval& cur, const NlpFunctions& nlp, const Eigen::VectorXd& x,
                            double radius) {
    const int n = nlp.num_vars;
    const int me = nlp.num_eq;
    const int mi = nlp.num_ineq;
    std::vector<int> viol;
    for (int i = 0; i < mi; ++i)
        if (cur.cin[i] > 0) viol.push_back(i);
    const int ma = me + static_cast<int>(viol.size());
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    if (ma == 0) return v;

    Eigen::MatrixXd M(ma, n);
    Eigen::VectorXd cc(ma);
    if (me > 0) {
        M.topRows(me) = cur.Jeq;
        cc.head(me) = cur.ceq;
    }
    for (size_t k = 0; k < viol.size(); ++k) {
        M.row(me + static_cast<int>(k)) = cur.Jin.row(viol[k]);
        cc[me + static_cast<int>(k)] = cur.cin[viol[k]];
    }
    const Eigen::VectorXd gv = M.transpose() * cc;
    const double gn2 = gv.squaredNorm();
    if (gn2 < 1e-28) return v;

    const Eigen::MatrixXd NN = M.transpose() * M + 1e-10 * Eigen::MatrixXd::Identity(n, n);
    const Eigen::VectorXd v_gn = NN.ldlt().solve(-gv);
    const double jg2 = (M * gv).squaredNorm();
    const Eigen::VectorXd v_c = -(gn2 / std::max(jg2, 1e-28)) * gv;
    if (v_gn.norm() <= radius) {
        v = v_gn;
    } else if (v_c.norm() >= radius) {
        v = -(radius / std::sqrt(gn2)) * gv;
    } else {
        const Eigen::VectorXd w = v_gn - v_c;
        const double a = w.squaredNorm();
        const double b = 2.0 * v_c.dot(w);
        const double c0 = v_c.squaredNorm() - radius * radius;
        const double tau = (-b + std::sqrt(std::max(0.0, b * b - 4 * a * c0))) / (2.0 * a);
        v = v_c + tau * w;
    }
    for (int j = 0; j < n; ++j)
        v[j] = std::min(std::max(v[j], nlp.lb[j] - x[j]), nlp.ub[j] - x[j]);
    return v;
}

}  // namespace

const char* solver_status_name(SolverStatus s) {
    switch (s) {
        case SolverStatus::Converged: return "converged";
        case SolverStatus::MaxIter: return "max-iter";
        case SolverStatus::Infeasible: return "infeasible";
    }
    return "?";
}

SqpResult solve_sqp(const NlpFunctions& nlp, const Eigen::VectorXd& x0, const SqpOptions& opts) {
    const int n = nlp.num_vars;
    const int me = nlp.num_eq;
    const int mi = nlp.num_ineq;

    SqpResult out;
    Eigen::VectorXd x = x0.cwiseMax(nlp.lb).cwiseMin(nlp.ub);

    Eval cur;
    evaluate(nlp, x, cur, true);

    const bool exact_hessian = static_cast<bool>(nlp.lagrangian_hessian);
    Eigen::MatrixXd B = Eigen::MatrixXd::Identity(n, n);
    bool hessian_scaled = false;
    double nu = opts.penalty_init;
    double radius = opts.trust_init;  // fallback normal-step ball only
    double sigma = 1e-4;              // Levenberg damping against flat directions
    int stalls = 0;
    double best_theta = violation_inf(cur);
    int no_theta_progress = 0;

    Eigen::VectorXd lam_prev = Eigen::VectorXd::Zero(me);
    Eigen::VectorXd mu_prev = Eigen::VectorXd::Zero(mi);
    if (exact_hessian && me > 0) {
        // least-squares multipliers at the start so the first Hessian carries
        // constraint curvature
        lam_prev = cur.Jeq.transpose()
                       .colPivHouseholderQr()
                       .solve(-cur.grad)
                       .eval();
    }

    for (int iter = 0; iter < opts.max_iter; ++iter) {
        out.iterations = iter + 1;

        if (exact_hessian) {
            nlp.lagrangian_hessian(x, lam_prev, mu_prev, B);
            B.diagonal().array() += sigma;
        }

        // plain SQP subproblem: full Newton targets, bounds as step box
        QpProblem qp;
        qp.H = B;
        qp.g = cur.grad;
        qp.A = cur.Jeq;
        qp.b = -cur.ceq;
        qp.C.resize(mi, n);
        qp.d.resize(mi);
        if (mi > 0) {
            qp.C = cur.Jin;
            qp.d = -cur.cin;
        }
        qp.xlb = nlp.lb - x;
        qp.xub = nlp.ub - x;

        QpResult qr = solve_qp(qp);
        Eigen::VectorXd d;
        Eigen::VectorXd lam = Eigen::VectorXd::Zero(me);
        Eigen::VectorXd mu = Eigen::VectorXd::Zero(mi);
        bool qp_ok = qr.status == QpStatus::Optimal;
        bool relaxed = false;

        if (!qp_ok) {
            // composite fallback: normal dogleg step + relaxed targets
            const Eigen::VectorXd v = normal_step(cur, nlp, x, radius);
            if (me > 0) qp.b = cur.Jeq * v;
            if (mi > 0) {
                const Eigen::VectorXd Jv = cur.Jin * v;
                for (int i = 0; i < mi; ++i) qp.d[i] = std::max(-cur.cin[i], Jv[i] + 1e-12);
            }
            qr = solve_qp(qp);
            qp_ok = qr.status == QpStatus::Optimal;
            relaxed = true;
            if (!qp_ok) d = v;  // pure feasibility move as a last resort
        }
        if (qp_ok) {
            d = qr.x;
            lam = qr.lambda_eq;
            if (mi > 0) mu = qr.mu_ineq.head(mi);
            lam_prev = lam;
            mu_prev = mu;
        }

        // convergence: feasible point with true KKT stationarity
        const double feas = violation_inf(cur);
        if (qp_ok && !relaxed && feas <= opts.tol_feas) {
            Eigen::VectorXd stat = cur.grad;
            if (me > 0) stat += cur.Jeq.transpose() * lam;
            if (mi > 0) stat += cur.Jin.transpose() * mu;
            for (int j = 0; j < n; ++j) {
                if (std::isfinite(nlp.ub[j]) && x[j] >= nlp.ub[j] - 1e-9 && stat[j] < 0)
                    stat[j] = 0;
                if (std::isfinite(nlp.lb[j]) && x[j] <= nlp.lb[j] + 1e-9 && stat[j] > 0)
                    stat[j] = 0;
            }
            if (stat.cwiseAbs().maxCoeff() <= opts.tol_kkt) {
                out.status = SolverStatus::Converged;
                out.lambda_eq = lam;
                out.mu_ineq = mu;
                break;
            }
        }

        // monotone l1 penalty: multiplier bound plus the model-decrease rule
        const double mult_inf = std::max(lam.size() ? lam.cwiseAbs().maxCoeff() : 0.0,
                                         mu.size() ? mu.cwiseAbs().maxCoeff() : 0.0);
        const double theta0 = violation_l1(cur);
        double theta_lin = 0.0;
        if (me > 0) theta_lin += (cur.ceq + cur.Jeq * d).cwiseAbs().sum();
        if (mi > 0) theta_lin += (cur.cin + cur.Jin * d).cwiseMax(0.0).sum();
        const double quad = cur.grad.dot(d) + 0.5 * d.dot(B * d);
        double nu_req = 1.5 * mult_inf + 1.0;
        if (theta0 - theta_lin > 1e-14)
            nu_req = std::max(nu_req, 2.0 * quad / (theta0 - theta_lin) + 1e-6);
        if (nu < nu_req) nu = nu_req;

        const double phi0 = cur.f + nu * theta0;
        const double Ddir = cur.grad.dot(d) - nu * (theta0 - theta_lin);

        double alpha = 1.0;
        bool accepted = false;
        Eigen::VectorXd xt;
        Eval trial;

        // local phase: near the feasible manifold take safeguarded full
        // Newton steps so the merit function cannot block fast convergence;
        // a Newton step leaves an O(|d|^2) residual, which the guard allows
        if (qp_ok && !relaxed && feas <= 1e-5) {
            xt = x + d;
            evaluate(nlp, xt, trial, false);
            const double guard =
                std::max({10.0 * feas, std::min(1e-4, d.squaredNorm()), 1e-8});
            if (violation_inf(trial) <= guard) accepted = true;
        }

        for (int ls = 0; !accepted && ls < opts.max_line_search; ++ls) {
            xt = x + alpha * d;
            evaluate(nlp, xt, trial, false);
            const double phit = trial.f + nu * violation_l1(trial);
            if (phit <= phi0 + 1e-4 * alpha * std::min(Ddir, 0.0)) {
                accepted = true;
                break;
            }
            if (ls == 0 && me > 0) {
                // second-order correction against the Maratos effect
                Eigen::VectorXd ce_full;
                nlp.equalities(xt, ce_full, nullptr);
                const Eigen::MatrixXd JJt =
                    cur.Jeq * cur.Jeq.transpose() + 1e-10 * Eigen::MatrixXd::Identity(me, me);
                const Eigen::VectorXd dsoc = -cur.Jeq.transpose() * JJt.ldlt().solve(ce_full);
                Eigen::VectorXd xs = (x + d + dsoc).cwiseMax(nlp.lb).cwiseMin(nlp.ub);
                Eval soc;
                evaluate(nlp, xs, soc, false);
                const double phis = soc.f + nu * violation_l1(soc);
                if (phis <= phi0 + 1e-4 * std::min(Ddir, 0.0)) {
                    xt = xs;
                    trial = soc;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }

        if (!accepted) {
            if (opts.verbose)
                std::printf("sqp iter %3d  REJECT |d| %.3e  Ddir %.3e  nu %.1e  qp %s\n", iter,
                            d.norm(), Ddir, nu, qp_status_name(qr.status));
            ++stalls;
            radius = std::max(0.25 * radius, 1e-4);
            sigma = std::min(sigma * 10.0, 1e2);
            if (stalls >= 20) {
                out.status = violation_inf(cur) > 1e2 * opts.tol_feas ? SolverStatus::Infeasible
                                                                      : SolverStatus::MaxIter;
                out.message = "line search stalled";
                out.lambda_eq = lam;
                out.mu_ineq = mu;
                break;
            }
            continue;
        }
        stalls = 0;
        if (relaxed && alpha >= 0.99) radius = std::min(2.0 * radius, 10.0);
        if (alpha >= 0.99)
            sigma = std::max(sigma * 0.3, 1e-9);
        else if (alpha < 0.1)
            sigma = std::min(sigma * 4.0, 1e2);

        Eval next;
        evaluate(nlp, xt, next, true);

        if (!exact_hessian) {
            // damped BFGS on the Lagrangian gradient
            const Eigen::VectorXd s = xt - x;
            Eigen::VectorXd gl_new = next.grad;
            Eigen::VectorXd gl_old = cur.grad;
            if (me > 0) {
                gl_new += next.Jeq.transpose() * lam;
                gl_old += cur.Jeq.transpose() * lam;
            }
            if (mi > 0) {
                gl_new += next.Jin.transpose() * mu;
                gl_old += cur.Jin.transpose() * mu;
            }
            Eigen::VectorXd yv = gl_new - gl_old;
            const double ss = s.squaredNorm();
            if (ss > 1e-30) {
                const Eigen::VectorXd Bs = B * s;
                const double sBs = s.dot(Bs);
                double sy = s.dot(yv);
                if (sy < 0.2 * sBs) {
                    const double thetab = 0.8 * sBs / (sBs - sy);
                    yv = thetab * yv + (1.0 - thetab) * Bs;
                    sy = s.dot(yv);
                }
                if (!hessian_scaled && sy > 1e-12) {
                    B *= yv.squaredNorm() / sy;  // Shanno-Phua sizing before first update
                    hessian_scaled = true;
                    const Eigen::VectorXd Bs2 = B * s;
                    const double sBs2 = s.dot(Bs2);
                    B += yv * yv.transpose() / sy - Bs2 * Bs2.transpose() / sBs2;
                } else if (sy > 1e-12) {
                    B += yv * yv.transpose() / sy - Bs * Bs.transpose() / sBs;
                }
            }
        }

        x = xt;
        cur = next;
        out.lambda_eq = lam;
        out.mu_ineq = mu;

        // force the penalty up if feasibility has stopped improving well
        // away from the manifold; capped so merit noise cannot dominate
        const double th_now = violation_inf(cur);
        if (th_now < 0.9 * best_theta) {
            best_theta = th_now;
            no_theta_progress = 0;
        } else if (th_now > 1e-4 && ++no_theta_progress >= 20) {
            nu = std::min(nu * 10.0, 1e6);
            no_theta_progress = 0;
        }

        if (opts.verbose && iter % 10 == 0) {
            int di = 0;
            const double dmax = d.cwiseAbs().maxCoeff(&di);
            std::printf("sqp iter %3d  f %.6e  viol %.3e  |d|inf %.3e@%d  a %.2e  nu %.1e  %s\n",
                        iter, cur.f, violation_inf(cur), dmax, di, alpha, nu,
                        relaxed ? "relaxed" : "");
        }
    }

    out.x = x;
    out.objective = cur.f;
    out.max_eq_violation = cur.ceq.size() ? cur.ceq.cwiseAbs().maxCoeff() : 0.0;
    out.max_ineq_violation = 0.0;
    for (Eigen::Index i = 0; i < cur.cin.size(); ++i)
        out.max_ineq_violation = std::max(out.max_ineq_violation, cur.cin[i]);

    if (out.lambda_eq.size() != me) out.lambda_eq = Eigen::VectorXd::Zero(me);
    if (out.mu_ineq.size() != mi) out.mu_ineq = Eigen::VectorXd::Zero(mi);

    // true stationarity residual with the final multipliers
    Eigen::VectorXd stat = cur.grad;
    if (me > 0) stat += cur.Jeq.transpose() * out.lambda_eq;
    if (mi > 0) stat += cur.Jin.transpose() * out.mu_ineq;
    for (int j = 0; j < n; ++j) {
        // active bounds absorb sign-correct residual components
        if (std::isfinite(nlp.ub[j]) && x[j] >= nlp.ub[j] - 1e-10 && stat[j] < 0) stat[j] = 0;
        if (std::isfinite(nlp.lb[j]) && x[j] <= nlp.lb[j] + 1e-10 && stat[j] > 0) stat[j] = 0;
    }
    out.kkt_norm = stat.cwiseAbs().maxCoeff();
    if (out.status == SolverStatus::MaxIter && out.iterations >= opts.max_iter)
        out.message = "iteration limit";
    return out;
}

}  // namespace somersault
