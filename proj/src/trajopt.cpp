#include "somersault/trajopt.hpp"

#include <cmath>
#include <memory>

#include <nlohmann/json.hpp>

#include "somersault/dual.hpp"

namespace somersault {

namespace {

using D11 = Dual<11>;
using Vec8 = Eigen::Matrix<double, 8, 1>;
using Vec3 = Eigen::Matrix<double, 3, 1>;

struct NodeDerivs {
    Vec8 f;                            // state derivative
    Eigen::Matrix<double, 8, 11> Jf;   // d f / d (state, physical ctrl)
    double fx = 0, fz = 0;             // ground reaction force
    Eigen::Matrix<double, 1, 11> Jfx, Jfz;
};

Eigen::Matrix<D11, 8, 1> seed_state(const Vec8& y) {
    Eigen::Matrix<D11, 8, 1> s;
    for (int i = 0; i < 8; ++i) s[i] = D11(y[i], i);
    return s;
}

Eigen::Matrix<D11, 3, 1> seed_ctrl(const Vec3& c) {
    Eigen::Matrix<D11, 3, 1> s;
    for (int i = 0; i < 3; ++i) s[i] = D11(c[i], 8 + i);
    return s;
}

NodeDerivs eval_node(const FslipParams& p, const Vec8& y, const Vec3& c, bool with_grf) {
    const auto ys = seed_state(y);
    const auto cs = seed_ctrl(c);
    const auto f = fslip_stance_core<D11>(p, ys, cs);
    NodeDerivs out;
    for (int i = 0; i < 8; ++i) {
        out.f[i] = f[i].v;
        out.Jf.row(i) = f[i].d.transpose();
    }
    if (with_grf) {
        const auto g = fslip_grf_core<D11>(p, ys[0], ys[1], ys[3], ys[4], ys[5], ys[7], cs[1], cs[2]);
        out.fx = g.fx.v;
        out.Jfx = g.fx.d.transpose();
        out.fz = g.fz.v;
        out.Jfz = g.fz.d.transpose();
    }
    return out;
}

// spring rate sd = Ld - rd as a function of the state slice
D11 spring_rate_dual(const Eigen::Matrix<D11, 8, 1>& y) {
    const D11 r = sqrt(y[0] * y[0] + y[1] * y[1]);
    const D11 rd = (y[0] * y[4] + y[1] * y[5]) / r;
    return y[7] - rd;
}

// Everything the constraint/cost closures need, copied so the closures stay
// valid when the owning NlpProblem is moved around.
struct TransData {
    PhaseKind kind;
    int N;
    FslipParams params;
    CostWeights weights;
    JumpTask task;
    Vec8 init_vec;
    double z_des = 0.0;
    double zd_lo = 0.0;
    double t_flight = 0.0;
    Eigen::Vector3d cs;

    static constexpr int per_node = NlpProblem::per_node;
    int state_offset(int k) const { return k * per_node; }
    int ctrl_offset(int k) const { return k * per_node + 8; }
    int time_index() const { return N * per_node; }
    int num_vars() const { return N * per_node + 1; }
};

}  // namespace

double JumpTask::resolved_liftoff_zd(double g) const {
    if (apex_rise > 0.0) return std::sqrt(2.0 * g * apex_rise);
    return liftoff_zd;
}

LiftOffTargets lift_off_targets(const JumpTask& task, double beta_lo, double g) {
    const double zd = task.resolved_liftoff_zd(g);
    if (zd <= 1e-9) throw TrajoptError("lift_off_targets: lift-off velocity must be positive");
    LiftOffTargets t;
    t.t_flight = 2.0 * zd / g;
    t.thetad_liftoff = (task.direction * M_PI - beta_lo) * g / zd;
    return t;
}

Eigen::VectorXd trapezoid_defect(const Eigen::VectorXd& x0, const Eigen::VectorXd& x1,
                                 const Eigen::VectorXd& f0, const Eigen::VectorXd& f1, double dT) {
    if (x0.size() != x1.size() || x0.size() != f0.size() || x0.size() != f1.size())
        throw TrajoptError("trapezoid_defect: dimension mismatch");
    return x1 - x0 - 0.5 * dT * (f0 + f1);
}

Eigen::Vector3d NlpProblem::ctrl_scale() const {
    return {params.ldd_max, params.u_max, params.tau_max};
}

Eigen::VectorXd NlpProblem::pack(const Eigen::MatrixXd& states, const Eigen::MatrixXd& controls,
                                 double T) const {
    Eigen::VectorXd x(num_vars());
    const Eigen::Vector3d cs = ctrl_scale();
    for (int k = 0; k < N; ++k) {
        x.segment<8>(state_offset(k)) = states.row(k).transpose();
        x.segment<3>(ctrl_offset(k)) = controls.row(k).transpose().cwiseQuotient(cs);
    }
    x[time_index()] = T;
    return x;
}

void NlpProblem::unpack(const Eigen::VectorXd& x, Eigen::MatrixXd& states,
                        Eigen::MatrixXd& controls, double& T) const {
    states.resize(N, 8);
    controls.resize(N, 3);
    const Eigen::Vector3d cs = ctrl_scale();
    for (int k = 0; k < N; ++k) {
        states.row(k) = x.segment<8>(state_offset(k)).transpose();
        controls.row(k) = x.segment<3>(ctrl_offset(k)).transpose().cwiseProduct(cs.transpose());
    }
    T = x[time_index()];
}

namespace {

void assemble(NlpProblem& P) {
    const int N = P.N;
    const int n = P.num_vars();
    const double mg = P.params.mass * P.params.gravity;
    const double g = P.params.gravity;
    const Eigen::Vector3d cs = P.ctrl_scale();
    const bool jumping = P.kind == PhaseKind::Jumping;

    const double zd_lo = jumping ? P.task.resolved_liftoff_zd(g) : 0.0;
    const double t_flight = jumping ? 2.0 * zd_lo / g : 0.0;

    int me = 8 + 8 * (N - 1);
    if (jumping) {
        me += 3;
        if (P.task.has_forward_target) me += 1;
    } else {
        me += 6;
    }
    const int mi = 5 * N;

    NlpFunctions& f = P.nlp;
    f.num_vars = n;
    f.num_eq = me;
    f.num_ineq = mi;

    // names
    f.eq_names.clear();
    const char* comp[8] = {"x", "z", "theta", "L", "xd", "zd", "thetad", "Ld"};
    for (int i = 0; i < 8; ++i) f.eq_names.push_back(std::string("init.") + comp[i]);
    for (int k = 0; k + 1 < N; ++k)
        for (int i = 0; i < 8; ++i)
            f.eq_names.push_back("defect[" + std::to_string(k) + "]." + comp[i]);
    if (jumping) {
        f.eq_names.push_back("terminal.zd");
        f.eq_names.push_back("terminal.rotation");
        f.eq_names.push_back("terminal.fz");
        if (P.task.has_forward_target) f.eq_names.push_back("terminal.forward");
    } else {
        f.eq_names.insert(f.eq_names.end(),
                          {"terminal.z", "terminal.zd", "terminal.x", "terminal.xd",
                           "terminal.thetad", "terminal.spring"});
    }
    f.ineq_names.clear();
    for (int k = 0; k < N; ++k) {
        f.ineq_names.push_back("fz+[" + std::to_string(k) + "]");
        f.ineq_names.push_back("fric+[" + std::to_string(k) + "]");
        f.ineq_names.push_back("fric-[" + std::to_string(k) + "]");
        f.ineq_names.push_back("zmp+[" + std::to_string(k) + "]");
        f.ineq_names.push_back("zmp-[" + std::to_string(k) + "]");
    }

    // box bounds
    f.lb = Eigen::VectorXd::Constant(n, -std::numeric_limits<double>::infinity());
    f.ub = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
    for (int k = 0; k < N; ++k) {
        const int so = P.state_offset(k);
        f.lb[so + 0] = -2.0;  f.ub[so + 0] = 2.0;     // x
        f.lb[so + 1] = 0.15;  f.ub[so + 1] = 1.8;     // z
        f.lb[so + 2] = -60.0; f.ub[so + 2] = 60.0;    // theta
        f.lb[so + 3] = P.params.leg_min;  f.ub[so + 3] = P.params.leg_max;
        f.lb[so + 4] = -6.0;  f.ub[so + 4] = 6.0;     // xd
        f.lb[so + 5] = -8.0;  f.ub[so + 5] = 8.0;     // zd
        f.lb[so + 6] = -25.0; f.ub[so + 6] = 25.0;    // thetad
        f.lb[so + 7] = -4.0;  f.ub[so + 7] = 4.0;     // Ld
        const int co = P.ctrl_offset(k);
        for (int i = 0; i < 3; ++i) {
            f.lb[co + i] = -1.0;
            f.ub[co + i] = 1.0;
        }
    }
    f.lb[P.time_index()] = P.t_min;
    f.ub[P.time_index()] = P.t_max;

    auto td = std::make_shared<TransData>();
    td->kind = P.kind;
    td->N = P.N;
    td->params = P.params;
    td->weights = P.weights;
    td->task = P.task;
    td->init_vec = P.init_state.vec();
    td->z_des = P.z_des;
    td->zd_lo = zd_lo;
    td->t_flight = t_flight;
    td->cs = cs;

    f.equalities = [td, me, jumping, zd_lo, t_flight, g, mg, cs](
                       const Eigen::VectorXd& x, Eigen::VectorXd& c, Eigen::MatrixXd* J) {
        const TransData& Pr = *td;
        const int N = Pr.N;
        const int n = Pr.num_vars();
        const int ti = Pr.time_index();
        const double T = x[ti];
        const double dT = T / (N - 1);
        c.setZero(me);
        if (J) J->setZero(me, n);

        // node dynamics
        std::vector<NodeDerivs> nd(static_cast<size_t>(N));
        for (int k = 0; k < N; ++k) {
            const Vec8 y = x.segment<8>(Pr.state_offset(k));
            const Vec3 u = x.segment<3>(Pr.ctrl_offset(k)).cwiseProduct(cs);
            nd[static_cast<size_t>(k)] = eval_node(Pr.params, y, u, k == N - 1 && jumping);
        }

        // init rows
        const Vec8 y0 = x.segment<8>(Pr.state_offset(0));
        c.segment<8>(0) = y0 - Pr.init_vec;
        if (J) J->block<8, 8>(0, Pr.state_offset(0)).setIdentity();

        // defects
        for (int k = 0; k + 1 < N; ++k) {
            const int row = 8 + 8 * k;
            const Vec8 ya = x.segment<8>(Pr.state_offset(k));
            const Vec8 yb = x.segment<8>(Pr.state_offset(k + 1));
            const NodeDerivs& a = nd[static_cast<size_t>(k)];
            const NodeDerivs& b = nd[static_cast<size_t>(k + 1)];
            c.segment<8>(row) = yb - ya - 0.5 * dT * (a.f + b.f);
            if (J) {
                auto Ja_state = a.Jf.leftCols<8>();
                auto Jb_state = b.Jf.leftCols<8>();
                J->block<8, 8>(row, Pr.state_offset(k)) =
                    -Eigen::Matrix<double, 8, 8>::Identity() - 0.5 * dT * Ja_state;
                J->block<8, 8>(row, Pr.state_offset(k + 1)) =
                    Eigen::Matrix<double, 8, 8>::Identity() - 0.5 * dT * Jb_state;
                J->block<8, 3>(row, Pr.ctrl_offset(k)) =
                    -0.5 * dT * a.Jf.rightCols<3>() * cs.asDiagonal();
                J->block<8, 3>(row, Pr.ctrl_offset(k + 1)) =
                    -0.5 * dT * b.Jf.rightCols<3>() * cs.asDiagonal();
                J->block<8, 1>(row, ti) = -(a.f + b.f) / (2.0 * (N - 1));
            }
        }

        // terminal rows
        int row = 8 + 8 * (N - 1);
        const int sN = Pr.state_offset(N - 1);
        const int cN = Pr.ctrl_offset(N - 1);
        const Vec8 yN = x.segment<8>(sN);
        if (jumping) {
            c[row] = yN[5] - zd_lo;
            if (J) (*J)(row, sN + 5) = 1.0;
            ++row;

            // thetad_N zd_lo / g - dir pi + beta_N = 0  (Eq.(6) at the solved node)
            const double r2 = yN[0] * yN[0] + yN[1] * yN[1];
            c[row] = yN[6] * zd_lo / g - Pr.task.direction * M_PI + std::atan2(yN[0], yN[1]);
            if (J) {
                (*J)(row, sN + 6) = zd_lo / g;
                (*J)(row, sN + 0) = yN[1] / r2;
                (*J)(row, sN + 1) = -yN[0] / r2;
            }
            ++row;

            const NodeDerivs& e = nd[static_cast<size_t>(N - 1)];
            c[row] = e.fz / mg;
            if (J) {
                J->block<1, 8>(row, sN) = e.Jfz.leftCols<8>() / mg;
                J->block<1, 3>(row, cN) = e.Jfz.rightCols<3>() * cs.asDiagonal() / mg;
            }
            ++row;

            if (Pr.task.has_forward_target) {
                c[row] = yN[0] + yN[4] * t_flight - Pr.task.forward_target;
                if (J) {
                    (*J)(row, sN + 0) = 1.0;
                    (*J)(row, sN + 4) = t_flight;
                }
                ++row;
            }
        } else {
            c[row] = yN[1] - Pr.z_des;
            if (J) (*J)(row, sN + 1) = 1.0;
            ++row;
            c[row] = yN[5];
            if (J) (*J)(row, sN + 5) = 1.0;
            ++row;
            c[row] = yN[0];
            if (J) (*J)(row, sN + 0) = 1.0;
            ++row;
            c[row] = yN[4];
            if (J) (*J)(row, sN + 4) = 1.0;
            ++row;
            c[row] = yN[6];
            if (J) (*J)(row, sN + 6) = 1.0;
            ++row;

            // spring force settles to the weight
            const auto ys = seed_state(yN);
            const D11 r = sqrt(ys[0] * ys[0] + ys[1] * ys[1]);
            const D11 rd = (ys[0] * ys[4] + ys[1] * ys[5]) / r;
            const D11 Fs = Pr.params.stiffness_poly(ys[3]) * (ys[3] - r) +
                           Pr.params.damping_poly(ys[3]) * (ys[7] - rd);
            c[row] = (Fs.v - mg) / mg;
            if (J) J->block<1, 8>(row, sN) = Fs.d.head<8>().transpose() / mg;
            ++row;
        }
    };

    f.inequalities = [td, mi, mg, cs](const Eigen::VectorXd& x, Eigen::VectorXd& c,
                                      Eigen::MatrixXd* J) {
        const TransData& Pr = *td;
        const int N = Pr.N;
        const double mu = Pr.params.friction_mu;
        const double half_l = 0.5 * Pr.params.foot_length;
        c.setZero(mi);
        if (J) J->setZero(mi, Pr.num_vars());

        for (int k = 0; k < N; ++k) {
            const int so = Pr.state_offset(k);
            const int co = Pr.ctrl_offset(k);
            const Vec8 y = x.segment<8>(so);
            const Vec3 uc = x.segment<3>(co).cwiseProduct(cs);
            const NodeDerivs nd = eval_node(Pr.params, y, uc, true);
            const double u_phys = uc[1];
            const int row = 5 * k;

            // -Fz <= 0 ; |Fx| <= mu Fz ; |u| <= (l/2) Fz
            c[row + 0] = -nd.fz / mg;
            c[row + 1] = (nd.fx - mu * nd.fz) / mg;
            c[row + 2] = (-nd.fx - mu * nd.fz) / mg;
            c[row + 3] = (u_phys - half_l * nd.fz) / mg;
            c[row + 4] = (-u_phys - half_l * nd.fz) / mg;
            if (J) {
                auto set_row = [&](int rr, const Eigen::Matrix<double, 1, 11>& grad) {
                    J->block<1, 8>(rr, so) = grad.leftCols<8>() / mg;
                    J->block<1, 3>(rr, co) = grad.rightCols<3>() * cs.asDiagonal() / mg;
                };
                Eigen::Matrix<double, 1, 11> gu = Eigen::Matrix<double, 1, 11>::Zero();
                gu(0, 9) = 1.0;  // physical u is input slot 9
                set_row(row + 0, (-nd.Jfz).eval());
                set_row(row + 1, (nd.Jfx - mu * nd.Jfz).eval());
                set_row(row + 2, (-nd.Jfx - mu * nd.Jfz).eval());
                set_row(row + 3, (gu - half_l * nd.Jfz).eval());
                set_row(row + 4, (-gu - half_l * nd.Jfz).eval());
            }
        }
    };

    f.objective = [td, cs](const Eigen::VectorXd& x, Eigen::VectorXd* grad) -> double {
        const TransData& Pr = *td;
        const int N = Pr.N;
        const int ti = Pr.time_index();
        const double T = x[ti];
        const double dT = T / (N - 1);
        const CostWeights& w = Pr.weights;
        const bool landing = Pr.kind == PhaseKind::Landing;

        if (grad) grad->setZero(Pr.num_vars());
        double sum_l = 0.0;  // quadrature of the integrand, for dJ/dT
        for (int k = 0; k < N; ++k) {
            const double wk = (k == 0 || k == N - 1) ? 0.5 : 1.0;
            const int co = Pr.ctrl_offset(k);
            const Vec3 u = x.segment<3>(co).cwiseProduct(cs);
            double lk = w.c1 * u[0] * u[0] + w.c2 * u[1] * u[1] + w.c3 * u[2] * u[2];
            if (grad) {
                (*grad)[co + 0] += dT * wk * 2.0 * w.c1 * u[0] * cs[0];
                (*grad)[co + 1] += dT * wk * 2.0 * w.c2 * u[1] * cs[1];
                (*grad)[co + 2] += dT * wk * 2.0 * w.c3 * u[2] * cs[2];
            }
            if (landing) {
                const int so = Pr.state_offset(k);
                const auto ys = seed_state(x.segment<8>(so));
                const D11 sd = spring_rate_dual(ys);
                lk += w.alpha * sd.v * sd.v;
                if (grad)
                    grad->segment<8>(so) += dT * wk * 2.0 * w.alpha * sd.v * sd.d.head<8>();
            }
            sum_l += wk * lk;
        }
        if (grad) (*grad)[ti] += sum_l / (N - 1);
        return dT * sum_l;
    };

    // Exact Lagrangian Hessian. Every nonlinear term couples one node's
    // variables with T only, so the Hessian assembles from 12x12 blocks.
    f.lagrangian_hessian = [td, jumping, mg](const Eigen::VectorXd& x, const Eigen::VectorXd& lam,
                                             const Eigen::VectorXd& mu, Eigen::MatrixXd& H) {
        using DD = Dual2<12>;
        const TransData& Pr = *td;
        const int N = Pr.N;
        const int n = Pr.num_vars();
        const int ti = Pr.time_index();
        const double mu_fric = Pr.params.friction_mu;
        const double half_l = 0.5 * Pr.params.foot_length;
        H.setZero(n, n);

        for (int k = 0; k < N; ++k) {
            const int so = Pr.state_offset(k);
            const int co = Pr.ctrl_offset(k);
            Eigen::Matrix<DD, 8, 1> y;
            for (int i = 0; i < 8; ++i) y[i] = DD(x[so + i], i);
            Eigen::Matrix<DD, 3, 1> u;
            for (int i = 0; i < 3; ++i) u[i] = DD(x[co + i], 8 + i) * Pr.cs[i];
            const DD T(x[ti], 11);
            const DD dT = T / static_cast<double>(N - 1);

            const auto fdyn = fslip_stance_core<DD>(Pr.params, y, u);
            DD phi(0.0);
            for (int i = 0; i < 8; ++i) {
                double w = 0.0;
                if (k + 1 < N) w += lam[8 + 8 * k + i];
                if (k > 0) w += lam[8 + 8 * (k - 1) + i];
                if (w != 0.0) phi = phi + (-0.5 * w) * (dT * fdyn[i]);
            }

            const double wk = (k == 0 || k == N - 1) ? 0.5 : 1.0;
            const CostWeights& cw = Pr.weights;
            DD lk = cw.c1 * u[0] * u[0] + cw.c2 * u[1] * u[1] + cw.c3 * u[2] * u[2];
            if (Pr.kind == PhaseKind::Landing) {
                const DD r = sqrt(y[0] * y[0] + y[1] * y[1]);
                const DD rd = (y[0] * y[4] + y[1] * y[5]) / r;
                const DD sd = y[7] - rd;
                lk = lk + cw.alpha * sd * sd;
            }
            phi = phi + wk * (dT * lk);

            const auto gr = fslip_grf_core<DD>(Pr.params, y[0], y[1], y[3], y[4], y[5], y[7],
                                               u[1], u[2]);
            const int ir = 5 * k;
            phi = phi + (mu[ir + 0] / mg) * (-1.0 * gr.fz);
            phi = phi + (mu[ir + 1] / mg) * (gr.fx - mu_fric * gr.fz);
            phi = phi + (mu[ir + 2] / mg) * (-1.0 * gr.fx - mu_fric * gr.fz);
            phi = phi + (mu[ir + 3] / mg) * (u[1] - half_l * gr.fz);
            phi = phi + (mu[ir + 4] / mg) * (-1.0 * u[1] - half_l * gr.fz);

            if (k == N - 1) {
                const int tb = 8 + 8 * (N - 1);
                if (jumping) {
                    phi = phi + lam[tb + 1] * atan2(y[0], y[1]);
                    phi = phi + (lam[tb + 2] / mg) * gr.fz;
                } else {
                    const DD r = sqrt(y[0] * y[0] + y[1] * y[1]);
                    const DD rd = (y[0] * y[4] + y[1] * y[5]) / r;
                    const DD Fs = Pr.params.stiffness_poly(y[3]) * (y[3] - r) +
                                  Pr.params.damping_poly(y[3]) * (y[7] - rd);
                    phi = phi + (lam[tb + 5] / mg) * Fs;
                }
            }

            int idx[12];
            for (int i = 0; i < 8; ++i) idx[i] = so + i;
            for (int i = 0; i < 3; ++i) idx[8 + i] = co + i;
            idx[11] = ti;
            for (int i = 0; i < 12; ++i)
                for (int j = 0; j < 12; ++j) H(idx[i], idx[j]) += phi.h(i, j);
        }
    };
}

}  // namespace

NlpProblem build_jump_nlp(const FslipParams& params, const JumpTask& task, int N,
                          const CostWeights& weights) {
    params.validate();
    if (N < 10) throw TrajoptError("build_jump_nlp: N must be >= 10");
    const double g = params.gravity;
    const double zd = task.resolved_liftoff_zd(g);
    if (zd <= 1e-6) throw TrajoptError("build_jump_nlp: zero-height jump rejected (T_flight -> 0)");
    if (task.direction != 1 && task.direction != -1)
        throw TrajoptError("build_jump_nlp: direction must be +-1");

    NlpProblem P;
    P.kind = PhaseKind::Jumping;
    P.N = N;
    P.params = params;
    P.weights = weights;
    P.task = task;
    P.init_state = task.standing;  // foot frame: anchor at the origin
    P.init_state.x -= task.standing.foot_x;
    P.init_state.z -= task.standing.foot_z;
    P.init_state.foot_x = 0;
    P.init_state.foot_z = 0;
    P.t_min = 0.2;
    P.t_max = 2.0;

    // reachability fast-fail: the flywheel must be able to store the lift-off
    // momentum within the torque bound over the longest allowed stance
    const LiftOffTargets lot = lift_off_targets(task, 0.0, g);
    const double I_hi = std::max(params.inertia_poly(params.leg_min),
                                 params.inertia_poly(params.leg_max));
    const double H_req = I_hi * std::abs(lot.thetad_liftoff);
    if (H_req > params.tau_max * P.t_max)
        throw TrajoptError("build_jump_nlp: required lift-off momentum " + std::to_string(H_req) +
                           " exceeds tau_max * T_max = " +
                           std::to_string(params.tau_max * P.t_max));

    assemble(P);
    return P;
}

NlpProblem build_landing_nlp(const FslipParams& params, const FslipState& init, int N,
                             double z_des, const CostWeights& weights) {
    params.validate();
    if (N < 10) throw TrajoptError("build_landing_nlp: N must be >= 10");
    if (!params.leg_in_bounds(init.L))
        throw TrajoptError("build_landing_nlp: initial leg length violates bounds");

    NlpProblem P;
    P.kind = PhaseKind::Landing;
    P.N = N;
    P.params = params;
    P.weights = weights;
    P.init_state = init;
    P.init_state.x -= init.foot_x;  // landing frame: foot anchor at the origin
    P.init_state.z -= init.foot_z;
    P.init_state.foot_x = 0;
    P.init_state.foot_z = 0;
    P.z_des = z_des;
    P.t_min = 0.3;
    P.t_max = 3.0;
    if (z_des <= 0.0) {
        // default: static rest height for the initial leg length
        const double s_static = params.mass * params.gravity / params.stiffness_poly(init.L);
        P.z_des = std::min(init.L, params.leg_max) - s_static;
    }
    assemble(P);
    return P;
}

Eigen::VectorXd default_guess(const NlpProblem& P) {
    const int N = P.N;
    Eigen::MatrixXd states(N, 8), controls = Eigen::MatrixXd::Zero(N, 3);
    const double g = P.params.gravity;

    Vec8 y0 = P.init_state.vec();
    Vec8 yN = y0;
    if (P.kind == PhaseKind::Jumping) {
        const double zd = P.task.resolved_liftoff_zd(g);
        const LiftOffTargets lot = lift_off_targets(P.task, 0.0, g);
        const double L_lo = std::min(P.params.leg_max - 0.02, P.init_state.L + 0.15);
        yN[0] = y0[0];
        yN[1] = L_lo;
        yN[3] = L_lo;
        yN[4] = P.task.has_forward_target ? P.task.forward_target / lot.t_flight : 0.0;
        yN[5] = zd;
        yN[6] = lot.thetad_liftoff;
        yN[2] = 0.5 * lot.thetad_liftoff * 0.5 * (P.t_min + P.t_max);
        yN[7] = 0.5;
    } else {
        const double s_static = P.params.mass * g / P.params.stiffness_poly(P.init_state.L);
        yN.setZero();
        yN[1] = P.z_des;
        yN[3] = std::min(P.z_des + s_static, P.params.leg_max - 1e-3);
        yN[2] = y0[2];
    }
    for (int k = 0; k < N; ++k) {
        const double a = static_cast<double>(k) / (N - 1);
        states.row(k) = ((1.0 - a) * y0 + a * yN).transpose();
    }
    return P.pack(states, controls, 0.5 * (P.t_min + P.t_max));
}

NlpSolution solve_nlp(const NlpProblem& P, const Eigen::VectorXd& guess, const SqpOptions& opts) {
    const SqpResult r = solve_sqp(P.nlp, guess, opts);
    NlpSolution sol;
    P.unpack(r.x, sol.states, sol.controls, sol.T);
    sol.objective = r.objective;
    sol.status = r.status;
    sol.iterations = r.iterations;
    sol.kkt_norm = r.kkt_norm;
    verify_solution(P, sol);
    return sol;
}

void verify_solution(const NlpProblem& P, NlpSolution& sol) {
    // physical-unit recheck via the public FSLIP operations only
    const int N = P.N;
    const double mg = P.params.mass * P.params.gravity;
    const double g = P.params.gravity;
    double max_eq = 0.0, max_in = 0.0;
    std::vector<std::pair<std::string, double>> rows;

    auto note = [&rows](const std::string& name, double v) {
        if (std::abs(v) > 1e-9) rows.emplace_back(name, std::abs(v));
    };

    auto state_at = [&](int k) {
        FslipState s = FslipState::from_vec(sol.states.row(k).transpose());
        return s;
    };
    auto ctrl_at = [&](int k) {
        FslipControl c;
        c.Ldd = sol.controls(k, 0);
        c.u = sol.controls(k, 1);
        c.tau = sol.controls(k, 2);
        return c;
    };

    const double dT = sol.T / (N - 1);
    const Vec8 init_err = sol.states.row(0).transpose() - P.init_state.vec();
    max_eq = init_err.cwiseAbs().maxCoeff();
    note("init", max_eq);

    for (int k = 0; k + 1 < N; ++k) {
        const Vec8 fa = stance_dynamics(state_at(k), ctrl_at(k), P.params).vec();
        const Vec8 fb = stance_dynamics(state_at(k + 1), ctrl_at(k + 1), P.params).vec();
        const Eigen::VectorXd defect = trapezoid_defect(
            sol.states.row(k).transpose(), sol.states.row(k + 1).transpose(), fa, fb, dT);
        const double v = defect.cwiseAbs().maxCoeff();
        max_eq = std::max(max_eq, v);
        note("defect[" + std::to_string(k) + "]", v);
    }

    const FslipState last = state_at(N - 1);
    const FslipControl clast = ctrl_at(N - 1);
    if (P.kind == PhaseKind::Jumping) {
        const double zd_lo = P.task.resolved_liftoff_zd(g);
        max_eq = std::max(max_eq, std::abs(last.zd - zd_lo));
        note("terminal.zd", last.zd - zd_lo);
        const LegGeometry geo = leg_geometry(last);
        const LiftOffTargets lot = lift_off_targets(P.task, geo.beta, g);
        max_eq = std::max(max_eq, std::abs(last.thetad - lot.thetad_liftoff) * zd_lo / g);
        note("terminal.rotation", last.thetad - lot.thetad_liftoff);
        const auto grf = fslip_grf(last, clast, P.params);
        max_eq = std::max(max_eq, std::abs(grf.fz) / mg);
        note("terminal.fz[N]", grf.fz);
        if (P.task.has_forward_target) {
            const double reach = last.x + last.xd * lot.t_flight;
            max_eq = std::max(max_eq, std::abs(reach - P.task.forward_target));
            note("terminal.forward", reach - P.task.forward_target);
        }
    } else {
        const LegGeometry geo = leg_geometry(last);
        const double s = last.L - geo.r;
        const double sd = last.Ld - geo.rd;
        const double Fs = spring_force(P.params, last.L, s, sd);
        for (auto [name, v] : std::initializer_list<std::pair<const char*, double>>{
                 {"terminal.z", last.z - P.z_des},
                 {"terminal.zd", last.zd},
                 {"terminal.x", last.x},
                 {"terminal.xd", last.xd},
                 {"terminal.thetad", last.thetad},
                 {"terminal.spring", (Fs - mg) / mg}}) {
            max_eq = std::max(max_eq, std::abs(v));
            note(name, v);
        }
    }

    const double mu = P.params.friction_mu;
    const double half_l = 0.5 * P.params.foot_length;
    for (int k = 0; k < N; ++k) {
        const auto grf = fslip_grf(state_at(k), ctrl_at(k), P.params);
        const double u = sol.controls(k, 1);
        const double rows_k[5] = {-grf.fz / mg, (grf.fx - mu * grf.fz) / mg,
                                  (-grf.fx - mu * grf.fz) / mg, (u - half_l * grf.fz) / mg,
                                  (-u - half_l * grf.fz) / mg};
        const char* names_k[5] = {"fz+", "fric+", "fric-", "zmp+", "zmp-"};
        for (int i = 0; i < 5; ++i) {
            if (rows_k[i] > max_in) max_in = rows_k[i];
            if (rows_k[i] > 1e-9)
                rows.emplace_back(std::string(names_k[i]) + "[" + std::to_string(k) + "]",
                                  rows_k[i]);
        }
    }

    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.second > b.second; });
    if (rows.size() > 12) rows.resize(12);
    sol.max_eq_residual = max_eq;
    sol.max_ineq_violation = std::max(0.0, max_in);
    sol.worst_rows = std::move(rows);
}

ReferenceBundle extract_reference(const NlpSolution& sol, const FslipParams& params) {
    if (sol.status != SolverStatus::Converged)
        throw TrajoptError("extract_reference: refusing a non-converged solution");
    const int N = static_cast<int>(sol.states.rows());
    const double dT = sol.T / (N - 1);
    const Polynomial dI = params.inertia_poly.derivative();

    std::vector<double> t(N), L(N), Ld(N), xs(N), xd(N), H(N), Hd(N), pitch(N), pitchd(N);
    for (int k = 0; k < N; ++k) {
        const Vec8 y = sol.states.row(k).transpose();
        t[k] = k * dT;
        L[k] = y[3];
        Ld[k] = y[7];
        xs[k] = y[0];
        xd[k] = y[4];
        const double I = params.inertia_poly(y[3]);
        H[k] = I * y[6];
        // dH/dt = I'(L) Ld thetad + tau  (I thetadd = tau)
        Hd[k] = dI(y[3]) * y[7] * y[6] + sol.controls(k, 2);
        const double r2 = y[0] * y[0] + y[1] * y[1];
        pitch[k] = std::atan2(y[0], y[1]);
        pitchd[k] = (y[1] * y[4] - y[0] * y[5]) / r2;
    }

    ReferenceBundle ref;
    ref.duration = sol.T;
    ref.L = HermiteSeries(t, L, Ld);
    ref.x = HermiteSeries(t, xs, xd);
    ref.H = HermiteSeries(t, H, Hd);
    ref.pitch = HermiteSeries(t, pitch, pitchd);
    return ref;
}

std::string NlpSolution::to_json() const {
    nlohmann::json j;
    j["T"] = T;
    j["objective"] = objective;
    j["status"] = solver_status_name(status);
    j["iterations"] = iterations;
    j["kkt_norm"] = kkt_norm;
    j["max_eq_residual"] = max_eq_residual;
    j["max_ineq_violation"] = max_ineq_violation;
    std::vector<std::vector<double>> st, ct;
    for (Eigen::Index k = 0; k < states.rows(); ++k) {
        std::vector<double> srow(8), crow(3);
        for (int i = 0; i < 8; ++i) srow[static_cast<size_t>(i)] = states(k, i);
        for (int i = 0; i < 3; ++i) crow[static_cast<size_t>(i)] = controls(k, i);
        st.push_back(std::move(srow));
        ct.push_back(std::move(crow));
    }
    j["states"] = st;
    j["controls"] = ct;
    nlohmann::json wr = nlohmann::json::array();
    for (const auto& [name, v] : worst_rows) wr.push_back({{"row", name}, {"violation", v}});
    j["worst_rows"] = wr;
    return j.dump(2);
}

}  // namespace somersault
