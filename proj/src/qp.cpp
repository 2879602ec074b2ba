#include "somersault/qp.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

namespace somersault {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Append the constraint whose projected normal is in dvec to the active-set
// factorization: Givens rotations zero dvec below row iq, applied to J too.
void add_constraint(Eigen::MatrixXd& R, Eigen::MatrixXd& J, Eigen::VectorXd& dvec, int& iq) {
    const int n = static_cast<int>(dvec.size());
    for (int j = n - 1; j >= iq + 1; --j) {
        double cc = dvec[j - 1];
        double ss = dvec[j];
        const double h = std::hypot(cc, ss);
        if (h == 0.0) continue;
        dvec[j] = 0.0;
        ss /= h;
        cc /= h;
        if (cc < 0.0) {
            cc = -cc;
            ss = -ss;
            dvec[j - 1] = -h;
        } else {
            dvec[j - 1] = h;
        }
        const double xny = ss / (1.0 + cc);
        for (int k = 0; k < n; ++k) {
            const double t1 = J(k, j - 1);
            const double t2 = J(k, j);
            J(k, j - 1) = t1 * cc + t2 * ss;
            J(k, j) = xny * (t1 + J(k, j - 1)) - t2;
        }
    }
    ++iq;
    R.col(iq - 1).head(iq) = dvec.head(iq);
}

// Remove the active constraint at position qq, restoring R's triangularity.
void delete_constraint(Eigen::MatrixXd& R, Eigen::MatrixXd& J, std::vector<int>& active,
                       Eigen::VectorXd& u, int& iq, int qq) {
    const int n = static_cast<int>(J.rows());
    for (int i = qq; i < iq - 1; ++i) {
        active[static_cast<size_t>(i)] = active[static_cast<size_t>(i + 1)];
        u[i] = u[i + 1];
        R.col(i) = R.col(i + 1);
    }
    u[iq - 1] = u[iq];  // pending multiplier slides down with the set
    u[iq] = 0.0;
    --iq;
    active.resize(static_cast<size_t>(iq));
    if (iq == 0) return;

    for (int j = qq; j < iq; ++j) {
        double cc = R(j, j);
        double ss = R(j + 1, j);
        const double h = std::hypot(cc, ss);
        if (h == 0.0) continue;
        cc /= h;
        ss /= h;
        R(j + 1, j) = 0.0;
        if (cc < 0.0) {
            R(j, j) = -h;
            cc = -cc;
            ss = -ss;
        } else {
            R(j, j) = h;
        }
        const double xny = ss / (1.0 + cc);
        for (int k = j + 1; k < iq; ++k) {
            const double t1 = R(j, k);
            const double t2 = R(j + 1, k);
            R(j, k) = t1 * cc + t2 * ss;
            R(j + 1, k) = xny * (t1 + R(j, k)) - t2;
        }
        for (int k = 0; k < n; ++k) {
            const double t1 = J(k, j);
            const double t2 = J(k, j + 1);
            J(k, j) = t1 * cc + t2 * ss;
            J(k, j + 1) = xny * (t1 + J(k, j)) - t2;
        }
    }
}

struct ReducedResult {
    Eigen::VectorXd y;
    Eigen::VectorXd mu;  // full-length inequality multipliers
    QpStatus status = QpStatus::MaxIter;
    int iterations = 0;
};

// Goldfarb-Idnani dual active set on  min 1/2 y'H y + g'y  s.t.  C y <= d.
ReducedResult gi_solve(const Eigen::MatrixXd& H, const Eigen::VectorXd& g,
                       const Eigen::MatrixXd& C, const Eigen::VectorXd& d, int max_iter) {
    const int n = static_cast<int>(H.rows());
    const int m = static_cast<int>(C.rows());
    ReducedResult out;
    out.mu = Eigen::VectorXd::Zero(m);

    Eigen::LLT<Eigen::MatrixXd> llt;
    double jitter = 0.0;
    const double hscale = std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
    for (int attempt = 0; attempt < 8; ++attempt) {
        Eigen::MatrixXd Hj = H;
        if (jitter > 0.0) Hj.diagonal().array() += jitter;
        llt.compute(Hj);
        if (llt.info() == Eigen::Success) break;
        jitter = jitter == 0.0 ? 1e-12 * hscale : jitter * 100.0;
    }

    Eigen::VectorXd y = llt.solve(-g);
    if (m == 0) {
        out.y = y;
        out.status = QpStatus::Optimal;
        return out;
    }

    // J = L^-T;  R holds the triangular factor of the active-constraint basis.
    Eigen::MatrixXd J = Eigen::MatrixXd::Identity(n, n);
    llt.matrixU().solveInPlace(J);
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(n, n);
    std::vector<int> active;
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n + 1);
    int iq = 0;

    const double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
    const double tol = 1e-10 * scale;
    if (max_iter <= 0) max_iter = 20 * (n + m) + 100;

    // near-zero rows (typically duplicates of eliminated equalities) cannot be
    // meaningfully enforced; selection normalizes by the row norm so their
    // roundoff-level violations neither get picked nor blow up multipliers
    Eigen::VectorXd row_norm(m);
    for (int i = 0; i < m; ++i) row_norm[i] = C.row(i).norm();

    Eigen::VectorXd s = C * y - d;
    for (int iter = 0; iter < max_iter; ++iter) {
        out.iterations = iter + 1;
        int p = -1;
        double worst = tol;
        for (int i = 0; i < m; ++i) {
            if (s[i] <= tol) continue;
            if (row_norm[i] < 1e-8) {
                if (s[i] > 1e-6 * scale) {
                    out.status = QpStatus::Infeasible;  // contradictory ~constant row
                    return out;
                }
                continue;
            }
            const double v = s[i] / row_norm[i];
            if (v > worst) {
                worst = v;
                p = i;
            }
        }
        if (p < 0) {
            for (int k = 0; k < iq; ++k) out.mu[active[static_cast<size_t>(k)]] = u[k];
            out.y = y;
            out.status = QpStatus::Optimal;
            return out;
        }

        const Eigen::VectorXd np = C.row(p).transpose();
        u[iq] = 0.0;
        double sp = s[p];

        for (int inner = 0; inner < max_iter; ++inner) {
            const Eigen::VectorXd dvec = J.transpose() * np;
            Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
            if (iq < n) z = J.rightCols(n - iq) * dvec.tail(n - iq);
            Eigen::VectorXd r;
            if (iq > 0)
                r = R.topLeftCorner(iq, iq).triangularView<Eigen::Upper>().solve(dvec.head(iq));

            double t1 = kInf;
            int blocking = -1;
            for (int k = 0; k < iq; ++k) {
                if (r[k] > 1e-14) {
                    const double ratio = u[k] / r[k];
                    if (ratio < t1) {
                        t1 = ratio;
                        blocking = k;
                    }
                }
            }
            const double z2 = z.squaredNorm();
            const double t2 = z2 > 1e-26 ? sp / z.dot(np) : kInf;
            const double t = std::min(t1, t2);

            if (t >= kInf) {
                out.status = QpStatus::Infeasible;
                return out;
            }

            if (t2 >= kInf) {
                // dual-only step
                for (int k = 0; k < iq; ++k) u[k] -= t * r[k];
                u[iq] += t;
                delete_constraint(R, J, active, u, iq, blocking);
                continue;
            }

            y -= t * z;  // z is the H^-1-projected normal; move back inside C y <= d
            for (int k = 0; k < iq; ++k) u[k] -= t * r[k];
            u[iq] += t;

            if (t == t2) {
                Eigen::VectorXd dv = dvec;
                add_constraint(R, J, dv, iq);
                active.push_back(p);
                s = C * y - d;
                break;
            }
            delete_constraint(R, J, active, u, iq, blocking);
            sp = np.dot(y) - d[p];
        }
    }
    out.y = y;
    out.status = QpStatus::MaxIter;
    return out;
}

}  // namespace

const char* qp_status_name(QpStatus s) {
    switch (s) {
        case QpStatus::Optimal: return "optimal";
        case QpStatus::Infeasible: return "infeasible";
        case QpStatus::MaxIter: return "max-iter";
        case QpStatus::EqInconsistent: return "eq-inconsistent";
    }
    return "?";
}

double qp_kkt_residual(const QpProblem& qp, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& lambda_eq, const Eigen::VectorXd& mu_ineq) {
    Eigen::VectorXd stat = qp.H * x + qp.g;
    if (qp.A.rows() > 0) stat += qp.A.transpose() * lambda_eq;
    if (qp.C.rows() > 0) stat += qp.C.transpose() * mu_ineq;
    double res = stat.cwiseAbs().maxCoeff();
    if (qp.A.rows() > 0) res = std::max(res, (qp.A * x - qp.b).cwiseAbs().maxCoeff());
    if (qp.C.rows() > 0) {
        const Eigen::VectorXd viol = qp.C * x - qp.d;
        res = std::max(res, viol.cwiseMax(0.0).maxCoeff());
        res = std::max(res, mu_ineq.cwiseProduct(viol).cwiseAbs().maxCoeff());
        res = std::max(res, std::max(0.0, -mu_ineq.minCoeff()));
    }
    return res;
}

QpResult solve_qp(const QpProblem& qp, int max_iter) {
    const int n = static_cast<int>(qp.H.rows());
    const int me = static_cast<int>(qp.A.rows());
    const int mi = static_cast<int>(qp.C.rows());
    const bool has_bounds = qp.xlb.size() == n && qp.xub.size() == n;

    QpResult out;
    out.lambda_eq = Eigen::VectorXd::Zero(me);
    out.mu_ineq = Eigen::VectorXd::Zero(mi);
    if (has_bounds) {
        out.mu_lb = Eigen::VectorXd::Zero(n);
        out.mu_ub = Eigen::VectorXd::Zero(n);
    }

    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd Z;  // null-space basis of A
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qrAt;
    int rank = 0;

    if (me > 0) {
        qrAt.compute(qp.A.transpose());
        rank = static_cast<int>(qrAt.rank());
        const auto Rfac = qrAt.matrixR();
        const Eigen::VectorXd pb = qrAt.colsPermutation().transpose() * qp.b;
        // A x = b  <=>  R' (Q' x) = P' b ; min-norm particular solution.
        const Eigen::VectorXd whead = Rfac.topLeftCorner(rank, rank)
                                          .transpose()
                                          .triangularView<Eigen::Lower>()
                                          .solve(pb.head(rank));
        if (rank < me) {
            const Eigen::VectorXd tail_pred =
                Rfac.topRightCorner(rank, me - rank).transpose() * whead;
            const double mismatch = (tail_pred - pb.tail(me - rank)).cwiseAbs().maxCoeff();
            if (mismatch > 1e-8 * std::max(1.0, qp.b.cwiseAbs().maxCoeff())) {
                out.status = QpStatus::EqInconsistent;
                return out;
            }
        }
        Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
        w.head(rank) = whead;
        x0 = qrAt.householderQ() * w;
        Z.setZero(n, n - rank);
        Z.bottomRows(n - rank).setIdentity();
        Z.applyOnTheLeft(qrAt.householderQ());
    } else {
        Z = Eigen::MatrixXd::Identity(n, n);
    }

    const int nr = static_cast<int>(Z.cols());
    std::vector<int> lb_idx, ub_idx;
    if (has_bounds) {
        for (int j = 0; j < n; ++j) {
            if (std::isfinite(qp.xlb[j])) lb_idx.push_back(j);
            if (std::isfinite(qp.xub[j])) ub_idx.push_back(j);
        }
    }
    const int mr = mi + static_cast<int>(lb_idx.size() + ub_idx.size());

    auto scatter_mu = [&](const Eigen::VectorXd& mu_red) {
        if (mi > 0) out.mu_ineq = mu_red.head(mi);
        int r = mi;
        for (int j : ub_idx) out.mu_ub[j] = mu_red[r++];
        for (int j : lb_idx) out.mu_lb[j] = mu_red[r++];
    };

    if (nr == 0) {
        out.x = x0;
        double viol = 0.0;
        if (mi > 0) viol = std::max(viol, (qp.C * x0 - qp.d).maxCoeff());
        for (int j : ub_idx) viol = std::max(viol, x0[j] - qp.xub[j]);
        for (int j : lb_idx) viol = std::max(viol, qp.xlb[j] - x0[j]);
        if (viol > 1e-8 * std::max(1.0, qp.d.size() ? qp.d.cwiseAbs().maxCoeff() : 1.0)) {
            out.status = QpStatus::Infeasible;
            return out;
        }
        out.status = QpStatus::Optimal;
    } else {
        const Eigen::MatrixXd HZ = qp.H * Z;
        const Eigen::MatrixXd Hr = Z.transpose() * HZ;
        const Eigen::VectorXd gr = Z.transpose() * (qp.H * x0 + qp.g);
        Eigen::MatrixXd Cr(mr, nr);
        Eigen::VectorXd dr(mr);
        if (mi > 0) {
            Cr.topRows(mi) = qp.C * Z;
            dr.head(mi) = qp.d - qp.C * x0;
        }
        int r = mi;
        for (int j : ub_idx) {
            Cr.row(r) = Z.row(j);
            dr[r] = qp.xub[j] - x0[j];
            ++r;
        }
        for (int j : lb_idx) {
            Cr.row(r) = -Z.row(j);
            dr[r] = x0[j] - qp.xlb[j];
            ++r;
        }
        const ReducedResult red = gi_solve(Hr, gr, Cr, dr, max_iter);
        out.iterations = red.iterations;
        out.status = red.status;
        if (red.status != QpStatus::Optimal) return out;
        out.x = x0 + Z * red.y;
        scatter_mu(red.mu);
    }

    Eigen::VectorXd stat = qp.H * out.x + qp.g;
    if (mi > 0) stat += qp.C.transpose() * out.mu_ineq;
    for (int j : ub_idx) stat[j] += out.mu_ub[j];
    for (int j : lb_idx) stat[j] -= out.mu_lb[j];
    if (me > 0) {
        out.lambda_eq = qrAt.solve(-stat);
        stat += qp.A.transpose() * out.lambda_eq;
    }
    out.kkt_residual = stat.cwiseAbs().maxCoeff();
    if (me > 0)
        out.kkt_residual = std::max(out.kkt_residual, (qp.A * out.x - qp.b).cwiseAbs().maxCoeff());
    if (mi > 0) {
        const Eigen::VectorXd viol = qp.C * out.x - qp.d;
        out.kkt_residual = std::max(out.kkt_residual, viol.cwiseMax(0.0).maxCoeff());
        out.kkt_residual =
            std::max(out.kkt_residual, out.mu_ineq.cwiseProduct(viol).cwiseAbs().maxCoeff());
    }
    return out;
}

}  // namespace somersault
