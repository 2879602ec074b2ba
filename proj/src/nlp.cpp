#include "somersault/nlp.hpp"

#include <algorithm>
#include <cmath>

namespace somersault {

void NlpFunctions::check_finite(const Eigen::VectorXd& c, const std::vector<std::string>& names,
                                const char* kind) const {
    for (Eigen::Index i = 0; i < c.size(); ++i) {
        if (!std::isfinite(c[i])) {
            const std::string row =
                i < static_cast<Eigen::Index>(names.size()) ? names[static_cast<size_t>(i)]
                                                            : std::to_string(i);
            throw NlpError(std::string("NaN/inf in ") + kind + " row '" + row + "'");
        }
    }
}

NlpResiduals evaluate_residuals(const NlpFunctions& nlp, const Eigen::VectorXd& x,
                                double report_threshold) {
    NlpResiduals out;
    if (nlp.num_eq > 0) {
        Eigen::VectorXd ceq;
        nlp.equalities(x, ceq, nullptr);
        nlp.check_finite(ceq, nlp.eq_names, "equality");
        for (Eigen::Index i = 0; i < ceq.size(); ++i) {
            const double v = std::abs(ceq[i]);
            if (v > out.max_eq) {
                out.max_eq = v;
                out.worst_eq = nlp.eq_names[static_cast<size_t>(i)];
            }
            if (v > report_threshold)
                out.violations.emplace_back(nlp.eq_names[static_cast<size_t>(i)], v);
        }
    }
    if (nlp.num_ineq > 0) {
        Eigen::VectorXd cin;
        nlp.inequalities(x, cin, nullptr);
        nlp.check_finite(cin, nlp.ineq_names, "inequality");
        for (Eigen::Index i = 0; i < cin.size(); ++i) {
            const double v = std::max(0.0, cin[i]);
            if (v > out.max_ineq) {
                out.max_ineq = v;
                out.worst_ineq = nlp.ineq_names[static_cast<size_t>(i)];
            }
            if (v > report_threshold)
                out.violations.emplace_back(nlp.ineq_names[static_cast<size_t>(i)], v);
        }
    }
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double v = std::max(std::max(0.0, nlp.lb[i] - x[i]), std::max(0.0, x[i] - nlp.ub[i]));
        if (v > out.max_bound) out.max_bound = v;
        if (v > report_threshold)
            out.violations.emplace_back("bound[" + std::to_string(i) + "]", v);
    }
    std::sort(out.violations.begin(), out.violations.end(),
              [](const auto& a, const auto& b) { return a.second > b.second; });
    return out;
}

GradientCheck check_gradients(const NlpFunctions& nlp, const Eigen::VectorXd& x, double h) {
    GradientCheck out;
    const int n = nlp.num_vars;

    Eigen::VectorXd grad(n);
    nlp.objective(x, &grad);
    Eigen::MatrixXd Jeq, Jin;
    Eigen::VectorXd ceq, cin;
    if (nlp.num_eq > 0) nlp.equalities(x, ceq, &Jeq);
    if (nlp.num_ineq > 0) nlp.inequalities(x, cin, &Jin);

    Eigen::VectorXd xp = x, xm = x;
    for (int j = 0; j < n; ++j) {
        const double hj = h * std::max(1.0, std::abs(x[j]));
        xp[j] = x[j] + hj;
        xm[j] = x[j] - hj;

        const double fp = nlp.objective(xp, nullptr);
        const double fm = nlp.objective(xm, nullptr);
        const double fd = (fp - fm) / (2 * hj);
        const double re = std::abs(fd - grad[j]) / std::max(1.0, std::abs(grad[j]));
        out.max_rel_err_objective = std::max(out.max_rel_err_objective, re);

        if (nlp.num_eq > 0) {
            Eigen::VectorXd cp, cm;
            nlp.equalities(xp, cp, nullptr);
            nlp.equalities(xm, cm, nullptr);
            const Eigen::VectorXd col_fd = (cp - cm) / (2 * hj);
            for (int i = 0; i < nlp.num_eq; ++i) {
                const double e =
                    std::abs(col_fd[i] - Jeq(i, j)) / std::max(1.0, std::abs(Jeq(i, j)));
                out.max_rel_err_eq = std::max(out.max_rel_err_eq, e);
            }
        }
        if (nlp.num_ineq > 0) {
            Eigen::VectorXd cp, cm;
            nlp.inequalities(xp, cp, nullptr);
            nlp.inequalities(xm, cm, nullptr);
            const Eigen::VectorXd col_fd = (cp - cm) / (2 * hj);
            for (int i = 0; i < nlp.num_ineq; ++i) {
                const double e =
                    std::abs(col_fd[i] - Jin(i, j)) / std::max(1.0, std::abs(Jin(i, j)));
                out.max_rel_err_ineq = std::max(out.max_rel_err_ineq, e);
            }
        }
        xp[j] = x[j];
        xm[j] = x[j];
    }
    return out;
}

}  // namespace somersault
