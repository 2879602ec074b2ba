#include "somersault/polynomial.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <set>

namespace somersault {

Polynomial Polynomial::derivative() const {
    if (coeffs.size() <= 1) return Polynomial({0.0});
    std::vector<double> d(coeffs.size() - 1);
    for (size_t i = 1; i < coeffs.size(); ++i)
        d[i - 1] = static_cast<double>(i) * coeffs[i];
    return Polynomial(std::move(d));
}

FitResult fit_polynomial(const std::vector<double>& x, const std::vector<double>& y, int degree) {
    if (degree < 0) throw std::invalid_argument("fit_polynomial: negative degree");
    if (x.size() != y.size()) throw std::invalid_argument("fit_polynomial: size mismatch");

    std::set<double> distinct(x.begin(), x.end());
    if (static_cast<int>(distinct.size()) < degree + 1)
        throw std::invalid_argument("fit_polynomial: rank-deficient sample set");

    const auto n = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd V(n, degree + 1);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double p = 1.0;
        for (int j = 0; j <= degree; ++j) {
            V(i, j) = p;
            p *= x[static_cast<size_t>(i)];
        }
        b(i) = y[static_cast<size_t>(i)];
    }

    Eigen::VectorXd c = V.colPivHouseholderQr().solve(b);

    FitResult out;
    out.poly.coeffs.assign(c.data(), c.data() + c.size());
    const Eigen::VectorXd r = V * c - b;
    out.max_residual = r.cwiseAbs().maxCoeff();
    const double scale = b.cwiseAbs().maxCoeff();
    out.max_rel_residual = scale > 0.0 ? out.max_residual / scale : out.max_residual;
    return out;
}

}  // namespace somersault
