#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <vector>

namespace somersault {

// Polynomial with ascending-degree coefficients: c[0] + c[1] x + c[2] x^2 + ...
struct Polynomial {
    std::vector<double> coeffs;

    Polynomial() = default;
    explicit Polynomial(std::vector<double> c) : coeffs(std::move(c)) {}

    bool empty() const { return coeffs.empty(); }
    int degree() const { return static_cast<int>(coeffs.size()) - 1; }

    // Horner evaluation; works for double and Dual scalars.
    template <typename Scalar>
    Scalar operator()(const Scalar& x) const {
        if (coeffs.empty()) return Scalar(0.0);
        Scalar acc(coeffs.back());
        for (int i = static_cast<int>(coeffs.size()) - 2; i >= 0; --i)
            acc = acc * x + coeffs[static_cast<size_t>(i)];
        return acc;
    }

    Polynomial derivative() const;
};

struct FitResult {
    Polynomial poly;
    double max_residual = 0.0;       // max |fit - sample|
    double max_rel_residual = 0.0;   // max residual / max |value|
};

// Least-squares polynomial fit of the given degree. Throws std::invalid_argument
// on rank-deficient sample sets (fewer than degree+1 distinct abscissae).
FitResult fit_polynomial(const std::vector<double>& x, const std::vector<double>& y, int degree);

}  // namespace somersault
