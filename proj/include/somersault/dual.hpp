#pragma once

#include <Eigen/Core>
#include <cmath>

namespace somersault {

// Forward-mode scalar carrying N partial derivatives. Used to get exact
// Jacobians of the template-model dynamics and transcription constraints
// without hand-coding them.
template <int N>
struct Dual {
    using Grad = Eigen::Matrix<double, N, 1>;

    double v = 0.0;
    Grad d = Grad::Zero();

    Dual() = default;
    Dual(double value) : v(value) {}
    Dual(double value, int seed) : v(value) { d[seed] = 1.0; }
    Dual(double value, const Grad& grad) : v(value), d(grad) {}

    Dual operator-() const { return {-v, -d}; }

    Dual& operator+=(const Dual& o) { v += o.v; d += o.d; return *this; }
    Dual& operator-=(const Dual& o) { v -= o.v; d -= o.d; return *this; }
    Dual& operator*=(const Dual& o) { d = d * o.v + o.d * v; v *= o.v; return *this; }
    Dual& operator/=(const Dual& o) { d = (d * o.v - o.d * v) / (o.v * o.v); v /= o.v; return *this; }
};

template <int N> Dual<N> operator+(Dual<N> a, const Dual<N>& b) { return a += b; }
template <int N> Dual<N> operator-(Dual<N> a, const Dual<N>& b) { return a -= b; }
template <int N> Dual<N> operator*(Dual<N> a, const Dual<N>& b) { return a *= b; }
template <int N> Dual<N> operator/(Dual<N> a, const Dual<N>& b) { return a /= b; }

template <int N> Dual<N> operator+(double a, Dual<N> b) { b.v += a; return b; }
template <int N> Dual<N> operator+(Dual<N> a, double b) { a.v += b; return a; }
template <int N> Dual<N> operator-(double a, const Dual<N>& b) { return {a - b.v, -b.d}; }
template <int N> Dual<N> operator-(Dual<N> a, double b) { a.v -= b; return a; }
template <int N> Dual<N> operator*(double a, const Dual<N>& b) { return {a * b.v, a * b.d}; }
template <int N> Dual<N> operator*(const Dual<N>& a, double b) { return {a.v * b, a.d * b}; }
template <int N> Dual<N> operator/(const Dual<N>& a, double b) { return {a.v / b, a.d / b}; }
template <int N> Dual<N> operator/(double a, const Dual<N>& b) {
    return {a / b.v, (-a / (b.v * b.v)) * b.d};
}

template <int N> bool operator<(const Dual<N>& a, const Dual<N>& b) { return a.v < b.v; }
template <int N> bool operator>(const Dual<N>& a, const Dual<N>& b) { return a.v > b.v; }
template <int N> bool operator<(const Dual<N>& a, double b) { return a.v < b; }
template <int N> bool operator>(const Dual<N>& a, double b) { return a.v > b; }

template <int N> Dual<N> sin(const Dual<N>& a) { return {std::sin(a.v), std::cos(a.v) * a.d}; }
template <int N> Dual<N> cos(const Dual<N>& a) { return {std::cos(a.v), -std::sin(a.v) * a.d}; }
template <int N> Dual<N> sqrt(const Dual<N>& a) {
    const double r = std::sqrt(a.v);
    return {r, (0.5 / r) * a.d};
}
template <int N> Dual<N> atan2(const Dual<N>& y, const Dual<N>& x) {
    const double r2 = x.v * x.v + y.v * y.v;
    return {std::atan2(y.v, x.v), (x.v * y.d - y.v * x.d) / r2};
}

inline double value_of(double x) { return x; }
template <int N> double value_of(const Dual<N>& x) { return x.v; }

// Second-order forward-mode scalar: value, gradient, and (symmetric) Hessian.
// Used to assemble exact Lagrangian Hessians for the transcription NLPs.
template <int N>
struct Dual2 {
    using Grad = Eigen::Matrix<double, N, 1>;
    using Hess = Eigen::Matrix<double, N, N>;

    double v = 0.0;
    Grad d = Grad::Zero();
    Hess h = Hess::Zero();

    Dual2() = default;
    Dual2(double value) : v(value) {}
    Dual2(double value, int seed) : v(value) { d[seed] = 1.0; }

    Dual2 operator-() const {
        Dual2 r;
        r.v = -v;
        r.d = -d;
        r.h = -h;
        return r;
    }
};

template <int N> Dual2<N> operator+(const Dual2<N>& a, const Dual2<N>& b) {
    Dual2<N> r;
    r.v = a.v + b.v;
    r.d = a.d + b.d;
    r.h = a.h + b.h;
    return r;
}
template <int N> Dual2<N> operator-(const Dual2<N>& a, const Dual2<N>& b) {
    Dual2<N> r;
    r.v = a.v - b.v;
    r.d = a.d - b.d;
    r.h = a.h - b.h;
    return r;
}
template <int N> Dual2<N> operator*(const Dual2<N>& a, const Dual2<N>& b) {
    Dual2<N> r;
    r.v = a.v * b.v;
    r.d = a.d * b.v + b.d * a.v;
    r.h = a.h * b.v + b.h * a.v + a.d * b.d.transpose() + b.d * a.d.transpose();
    return r;
}
template <int N> Dual2<N> inverse(const Dual2<N>& b) {
    Dual2<N> r;
    const double iv = 1.0 / b.v;
    r.v = iv;
    r.d = -iv * iv * b.d;
    r.h = -iv * iv * b.h + 2.0 * iv * iv * iv * b.d * b.d.transpose();
    return r;
}
template <int N> Dual2<N> operator/(const Dual2<N>& a, const Dual2<N>& b) {
    return a * inverse(b);
}
template <int N> Dual2<N> operator+(const Dual2<N>& a, double b) {
    Dual2<N> r = a;
    r.v += b;
    return r;
}
template <int N> Dual2<N> operator+(double a, const Dual2<N>& b) { return b + a; }
template <int N> Dual2<N> operator-(const Dual2<N>& a, double b) { return a + (-b); }
template <int N> Dual2<N> operator-(double a, const Dual2<N>& b) { return (-b) + a; }
template <int N> Dual2<N> operator*(const Dual2<N>& a, double b) {
    Dual2<N> r;
    r.v = a.v * b;
    r.d = a.d * b;
    r.h = a.h * b;
    return r;
}
template <int N> Dual2<N> operator*(double a, const Dual2<N>& b) { return b * a; }
template <int N> Dual2<N> operator/(const Dual2<N>& a, double b) { return a * (1.0 / b); }
template <int N> Dual2<N> operator/(double a, const Dual2<N>& b) { return inverse(b) * a; }

template <int N> Dual2<N> sin(const Dual2<N>& a) {
    Dual2<N> r;
    const double s = std::sin(a.v), c = std::cos(a.v);
    r.v = s;
    r.d = c * a.d;
    r.h = c * a.h - s * a.d * a.d.transpose();
    return r;
}
template <int N> Dual2<N> cos(const Dual2<N>& a) {
    Dual2<N> r;
    const double s = std::sin(a.v), c = std::cos(a.v);
    r.v = c;
    r.d = -s * a.d;
    r.h = -s * a.h - c * a.d * a.d.transpose();
    return r;
}
template <int N> Dual2<N> sqrt(const Dual2<N>& a) {
    Dual2<N> r;
    const double s = std::sqrt(a.v);
    r.v = s;
    r.d = a.d / (2.0 * s);
    r.h = a.h / (2.0 * s) - a.d * a.d.transpose() / (4.0 * s * s * s);
    return r;
}
template <int N> Dual2<N> atan2(const Dual2<N>& y, const Dual2<N>& x) {
    Dual2<N> r;
    const double r2 = x.v * x.v + y.v * y.v;
    const double fy = x.v / r2, fx = -y.v / r2;
    const double fyy = -2.0 * x.v * y.v / (r2 * r2);
    const double fyx = (y.v * y.v - x.v * x.v) / (r2 * r2);
    const double fxx = 2.0 * x.v * y.v / (r2 * r2);
    r.v = std::atan2(y.v, x.v);
    r.d = fy * y.d + fx * x.d;
    r.h = fy * y.h + fx * x.h + fyy * y.d * y.d.transpose() +
          fyx * (y.d * x.d.transpose() + x.d * y.d.transpose()) + fxx * x.d * x.d.transpose();
    return r;
}

template <int N> double value_of(const Dual2<N>& x) { return x.v; }

}  // namespace somersault
