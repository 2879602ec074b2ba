#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

#include "somersault/dual.hpp"
#include "somersault/polynomial.hpp"

namespace somersault {

struct FslipError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Template-model parameters. K(L), D(L), I(L) are polynomials over the
// actuated leg length, identified from the articulated robot.
struct FslipParams {
    double mass = 33.0;       // kg, point mass + flywheel
    double gravity = 9.81;    // m/s^2
    Polynomial stiffness_poly;  // K(L), N/m
    Polynomial damping_poly;    // D(L), N s/m
    Polynomial inertia_poly;    // I(L), kg m^2, whole-body pitch inertia
    double foot_length = 0.18;  // m
    double friction_mu = 0.6;
    double leg_min = 0.6;       // m
    double leg_max = 1.0;       // m
    double ldd_max = 40.0;      // |Ldd| bound, m/s^2
    double u_max = 60.0;        // |u| foot moment bound, N m
    double tau_max = 195.0;     // |tau| flywheel torque bound, N m

    void validate() const;
    bool leg_in_bounds(double L) const { return L >= leg_min - 1e-12 && L <= leg_max + 1e-12; }
};

// x,z: mass position. theta: flywheel angle. L: actuated leg length.
// foot_x/foot_z: stance anchor (valid in stance only).
struct FslipState {
    double x = 0, z = 0, theta = 0, L = 0;
    double xd = 0, zd = 0, thetad = 0, Ld = 0;
    double foot_x = 0, foot_z = 0;

    Eigen::Matrix<double, 8, 1> vec() const {
        Eigen::Matrix<double, 8, 1> v;
        v << x, z, theta, L, xd, zd, thetad, Ld;
        return v;
    }
    static FslipState from_vec(const Eigen::Matrix<double, 8, 1>& v, double fx = 0, double fz = 0) {
        FslipState s;
        s.x = v[0]; s.z = v[1]; s.theta = v[2]; s.L = v[3];
        s.xd = v[4]; s.zd = v[5]; s.thetad = v[6]; s.Ld = v[7];
        s.foot_x = fx; s.foot_z = fz;
        return s;
    }
};

struct FslipControl {
    double Ldd = 0;  // leg length acceleration, m/s^2
    double u = 0;    // foot moment, N m
    double tau = 0;  // flywheel torque, N m
};

struct LegGeometry {
    double r, beta, rd, betad;  // leg length, angle from vertical (+ = mass forward of foot), rates
};

// ---- scalar-generic cores (double or Dual) ------------------------------

template <typename S>
struct GrfT {
    S fx, fz;
};

// Ground reaction force from the force decomposition: axial spring force plus
// the tangential (tau+u)/r component rotated by the leg angle.
template <typename S>
GrfT<S> fslip_grf_core(const FslipParams& p, const S& x, const S& z, const S& L,
                       const S& xd, const S& zd, const S& Ld,
                       const S& u, const S& tau) {
    using std::atan2, std::cos, std::sin, std::sqrt;
    const S r = sqrt(x * x + z * z);
    const S beta = atan2(x, z);
    const S rd = (x * xd + z * zd) / r;
    const S s = L - r;
    const S sd = Ld - rd;
    const S K = p.stiffness_poly(L);
    const S D = p.damping_poly(L);
    const S Fs = K * s + D * sd;
    const S tang = (tau + u) / r;
    GrfT<S> f;
    f.fx = Fs * sin(beta) - tang * cos(beta);
    f.fz = Fs * cos(beta) + tang * sin(beta);
    return f;
}

// Stance dynamics with the foot at the origin of the (x, z) frame.
// State slice (x, z, theta, L, xd, zd, thetad, Ld), controls (Ldd, u, tau).
template <typename S>
Eigen::Matrix<S, 8, 1> fslip_stance_core(const FslipParams& p,
                                         const Eigen::Matrix<S, 8, 1>& y,
                                         const Eigen::Matrix<S, 3, 1>& c) {
    const S &x = y[0], &z = y[1], &L = y[3];
    const S &xd = y[4], &zd = y[5], &thetad = y[6], &Ld = y[7];
    const S &Ldd = c[0], &u = c[1], &tau = c[2];

    const GrfT<S> f = fslip_grf_core(p, x, z, L, xd, zd, Ld, u, tau);
    const S I = p.inertia_poly(L);

    Eigen::Matrix<S, 8, 1> dy;
    dy[0] = xd;
    dy[1] = zd;
    dy[2] = thetad;
    dy[3] = Ld;
    dy[4] = f.fx / p.mass;
    dy[5] = f.fz / p.mass - p.gravity;
    dy[6] = tau / I;
    dy[7] = Ldd;
    return dy;
}

// ---- public operations ---------------------------------------------------

// F^s = K(L) s + D(L) sd. Throws FslipError when L is outside the leg bounds.
double spring_force(const FslipParams& p, double L, double s, double sd);

// Stance leg geometry relative to the state's foot anchor. Throws on
// degenerate geometry (r below 1e-6 m).
LegGeometry leg_geometry(const FslipState& s);

// Stance state derivative (foot anchored at state.foot_*).
FslipState stance_dynamics(const FslipState& s, const FslipControl& c, const FslipParams& p);

// Ballistic flight; flywheel still integrates I thetadd = tau; spring at rest.
FslipState flight_dynamics(const FslipState& s, const FslipControl& c, const FslipParams& p);

// Ground reaction force in stance for diagnostics/constraints.
GrfT<double> fslip_grf(const FslipState& s, const FslipControl& c, const FslipParams& p);

// Horner evaluation with leg-bounds check.
double eval_regression(const FslipParams& p, const Polynomial& poly, double L);

// Total mechanical energy in stance (kinetic + gravity + spring + flywheel).
double stance_energy(const FslipState& s, const FslipParams& p);

// JSON (de)serialization; see configs/fslip.json for the schema.
std::string fslip_params_to_json(const FslipParams& p);
FslipParams fslip_params_from_json(const std::string& text);

}  // namespace somersault
