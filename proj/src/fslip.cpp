#include "somersault/fslip.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace somersault {

using json = nlohmann::json;

void FslipParams::validate() const {
    if (mass <= 0 || gravity <= 0 || foot_length <= 0 || friction_mu <= 0)
        throw FslipError("FslipParams: nonpositive scalar parameter");
    if (!(leg_min < leg_max)) throw FslipError("FslipParams: leg bounds out of order");
    for (int i = 0; i <= 20; ++i) {
        const double L = leg_min + (leg_max - leg_min) * i / 20.0;
        if (stiffness_poly(L) <= 0) throw FslipError("FslipParams: K(L) must be positive on the leg range");
        if (inertia_poly(L) <= 0) throw FslipError("FslipParams: I(L) must be positive on the leg range");
        if (damping_poly(L) < 0) throw FslipError("FslipParams: D(L) must be nonnegative");
    }
}

double spring_force(const FslipParams& p, double L, double s, double sd) {
    if (!p.leg_in_bounds(L)) throw FslipError("spring_force: leg length outside bounds");
    return p.stiffness_poly(L) * s + p.damping_poly(L) * sd;
}

LegGeometry leg_geometry(const FslipState& s) {
    const double dx = s.x - s.foot_x;
    const double dz = s.z - s.foot_z;
    const double r = std::hypot(dx, dz);
    if (r < 1e-6) throw FslipError("leg_geometry: degenerate geometry (r < 1e-6)");
    LegGeometry g;
    g.r = r;
    g.beta = std::atan2(dx, dz);
    g.rd = (dx * s.xd + dz * s.zd) / r;
    g.betad = (dz * s.xd - dx * s.zd) / (r * r);
    return g;
}

FslipState stance_dynamics(const FslipState& s, const FslipControl& c, const FslipParams& p) {
    if (!p.leg_in_bounds(s.L)) throw FslipError("stance_dynamics: leg length outside bounds");
    leg_geometry(s);  // propagate degenerate-geometry errors

    Eigen::Matrix<double, 8, 1> y = s.vec();
    y[0] -= s.foot_x;
    y[1] -= s.foot_z;
    Eigen::Matrix<double, 3, 1> u;
    u << c.Ldd, c.u, c.tau;
    const auto dy = fslip_stance_core<double>(p, y, u);
    FslipState d = FslipState::from_vec(dy);
    d.foot_x = 0;
    d.foot_z = 0;
    return d;
}

FslipState flight_dynamics(const FslipState& s, const FslipControl& c, const FslipParams& p) {
    if (!p.leg_in_bounds(s.L)) throw FslipError("flight_dynamics: leg length outside bounds");
    FslipState d;
    d.x = s.xd;
    d.z = s.zd;
    d.theta = s.thetad;
    d.L = s.Ld;
    d.xd = 0.0;
    d.zd = -p.gravity;
    d.thetad = c.tau / p.inertia_poly(s.L);
    d.Ld = c.Ldd;
    return d;
}

GrfT<double> fslip_grf(const FslipState& s, const FslipControl& c, const FslipParams& p) {
    return fslip_grf_core<double>(p, s.x - s.foot_x, s.z - s.foot_z, s.L,
                                  s.xd, s.zd, s.Ld, c.u, c.tau);
}

double eval_regression(const FslipParams& p, const Polynomial& poly, double L) {
    if (!p.leg_in_bounds(L)) throw FslipError("eval_regression: leg length outside bounds");
    return poly(L);
}

double stance_energy(const FslipState& s, const FslipParams& p) {
    const LegGeometry g = leg_geometry(s);
    const double spring = s.L - g.r;
    const double K = p.stiffness_poly(s.L);
    const double I = p.inertia_poly(s.L);
    return 0.5 * p.mass * (s.xd * s.xd + s.zd * s.zd) + p.mass * p.gravity * s.z +
           0.5 * K * spring * spring + 0.5 * I * s.thetad * s.thetad;
}

std::string fslip_params_to_json(const FslipParams& p) {
    json j;
    j["mass"] = p.mass;
    j["gravity"] = p.gravity;
    j["stiffness_poly"] = p.stiffness_poly.coeffs;
    j["damping_poly"] = p.damping_poly.coeffs;
    j["inertia_poly"] = p.inertia_poly.coeffs;
    j["foot_length"] = p.foot_length;
    j["friction_mu"] = p.friction_mu;
    j["leg_length_bounds"] = {p.leg_min, p.leg_max};
    j["ldd_max"] = p.ldd_max;
    j["u_max"] = p.u_max;
    j["tau_max"] = p.tau_max;
    return j.dump(2);
}

FslipParams fslip_params_from_json(const std::string& text) {
    const json j = json::parse(text);
    FslipParams p;
    p.mass = j.at("mass").get<double>();
    p.gravity = j.at("gravity").get<double>();
    p.stiffness_poly = Polynomial(j.at("stiffness_poly").get<std::vector<double>>());
    p.damping_poly = Polynomial(j.at("damping_poly").get<std::vector<double>>());
    p.inertia_poly = Polynomial(j.at("inertia_poly").get<std::vector<double>>());
    p.foot_length = j.at("foot_length").get<double>();
    p.friction_mu = j.at("friction_mu").get<double>();
    const auto b = j.at("leg_length_bounds").get<std::vector<double>>();
    if (b.size() != 2) throw FslipError("fslip_params_from_json: leg_length_bounds needs 2 entries");
    p.leg_min = b[0];
    p.leg_max = b[1];
    p.ldd_max = j.at("ldd_max").get<double>();
    p.u_max = j.at("u_max").get<double>();
    p.tau_max = j.at("tau_max").get<double>();
    p.validate();
    return p;
}

}  // namespace somersault
