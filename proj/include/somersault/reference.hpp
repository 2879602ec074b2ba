#pragma once

#include <string>
#include <vector>

namespace somersault {

// Piecewise cubic Hermite interpolant: exact node values and node rates.
// Evaluation outside [t_front, t_back] holds the endpoint value (zero rate).
class HermiteSeries {
  public:
    HermiteSeries() = default;
    HermiteSeries(std::vector<double> t, std::vector<double> v, std::vector<double> vd);

    double eval(double t) const;
    double eval_rate(double t) const;
    double eval_accel(double t) const;
    double front_time() const { return t_.front(); }
    double back_time() const { return t_.back(); }
    const std::vector<double>& times() const { return t_; }
    const std::vector<double>& values() const { return v_; }
    const std::vector<double>& rates() const { return vd_; }
    bool empty() const { return t_.empty(); }

    // constant-offset shift of the value channel (used for pitch unwrapping)
    void offset_values(double dv);

  private:
    int segment(double t) const;
    std::vector<double> t_, v_, vd_;
};

// Time-indexed references extracted from a trajectory-optimization solution:
// actuated leg length, forward mass position, flywheel momentum, and leg
// angle (tracked as pelvis pitch on the robot).
struct ReferenceBundle {
    HermiteSeries L, x, H, pitch;
    double duration = 0.0;

    std::string to_json() const;
    // CSV with header t,L,x,H,pitch sampled at dt
    void write_csv(const std::string& path, double dt = 0.005) const;
};

}  // namespace somersault
