#include "somersault/reference.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace somersault {

HermiteSeries::HermiteSeries(std::vector<double> t, std::vector<double> v, std::vector<double> vd)
    : t_(std::move(t)), v_(std::move(v)), vd_(std::move(vd)) {
    if (t_.size() != v_.size() || t_.size() != vd_.size() || t_.size() < 2)
        throw std::invalid_argument("HermiteSeries: need >= 2 equal-length samples");
    for (size_t i = 1; i < t_.size(); ++i)
        if (!(t_[i] > t_[i - 1])) throw std::invalid_argument("HermiteSeries: times not increasing");
}

int HermiteSeries::segment(double t) const {
    const auto it = std::upper_bound(t_.begin(), t_.end(), t);
    int k = static_cast<int>(it - t_.begin()) - 1;
    k = std::max(0, std::min(k, static_cast<int>(t_.size()) - 2));
    return k;
}

double HermiteSeries::eval(double t) const {
    if (t <= t_.front()) return v_.front();
    if (t >= t_.back()) return v_.back();
    const int k = segment(t);
    const double h = t_[k + 1] - t_[k];
    const double s = (t - t_[k]) / h;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * v_[k] + (s3 - 2 * s2 + s) * h * vd_[k] +
           (-2 * s3 + 3 * s2) * v_[k + 1] + (s3 - s2) * h * vd_[k + 1];
}

double HermiteSeries::eval_rate(double t) const {
    if (t <= t_.front() || t >= t_.back()) return 0.0;
    const int k = segment(t);
    const double h = t_[k + 1] - t_[k];
    const double s = (t - t_[k]) / h;
    const double s2 = s * s;
    return ((6 * s2 - 6 * s) * v_[k] + (3 * s2 - 4 * s + 1) * h * vd_[k] +
            (-6 * s2 + 6 * s) * v_[k + 1] + (3 * s2 - 2 * s) * h * vd_[k + 1]) /
           h;
}

double HermiteSeries::eval_accel(double t) const {
    if (t <= t_.front() || t >= t_.back()) return 0.0;
    const int k = segment(t);
    const double h = t_[k + 1] - t_[k];
    const double s = (t - t_[k]) / h;
    return ((12 * s - 6) * v_[k] + (6 * s - 4) * h * vd_[k] + (-12 * s + 6) * v_[k + 1] +
            (6 * s - 2) * h * vd_[k + 1]) /
           (h * h);
}

void HermiteSeries::offset_values(double dv) {
    for (double& v : v_) v += dv;
}

std::string ReferenceBundle::to_json() const {
    nlohmann::json j;
    auto dump = [](const HermiteSeries& s) {
        nlohmann::json c;
        c["t"] = s.times();
        c["v"] = s.values();
        c["vd"] = s.rates();
        return c;
    };
    j["duration"] = duration;
    j["L"] = dump(L);
    j["x"] = dump(x);
    j["H"] = dump(H);
    j["pitch"] = dump(pitch);
    return j.dump(2);
}

void ReferenceBundle::write_csv(const std::string& path, double dt) const {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << "t,L,x,H,pitch\n";
    char line[256];
    for (double t = 0.0; t <= duration + 1e-12; t += dt) {
        std::snprintf(line, sizeof(line), "%.9g,%.9g,%.9g,%.9g,%.9g\n", t, L.eval(t), x.eval(t),
                      H.eval(t), pitch.eval(t));
        f << line;
    }
}

}  // namespace somersault
