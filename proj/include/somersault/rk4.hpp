#pragma once

namespace somersault {

// Classic fixed-step RK4 over any vector type with +, * double.
template <typename V, typename F>
V rk4_step(const V& y, double dt, const F& f) {
    const V k1 = f(y);
    const V k2 = f(y + k1 * (dt / 2));
    const V k3 = f(y + k2 * (dt / 2));
    const V k4 = f(y + k3 * dt);
    return y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
}

}  // namespace somersault
