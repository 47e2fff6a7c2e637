#include "oscomp/outerloop.hpp"

#include <algorithm>
#include <stdexcept>

namespace oscomp {

void PIConfig::validate() const {
    if (kp < 0.0 || ki < 0.0) {
        throw std::invalid_argument("PIConfig: gains must be non-negative");
    }
    if (v_limits && !(v_limits->first < v_limits->second)) {
        throw std::invalid_argument("PIConfig: v_limits must be ordered");
    }
}

double p_step(const PIConfig& cfg, double y) {
    return cfg.kp * (cfg.r1 - y) + cfg.r2;
}

double pi_step(const PIConfig& cfg, PIState& state, double y, double dt) {
    const double err = cfg.r1 - y;
    double integral_next = state.integral + err * dt;
    double v = cfg.kp * err + cfg.ki * integral_next + cfg.r2;
    if (cfg.v_limits) {
        const auto [lo, hi] = *cfg.v_limits;
        const bool deepens = (v > hi && err > 0.0) || (v < lo && err < 0.0);
        if ((v > hi || v < lo) && cfg.anti_windup == AntiWindup::freeze && deepens) {
            integral_next = state.integral;  // conditional integration
            v = cfg.kp * err + cfg.ki * integral_next + cfg.r2;
        }
        v = std::clamp(v, lo, hi);
    }
    state.integral = integral_next;
    return v;
}

}  // namespace oscomp
