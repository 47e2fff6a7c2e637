#pragma once

#include <optional>
#include <utility>

namespace oscomp {

enum class AntiWindup { freeze, none };

/// Proportional / proportional-integral reference controller with gravity
/// feedforward r2 and optional output saturation.
struct PIConfig {
    double kp = 0.0;
    double ki = 0.0;
    double r1 = 0.0;  // reference [output units]
    double r2 = 0.0;  // feedforward [input units]
    std::optional<std::pair<double, double>> v_limits;
    AntiWindup anti_windup = AntiWindup::freeze;

    void validate() const;
};

struct PIState {
    double integral = 0.0;  // [output units * s]
};

/// v = kp (r1 - y) + r2. The compensator output is added by the scenario
/// wiring, not here.
double p_step(const PIConfig& cfg, double y);

/// Forward-Euler PI update. With freeze anti-windup the integral is not
/// advanced when the unclamped output is saturated and the update would
/// deepen the saturation.
double pi_step(const PIConfig& cfg, PIState& state, double y, double dt);

}  // namespace oscomp
