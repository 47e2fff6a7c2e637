#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "oscomp/compensator.hpp"
#include "oscomp/detector.hpp"
#include "oscomp/lti.hpp"
#include "oscomp/outerloop.hpp"
#include "oscomp/simkernel.hpp"

namespace oscomp {

/// Dominant oscillatory-mode frequency of the case-study plant [rad/s],
/// from the characteristic polynomial of its A matrix (cross-checked by a
/// root-finding oracle in the tests).
inline constexpr double kCaseStudyResonance = 16.346083838727797;

enum class OuterType { none, p, pi };
enum class DisturbanceTarget { state, input };

struct Disturbance {
    double time = 0.0;
    DisturbanceTarget target = DisturbanceTarget::state;
    int index = 0;  // state index; ignored for input target
    double magnitude = 0.0;
    double width = 0.02;  // rectangular pulse [s]
};

struct OuterConfig {
    OuterType type = OuterType::none;
    PIConfig pi;
    std::optional<double> cutoff_time;  // v forced to 0 from this time on
};

struct CompensatorSettings {
    bool enabled = false;
    CompensatorMode mode = CompensatorMode::second_order;
    double k_gain = 0.0;  // <= 0 means optimal_gain()
    double enabled_from = 0.0;
    double l_weight = 2.0;
    CompensatorConfig::FreqEval freq_eval = CompensatorConfig::FreqEval::nominal;
    double omega_nominal = 0.0;
};

struct DetectorSettings {
    int window_n = 30;
    double omega_max = 0.0;
    double psi = 0.0;  // constant reference offset
};

/// Full wiring of one experiment. The plant is stored as its parts
/// (optional actuator transfer function in series with the body
/// state-space); the simulatable model and the compensator's forward gain
/// are derived, which keeps the file format lossless.
struct ScenarioConfig {
    std::string name;
    std::optional<TransferFunction> actuator_tf;
    StateSpaceModel body;
    OuterConfig outer;
    DetectorSettings detector;
    CompensatorSettings compensator;
    SimConfig sim;
    std::optional<std::pair<double, double>> input_limits;
    std::vector<Disturbance> disturbances;
    std::vector<StateLimiter> limiters;
    std::vector<double> initial_state;  // sized for the derived sim model

    void validate() const;

    /// Simulatable model: actuator realization in series with the body, or
    /// the bare body. State layout with an actuator: [rho, body states...].
    StateSpaceModel sim_model() const;

    /// Frequency response of the full control-to-output path v -> y.
    FreqResponse plant_response() const;

    DetectorConfig make_detector_config() const;
    CompensatorConfig make_compensator() const;

    nlohmann::json to_json() const;
    static ScenarioConfig from_json(const nlohmann::json& j);

    /// Set a dotted-path field on the serialized form, e.g.
    /// "sim.duration=20" or "compensator.enabled=true". Values parse as
    /// JSON. Throws std::invalid_argument naming the path when it does not
    /// address an existing schema field.
    static ScenarioConfig with_override(const ScenarioConfig& base, const std::string& path,
                                        const std::string& value);
};

// Canonical builders for the four experiments.
ScenarioConfig scenario_second_order(double a = 2.0, double b = 100.0, double c = 2.0,
                                     bool compensator_on = false);
ScenarioConfig scenario_fifth_order_sim(double l_weight = 2.0, double comp_on_at = 4.0);
ScenarioConfig scenario_fifth_order_pi(bool disturb = true);
ScenarioConfig scenario_free_fall();

/// Name -> builder with per-builder numeric/bool parameters (the CLI's
/// bare `--set a=-1` form). Unknown scenario or parameter names throw.
std::vector<std::string> scenario_names();
std::string scenario_description(const std::string& name);
ScenarioConfig build_scenario(const std::string& name,
                              const std::map<std::string, std::string>& params = {});
std::vector<std::string> scenario_param_names(const std::string& name);

// Case-study constants of the experimental plant (section-3 literals).
const StateSpaceModel& case_study_body();
TransferFunction case_study_actuator_tf();
double case_study_gravity_feedforward();   // R2*: exact gravity-compensating voltage
double case_study_reference_position();    // R1*: load position with the actuator mid-stroke

}  // namespace oscomp
