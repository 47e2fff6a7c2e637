#include "oscomp/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace oscomp {

using nlohmann::json;

const StateSpaceModel& case_study_body() {
    static const StateSpaceModel body(
        {{-333.35, -333.33, 0.015, 333.33},
         {1.0, 0.0, 0.0, 0.0},
         {0.012, 266.66, -0.012, -266.66},
         {0.0, 0.0, 1.0, 0.0}},
        {1.667, 0.0, 0.0, 0.0},
        {0.0, 0.0, 0.0, 1.0},
        {-9.806, 0.0, -9.806, 0.0});
    return body;
}

TransferFunction case_study_actuator_tf() {
    return TransferFunction::from_coeffs({3.2811}, {1.0, 0.0012});
}

namespace {

constexpr double kActuatorMidStroke = 0.0105;  // z in [0, 0.021] m

// Static spring stretch balancing the load's weight: 266.66 (x2 - x4) = 9.806.
double case_study_stretch() {
    const auto& a = case_study_body().a;
    return -case_study_body().d_affine[2] / a[2][1];
}

}  // namespace

double case_study_gravity_feedforward() {
    // Row-1 force balance at rest: 333.33 * stretch + 9.806 = 1.667 * rho.
    const auto& body = case_study_body();
    const double rho = (-body.a[0][1] * case_study_stretch() - body.d_affine[0]) / body.b[0];
    return rho / case_study_actuator_tf().num.coeffs()[0];
}

double case_study_reference_position() {
    return kActuatorMidStroke - case_study_stretch();
}

void ScenarioConfig::validate() const {
    sim.validate();
    const StateSpaceModel model = sim_model();
    if (initial_state.size() != static_cast<size_t>(model.order())) {
        throw std::invalid_argument("ScenarioConfig: initial_state size mismatch");
    }
    DetectorConfig dc = make_detector_config();
    dc.validate();
    if (compensator.enabled) {
        make_compensator().validate();
    }
    if (outer.type != OuterType::none) {
        outer.pi.validate();
    }
    for (const auto& lim : limiters) {
        lim.validate(model.order());
    }
    for (const auto& d : disturbances) {
        if (d.target == DisturbanceTarget::state &&
            (d.index < 0 || d.index >= model.order())) {
            throw std::invalid_argument("ScenarioConfig: disturbance index out of range");
        }
        if (d.time < 0.0 || d.time > sim.duration) {
            throw std::invalid_argument("ScenarioConfig: disturbance time outside duration");
        }
        if (d.width <= 0.0) {
            throw std::invalid_argument("ScenarioConfig: disturbance width must be positive");
        }
    }
    if (input_limits && !(input_limits->first < input_limits->second)) {
        throw std::invalid_argument("ScenarioConfig: input_limits must be ordered");
    }
}

StateSpaceModel ScenarioConfig::sim_model() const {
    if (!actuator_tf) {
        return body;
    }
    return ss_series(from_first_order_tf(*actuator_tf), body);
}

FreqResponse ScenarioConfig::plant_response() const {
    if (!actuator_tf) {
        return as_response(body);
    }
    return series(as_response(*actuator_tf), as_response(body));
}

DetectorConfig ScenarioConfig::make_detector_config() const {
    DetectorConfig dc;
    dc.window_n = detector.window_n;
    dc.fs = sim.fs;
    dc.omega_max = detector.omega_max;
    const double psi = detector.psi;
    dc.psi = [psi](double) { return psi; };
    return dc;
}

CompensatorConfig ScenarioConfig::make_compensator() const {
    CompensatorConfig cc;
    cc.enabled = compensator.enabled;
    cc.mode = compensator.mode;
    cc.k_gain = compensator.k_gain > 0.0 ? compensator.k_gain : optimal_gain();
    cc.enabled_from = compensator.enabled_from;
    cc.l_weight = compensator.l_weight;
    cc.freq_eval = compensator.freq_eval;
    cc.omega_nominal = compensator.omega_nominal;
    cc.detection_latency = (detector.window_n + 1) / sim.fs;
    if (compensator.mode == CompensatorMode::higher_order) {
        FreqResponse path = plant_response();
        cc.forward_gain = [path](double w) { return implied_forward_gain(path, w); };
    }
    return cc;
}

namespace {

void expect_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
    if (!j.is_object()) {
        throw std::invalid_argument("scenario config: '" + where + "' must be an object");
    }
    for (const auto& [key, _] : j.items()) {
        if (!allowed.count(key)) {
            throw std::invalid_argument("scenario config: unknown key '" +
                                        (where.empty() ? key : where + "." + key) + "'");
        }
    }
    for (const auto& key : allowed) {
        if (!j.contains(key)) {
            throw std::invalid_argument("scenario config: missing key '" +
                                        (where.empty() ? key : where + "." + key) + "'");
        }
    }
}

json ss_to_json(const StateSpaceModel& ss) {
    return json{{"a", ss.a}, {"b", ss.b}, {"c", ss.c}, {"d_affine", ss.d_affine}};
}

StateSpaceModel ss_from_json(const json& j, const std::string& where) {
    expect_keys(j, where, {"a", "b", "c", "d_affine"});
    return StateSpaceModel(j.at("a").get<std::vector<std::vector<double>>>(),
                           j.at("b").get<std::vector<double>>(),
                           j.at("c").get<std::vector<double>>(),
                           j.at("d_affine").get<std::vector<double>>());
}

}  // namespace

json ScenarioConfig::to_json() const {
    json plant;
    if (actuator_tf) {
        plant["actuator_tf"] = json{{"num", actuator_tf->num.coeffs()}, {"den", actuator_tf->den.coeffs()}};
    } else {
        plant["actuator_tf"] = nullptr;
    }
    plant["body"] = ss_to_json(body);

    json outer_j;
    outer_j["type"] = outer.type == OuterType::none ? "none" : (outer.type == OuterType::p ? "p" : "pi");
    outer_j["kp"] = outer.pi.kp;
    outer_j["ki"] = outer.pi.ki;
    outer_j["r1"] = outer.pi.r1;
    outer_j["r2"] = outer.pi.r2;
    outer_j["v_limits"] =
        outer.pi.v_limits ? json{outer.pi.v_limits->first, outer.pi.v_limits->second} : json(nullptr);
    outer_j["anti_windup"] = outer.pi.anti_windup == AntiWindup::freeze ? "freeze" : "none";
    outer_j["cutoff_time"] = outer.cutoff_time ? json(*outer.cutoff_time) : json(nullptr);

    json det;
    det["window_n"] = detector.window_n;
    det["omega_max"] = detector.omega_max;
    det["psi"] = detector.psi;

    json comp;
    comp["enabled"] = compensator.enabled;
    comp["mode"] = compensator.mode == CompensatorMode::second_order ? "second_order" : "higher_order";
    comp["k_gain"] = compensator.k_gain;
    comp["enabled_from"] = compensator.enabled_from;
    comp["l_weight"] = compensator.l_weight;
    comp["freq_eval"] =
        compensator.freq_eval == CompensatorConfig::FreqEval::nominal ? "nominal" : "event";
    comp["omega_nominal"] = compensator.omega_nominal;

    json sim_j;
    sim_j["fs"] = sim.fs;
    sim_j["substeps"] = sim.substeps;
    sim_j["duration"] = sim.duration;
    sim_j["seed"] = sim.seed;
    sim_j["noise_sigma"] = sim.noise_sigma;
    sim_j["noise_cutoff"] = sim.noise_cutoff;
    sim_j["divergence_limit"] = sim.divergence_limit;

    json dists = json::array();
    for (const auto& d : disturbances) {
        dists.push_back(json{{"time", d.time},
                             {"target", d.target == DisturbanceTarget::state ? "state" : "input"},
                             {"index", d.index},
                             {"magnitude", d.magnitude},
                             {"width", d.width}});
    }
    json lims = json::array();
    for (const auto& l : limiters) {
        lims.push_back(json{{"state_index", l.state_index},
                            {"lower", l.lower},
                            {"upper", l.upper},
                            {"velocity_index", l.velocity_index ? json(*l.velocity_index) : json(nullptr)}});
    }

    return json{{"name", name},
                {"plant", plant},
                {"outer", outer_j},
                {"detector", det},
                {"compensator", comp},
                {"sim", sim_j},
                {"input_limits",
                 input_limits ? json{input_limits->first, input_limits->second} : json(nullptr)},
                {"disturbances", dists},
                {"limiters", lims},
                {"initial_state", initial_state}};
}

ScenarioConfig ScenarioConfig::from_json(const json& j) {
    expect_keys(j, "", {"name", "plant", "outer", "detector", "compensator", "sim", "input_limits",
                        "disturbances", "limiters", "initial_state"});
    expect_keys(j.at("plant"), "plant", {"actuator_tf", "body"});

    std::optional<TransferFunction> act;
    if (!j.at("plant").at("actuator_tf").is_null()) {
        const json& a = j.at("plant").at("actuator_tf");
        expect_keys(a, "plant.actuator_tf", {"num", "den"});
        act = TransferFunction::from_coeffs(a.at("num").get<std::vector<double>>(),
                                            a.at("den").get<std::vector<double>>());
    }
    StateSpaceModel body = ss_from_json(j.at("plant").at("body"), "plant.body");

    ScenarioConfig sc;
    sc.name = j.at("name").get<std::string>();
    sc.actuator_tf = std::move(act);
    sc.body = std::move(body);

    const json& o = j.at("outer");
    expect_keys(o, "outer", {"type", "kp", "ki", "r1", "r2", "v_limits", "anti_windup", "cutoff_time"});
    const std::string ot = o.at("type").get<std::string>();
    if (ot == "none") {
        sc.outer.type = OuterType::none;
    } else if (ot == "p") {
        sc.outer.type = OuterType::p;
    } else if (ot == "pi") {
        sc.outer.type = OuterType::pi;
    } else {
        throw std::invalid_argument("scenario config: outer.type must be none|p|pi");
    }
    sc.outer.pi.kp = o.at("kp").get<double>();
    sc.outer.pi.ki = o.at("ki").get<double>();
    sc.outer.pi.r1 = o.at("r1").get<double>();
    sc.outer.pi.r2 = o.at("r2").get<double>();
    if (!o.at("v_limits").is_null()) {
        auto v = o.at("v_limits").get<std::vector<double>>();
        if (v.size() != 2) throw std::invalid_argument("scenario config: outer.v_limits needs [lo, hi]");
        sc.outer.pi.v_limits = {v[0], v[1]};
    }
    const std::string aw = o.at("anti_windup").get<std::string>();
    if (aw == "freeze") {
        sc.outer.pi.anti_windup = AntiWindup::freeze;
    } else if (aw == "none") {
        sc.outer.pi.anti_windup = AntiWindup::none;
    } else {
        throw std::invalid_argument("scenario config: outer.anti_windup must be freeze|none");
    }
    if (!o.at("cutoff_time").is_null()) {
        sc.outer.cutoff_time = o.at("cutoff_time").get<double>();
    }

    const json& d = j.at("detector");
    expect_keys(d, "detector", {"window_n", "omega_max", "psi"});
    sc.detector.window_n = d.at("window_n").get<int>();
    sc.detector.omega_max = d.at("omega_max").get<double>();
    sc.detector.psi = d.at("psi").get<double>();

    const json& c = j.at("compensator");
    expect_keys(c, "compensator",
                {"enabled", "mode", "k_gain", "enabled_from", "l_weight", "freq_eval", "omega_nominal"});
    sc.compensator.enabled = c.at("enabled").get<bool>();
    const std::string mode = c.at("mode").get<std::string>();
    if (mode == "second_order") {
        sc.compensator.mode = CompensatorMode::second_order;
    } else if (mode == "higher_order") {
        sc.compensator.mode = CompensatorMode::higher_order;
    } else {
        throw std::invalid_argument("scenario config: compensator.mode must be second_order|higher_order");
    }
    sc.compensator.k_gain = c.at("k_gain").get<double>();
    sc.compensator.enabled_from = c.at("enabled_from").get<double>();
    sc.compensator.l_weight = c.at("l_weight").get<double>();
    const std::string fe = c.at("freq_eval").get<std::string>();
    if (fe == "nominal") {
        sc.compensator.freq_eval = CompensatorConfig::FreqEval::nominal;
    } else if (fe == "event") {
        sc.compensator.freq_eval = CompensatorConfig::FreqEval::event;
    } else {
        throw std::invalid_argument("scenario config: compensator.freq_eval must be nominal|event");
    }
    sc.compensator.omega_nominal = c.at("omega_nominal").get<double>();

    const json& s = j.at("sim");
    expect_keys(s, "sim",
                {"fs", "substeps", "duration", "seed", "noise_sigma", "noise_cutoff", "divergence_limit"});
    sc.sim.fs = s.at("fs").get<double>();
    sc.sim.substeps = s.at("substeps").get<int>();
    sc.sim.duration = s.at("duration").get<double>();
    sc.sim.seed = s.at("seed").get<std::uint64_t>();
    sc.sim.noise_sigma = s.at("noise_sigma").get<double>();
    sc.sim.noise_cutoff = s.at("noise_cutoff").get<double>();
    sc.sim.divergence_limit = s.at("divergence_limit").get<double>();

    if (!j.at("input_limits").is_null()) {
        auto v = j.at("input_limits").get<std::vector<double>>();
        if (v.size() != 2) throw std::invalid_argument("scenario config: input_limits needs [lo, hi]");
        sc.input_limits = {v[0], v[1]};
    }
    for (const auto& item : j.at("disturbances")) {
        expect_keys(item, "disturbances[]", {"time", "target", "index", "magnitude", "width"});
        Disturbance dist;
        dist.time = item.at("time").get<double>();
        const std::string tgt = item.at("target").get<std::string>();
        if (tgt == "state") {
            dist.target = DisturbanceTarget::state;
        } else if (tgt == "input") {
            dist.target = DisturbanceTarget::input;
        } else {
            throw std::invalid_argument("scenario config: disturbance target must be state|input");
        }
        dist.index = item.at("index").get<int>();
        dist.magnitude = item.at("magnitude").get<double>();
        dist.width = item.at("width").get<double>();
        sc.disturbances.push_back(dist);
    }
    for (const auto& item : j.at("limiters")) {
        expect_keys(item, "limiters[]", {"state_index", "lower", "upper", "velocity_index"});
        StateLimiter lim;
        lim.state_index = item.at("state_index").get<int>();
        lim.lower = item.at("lower").get<double>();
        lim.upper = item.at("upper").get<double>();
        if (!item.at("velocity_index").is_null()) {
            lim.velocity_index = item.at("velocity_index").get<int>();
        }
        sc.limiters.push_back(lim);
    }
    sc.initial_state = j.at("initial_state").get<std::vector<double>>();
    return sc;
}

ScenarioConfig ScenarioConfig::with_override(const ScenarioConfig& base, const std::string& path,
                                             const std::string& value) {
    json j = base.to_json();
    json* node = &j;
    std::string consumed;
    std::istringstream segs(path);
    std::string seg;
    std::vector<std::string> parts;
    while (std::getline(segs, seg, '.')) {
        parts.push_back(seg);
    }
    if (parts.empty()) {
        throw std::invalid_argument("override: empty path");
    }
    for (size_t i = 0; i + 1 < parts.size(); ++i) {
        if (!node->is_object() || !node->contains(parts[i])) {
            throw std::invalid_argument("override: unknown path '" + path + "'");
        }
        node = &(*node)[parts[i]];
    }
    if (!node->is_object() || !node->contains(parts.back())) {
        throw std::invalid_argument("override: unknown path '" + path + "'");
    }
    json parsed = json::parse(value, nullptr, false);
    if (parsed.is_discarded()) {
        parsed = json(value);  // bare strings ("freeze", "pi") stay strings
    }
    (*node)[parts.back()] = parsed;
    return from_json(j);
}

// ---------------------------------------------------------------------------
// builders

ScenarioConfig scenario_second_order(double a, double b, double c, bool compensator_on) {
    if (!(b > 0.0)) {
        throw std::invalid_argument("scenario_second_order: b must be positive");
    }
    ScenarioConfig sc;
    sc.name = "second-order";
    sc.body = StateSpaceModel({{0.0, 1.0}, {-b, -a}}, {0.0, 1.0}, {1.0, 0.0});
    sc.detector.window_n = 30;
    sc.detector.omega_max = 3.0 * std::sqrt(b);
    sc.detector.psi = 0.0;
    sc.compensator.enabled = compensator_on;
    sc.compensator.mode = CompensatorMode::second_order;
    sc.compensator.k_gain = optimal_gain();
    sc.sim.fs = 1000.0;
    sc.sim.duration = 10.0;
    sc.sim.seed = 1;
    sc.sim.noise_sigma = 0.0;
    sc.sim.noise_cutoff = 100.0;
    sc.initial_state = {c, 0.0};
    return sc;
}

namespace {

std::vector<double> case_study_equilibrium(double load_offset) {
    const double r1 = case_study_reference_position();
    const double rho = case_study_gravity_feedforward() * case_study_actuator_tf().num.coeffs()[0];
    // layout [rho, act vel, act pos, load vel, load pos]
    return {rho, 0.0, kActuatorMidStroke, 0.0, r1 + load_offset};
}

void wire_fifth_order(ScenarioConfig& sc) {
    sc.actuator_tf = case_study_actuator_tf();
    sc.body = case_study_body();
    sc.detector.window_n = 150;
    sc.detector.omega_max = 3.0 * kCaseStudyResonance;
    sc.detector.psi = case_study_reference_position();
    sc.sim.fs = 5000.0;
    sc.sim.noise_sigma = 3e-5;
    sc.sim.noise_cutoff = 500.0;
    sc.sim.seed = 1;
}

}  // namespace

ScenarioConfig scenario_fifth_order_sim(double l_weight, double comp_on_at) {
    if (!(l_weight > 1.0 && l_weight < 3.0)) {
        throw std::invalid_argument("scenario_fifth_order_sim: l_weight must be in (1, 3)");
    }
    ScenarioConfig sc;
    sc.name = "fifth-order-sim";
    wire_fifth_order(sc);
    sc.outer.type = OuterType::p;
    sc.outer.pi.kp = 70.0;
    sc.outer.pi.r1 = case_study_reference_position();
    sc.outer.pi.r2 = case_study_gravity_feedforward();
    sc.compensator.enabled = true;
    sc.compensator.mode = CompensatorMode::higher_order;
    sc.compensator.k_gain = optimal_gain();
    sc.compensator.enabled_from = comp_on_at;
    sc.compensator.l_weight = l_weight;
    sc.compensator.freq_eval = CompensatorConfig::FreqEval::nominal;
    sc.compensator.omega_nominal = kCaseStudyResonance;
    sc.sim.duration = 10.0;
    sc.initial_state = case_study_equilibrium(0.003);
    return sc;
}

ScenarioConfig scenario_fifth_order_pi(bool disturb) {
    ScenarioConfig sc;
    sc.name = "fifth-order-pi";
    wire_fifth_order(sc);
    sc.outer.type = OuterType::pi;
    sc.outer.pi.kp = 150.0;
    sc.outer.pi.ki = 170.0;
    sc.outer.pi.r1 = case_study_reference_position();
    sc.outer.pi.r2 = case_study_gravity_feedforward();
    sc.outer.pi.v_limits = {0.0, 10.0};
    sc.outer.pi.anti_windup = AntiWindup::freeze;
    sc.input_limits = {{0.0, 10.0}};
    sc.compensator.enabled = true;
    sc.compensator.mode = CompensatorMode::higher_order;
    sc.compensator.k_gain = optimal_gain();
    sc.compensator.enabled_from = 4.0;
    sc.compensator.l_weight = 2.0;
    sc.compensator.freq_eval = CompensatorConfig::FreqEval::nominal;
    sc.compensator.omega_nominal = kCaseStudyResonance;
    sc.sim.duration = 40.0;
    sc.initial_state = case_study_equilibrium(0.003);
    if (disturb) {
        sc.disturbances.push_back({17.0, DisturbanceTarget::state, 1, 80.0, 0.02});
        sc.disturbances.push_back({30.0, DisturbanceTarget::state, 3, 80.0, 0.02});
    }
    return sc;
}

ScenarioConfig scenario_free_fall() {
    ScenarioConfig sc;
    sc.name = "free-fall";
    wire_fifth_order(sc);
    sc.outer.type = OuterType::p;
    sc.outer.pi.kp = 0.0;
    sc.outer.pi.r1 = case_study_reference_position();
    sc.outer.pi.r2 = case_study_gravity_feedforward();
    sc.outer.cutoff_time = 20.0;
    sc.compensator.enabled = false;
    sc.sim.duration = 30.0;
    sc.sim.noise_sigma = 0.0;
    sc.limiters.push_back({2, 0.0, 0.021, 1});
    sc.initial_state = case_study_equilibrium(0.0);
    return sc;
}

std::vector<std::string> scenario_names() {
    return {"second-order", "fifth-order-sim", "fifth-order-pi", "free-fall"};
}

std::string scenario_description(const std::string& name) {
    if (name == "second-order") {
        return "2nd-order oscillator y'' + a y' + b y = u, event-triggered compensation";
    }
    if (name == "fifth-order-sim") {
        return "5th-order two-mass plant, P outer loop, delayed/scaled compensation from t=4 s";
    }
    if (name == "fifth-order-pi") {
        return "emulated rig: PI loop with saturation, compensator, impulse disturbances";
    }
    if (name == "free-fall") {
        return "actuation cut at 20 s; hard limiter impact excites the spring mode";
    }
    throw std::invalid_argument("unknown scenario '" + name + "'");
}

std::vector<std::string> scenario_param_names(const std::string& name) {
    if (name == "second-order") return {"a", "b", "c", "compensator_on"};
    if (name == "fifth-order-sim") return {"l_weight", "comp_on_at"};
    if (name == "fifth-order-pi") return {"disturb"};
    if (name == "free-fall") return {};
    throw std::invalid_argument("unknown scenario '" + name + "'");
}

namespace {

double param_num(const std::map<std::string, std::string>& params, const std::string& key,
                 double fallback) {
    auto it = params.find(key);
    if (it == params.end()) return fallback;
    size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) {
        throw std::invalid_argument("parameter '" + key + "': not a number: " + it->second);
    }
    return v;
}

bool param_bool(const std::map<std::string, std::string>& params, const std::string& key,
                bool fallback) {
    auto it = params.find(key);
    if (it == params.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw std::invalid_argument("parameter '" + key + "': not a bool: " + it->second);
}

}  // namespace

ScenarioConfig build_scenario(const std::string& name,
                              const std::map<std::string, std::string>& params) {
    const auto known = scenario_param_names(name);
    for (const auto& [key, _] : params) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw std::invalid_argument("scenario '" + name + "': unknown parameter '" + key + "'");
        }
    }
    if (name == "second-order") {
        return scenario_second_order(param_num(params, "a", 2.0), param_num(params, "b", 100.0),
                                     param_num(params, "c", 2.0),
                                     param_bool(params, "compensator_on", false));
    }
    if (name == "fifth-order-sim") {
        return scenario_fifth_order_sim(param_num(params, "l_weight", 2.0),
                                        param_num(params, "comp_on_at", 4.0));
    }
    if (name == "fifth-order-pi") {
        return scenario_fifth_order_pi(param_bool(params, "disturb", true));
    }
    return scenario_free_fall();
}

}  // namespace oscomp
