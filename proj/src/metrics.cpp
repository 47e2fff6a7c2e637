#include "oscomp/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace oscomp {

std::vector<std::pair<double, double>> envelope_from_events(const SimTrace& trace) {
    std::vector<std::pair<double, double>> env;
    env.reserve(trace.events.size());
    for (const auto& ev : trace.events) {
        env.emplace_back(ev.t_star, std::abs(ev.amp_signed));
    }
    return env;
}

std::optional<double> settling_time(const std::vector<std::pair<double, double>>& envelope,
                                    double threshold) {
    if (threshold <= 0.0) {
        throw std::invalid_argument("settling_time: threshold must be positive");
    }
    std::optional<double> settled;
    for (const auto& [t, amp] : envelope) {
        if (amp > threshold) {
            settled.reset();
        } else if (!settled) {
            settled = t;
        }
    }
    return settled;
}

MetricsReport communication_effort(const SimTrace& trace, double omega, double fs) {
    if (omega <= 0.0) {
        throw std::invalid_argument("communication_effort: omega must be positive");
    }
    MetricsReport rep;
    rep.comm_effort_continuous = 2.0 * M_PI * fs / omega;

    double first_switch = 0.0;
    double last_switch = 0.0;
    for (size_t i = 1; i < trace.size(); ++i) {
        if (trace.u_hat[i] != trace.u_hat[i - 1]) {
            if (rep.updates_total == 0) {
                first_switch = trace.t[i];
            }
            last_switch = trace.t[i];
            ++rep.updates_total;
        }
    }
    long events_in_window = 0;
    for (const auto& ev : trace.events) {
        if (ev.t_star >= first_switch && ev.t_star <= last_switch) {
            ++events_in_window;
        }
    }
    // consecutive alternating events are half a period apart
    rep.periods_observed = events_in_window > 1 ? (events_in_window - 1) / 2.0 : 0.0;
    if (rep.periods_observed > 0.0) {
        rep.updates_per_period = rep.updates_total / rep.periods_observed;
        rep.comm_effort_event = rep.updates_per_period;
        rep.reduction_factor = rep.comm_effort_continuous / rep.comm_effort_event;
    }
    return rep;
}

MetricsReport analyze(const SimTrace& trace, double omega, double fs, double settle_threshold) {
    MetricsReport rep = communication_effort(trace, omega, fs);
    rep.envelope = envelope_from_events(trace);
    rep.settling_time_s = settling_time(rep.envelope, settle_threshold);
    return rep;
}

std::string MetricsReport::to_json_string() const {
    nlohmann::json env = nlohmann::json::array();
    for (const auto& [t, a] : envelope) {
        env.push_back(nlohmann::json::array({t, a}));
    }
    nlohmann::json j{{"envelope", env},
                     {"settling_time_s", settling_time_s ? nlohmann::json(*settling_time_s)
                                                         : nlohmann::json(nullptr)},
                     {"updates_total", updates_total},
                     {"periods_observed", periods_observed},
                     {"updates_per_period", updates_per_period},
                     {"comm_effort_continuous", comm_effort_continuous},
                     {"comm_effort_event", comm_effort_event},
                     {"reduction_factor", reduction_factor}};
    return j.dump(2);
}

}  // namespace oscomp
