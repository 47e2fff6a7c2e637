#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "oscomp/simkernel.hpp"

namespace oscomp {

struct MetricsReport {
    std::vector<std::pair<double, double>> envelope;  // (t_star, |amp|)
    std::optional<double> settling_time_s;
    long updates_total = 0;
    double periods_observed = 0.0;
    double updates_per_period = 0.0;
    double comm_effort_continuous = 0.0;  // updates/period of a continuous loop
    double comm_effort_event = 0.0;       // measured updates/period
    double reduction_factor = 0.0;

    std::string to_json_string() const;
};

/// (t_star, |amp_signed|) per detected event.
std::vector<std::pair<double, double>> envelope_from_events(const SimTrace& trace);

/// First event time after which every remaining envelope point is at or
/// below the threshold; nullopt when the envelope never stays below it.
std::optional<double> settling_time(const std::vector<std::pair<double, double>>& envelope,
                                    double threshold);

/// Communication-effort comparison: continuous baseline 2 pi fs / omega
/// updates per period vs the measured distinct u_hat switch count, with
/// periods counted from detected events (alternating pairs) inside the
/// switching window.
MetricsReport communication_effort(const SimTrace& trace, double omega, double fs);

/// Full post-hoc report: envelope + settling at `settle_threshold` +
/// communication effort.
MetricsReport analyze(const SimTrace& trace, double omega, double fs, double settle_threshold);

}  // namespace oscomp
