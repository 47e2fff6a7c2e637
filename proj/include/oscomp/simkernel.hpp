#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "oscomp/detector.hpp"

namespace oscomp {

struct ScenarioConfig;

struct SimConfig {
    double fs = 1000.0;      // controller/measurement rate [Hz]
    int substeps = 1;        // integration micro-steps per sample
    double duration = 10.0;  // [s]
    std::uint64_t seed = 1;
    double noise_sigma = 0.0;    // measurement noise std [output units]
    double noise_cutoff = 0.0;   // low-pass cutoff [Hz]; 0 = fs/10 default
    double divergence_limit = 1e9;  // |state| beyond this truncates the run

    void validate() const;
};

/// Hard state constraint: position clamp with inelastic stop. When the
/// clamp engages and velocity_index is set, the velocity component is
/// zeroed only if it points into the limit, so the state can still lift
/// off when the net force reverses.
struct StateLimiter {
    int state_index = 0;
    double lower = 0.0;
    double upper = 0.0;
    std::optional<int> velocity_index;

    void validate(int order) const;
};

void apply_limiter(std::vector<double>& x, const StateLimiter& lim);

using DerivFn = std::function<std::vector<double>(double, const std::vector<double>&)>;

/// Classical RK4 update with inputs held constant over the step (the
/// derivative closure owns the ZOH inputs). Throws std::runtime_error when
/// the result goes non-finite.
std::vector<double> rk4_step(const DerivFn& deriv, const std::vector<double>& x, double t, double h);

/// Seeded band-limited Gaussian noise: white N(0, sigma^2) through a
/// first-order low-pass, renormalized so the stationary output std stays
/// sigma. Hand-rolled Box-Muller keeps streams identical across standard
/// libraries.
class NoiseGenerator {
  public:
    NoiseGenerator(std::uint64_t seed, double sigma, double cutoff_hz, double fs);

    double next();

  private:
    double gaussian();

    std::mt19937_64 rng_;
    double sigma_;
    double alpha_;
    double gain_;
    double state_ = 0.0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Time-indexed record of one run. Columns share the same length; t steps
/// by 1/fs. A diverged run is truncated and flagged, not an error.
struct SimTrace {
    std::vector<double> t;
    std::vector<double> y;
    std::vector<double> y_noisy;
    std::vector<double> u;
    std::vector<double> u_hat;
    std::vector<double> v;
    std::vector<ExtremumEvent> events;
    bool diverged = false;
    double diverged_at = 0.0;
    std::string metadata_json;  // config echo

    size_t size() const { return t.size(); }
};

/// Deterministic hybrid run of a full scenario: per sample, read the noisy
/// output, step the outer controller, the detector and the compensator,
/// apply scheduled switches rounded to the sample grid, integrate the
/// plant, record.
SimTrace run(const ScenarioConfig& scenario);

/// CSV export, header `t,y,y_noisy,u,u_hat,v`, shortest round-trip decimal
/// formatting.
std::string trace_to_csv(const SimTrace& trace);

/// Events CSV, header `i,kind,t_star,amp,omega`.
std::string events_to_csv(const SimTrace& trace);

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double v);

}  // namespace oscomp
