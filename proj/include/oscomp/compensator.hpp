#pragma once

#include <deque>
#include <functional>
#include <optional>

#include "oscomp/detector.hpp"
#include "oscomp/lti.hpp"

namespace oscomp {

/// Optimal per-period gain sqrt(3)/(2 pi) from the energy balance of an
/// oscillation against a constant control input.
double optimal_gain();

/// u = k * omega_est^2 * amp_signed.
double base_law(const ExtremumEvent& event, double k);

/// Integrates the oscillation power -A^2 w^2 sin^2(w t + phi) and the
/// constant-input counterpart 0.5 U^2 t^2 over one period [0, 2 pi/w]
/// (composite Simpson, >= 1e4 panels) and returns their sum.
double energy_balance_residual(double amp, double omega, double u_const, double phi = 0.0);

/// Period-averaged oscillation power -0.5 A^2 w^2.
double mean_oscillation_power(double amp, double omega);

enum class CompensatorMode { second_order, higher_order };

struct CompensatorConfig {
    bool enabled = true;
    CompensatorMode mode = CompensatorMode::second_order;
    double k_gain = 0.0;        // defaults to optimal_gain() when <= 0 at validate()
    double enabled_from = 0.0;  // switch-on time [s]

    // higher_order mode only
    double l_weight = 0.0;       // impulse weighting factor, 1 < L < 3
    FreqResponse forward_gain;   // G of the forward path

    /// Frequency at which G is evaluated for the magnitude scaling and the
    /// delay T. `nominal` uses omega_nominal (the plant's known
    /// characteristic frequency); `event` re-evaluates at each event's
    /// omega_est.
    enum class FreqEval { nominal, event };
    FreqEval freq_eval = FreqEval::nominal;
    double omega_nominal = 0.0;

    /// Known detector lag (window_n + 1)/fs, subtracted when scheduling so
    /// that T is applied relative to the true extremum.
    double detection_latency = 0.0;

    void validate() const;
};

/// Scheduled application of the transformed control value.
struct ScheduledSwitch {
    double apply_at = 0.0;
    double value = 0.0;
};

/// value = L u / |G(j w)|, apply_at = t* - latency + T with
/// T = (2 pi + arg G(j 2 w)) / w. Throws when |G(j w)| < 1e-9 (plant notch
/// at the oscillation frequency).
ScheduledSwitch higher_order_transform(double u_value, const ExtremumEvent& event,
                                       const CompensatorConfig& cfg);

/// Compares the half-period impulse content of a raw rectangular pulse
/// against the same pulse filtered through the plant's step response
/// (trapezoid quadrature over [0, pi/w]). `step_response` must be
/// normalized by the caller to O(1) level. Returns true when the filtered
/// content is strictly smaller.
bool pulse_energy_inequality_check(const std::function<double(double)>& step_response,
                                   double u_const, double omega);

/// Event-triggered control state: holds the current output and the pending
/// scheduled switches (higher-order mode).
class Compensator {
  public:
    explicit Compensator(CompensatorConfig cfg);

    /// Feed a detected extremum. In second_order mode the held output
    /// changes immediately; in higher_order mode a delayed switch is
    /// scheduled. Events before enabled_from are ignored.
    void on_event(const ExtremumEvent& event);

    /// Advance to time t; applies any scheduled switch due by t. Returns
    /// the currently held output.
    double output_at(double t);

    double held_base() const { return u_base_; }
    const CompensatorConfig& config() const { return cfg_; }

  private:
    CompensatorConfig cfg_;
    double u_base_ = 0.0;  // latest base-law value (second_order: the output)
    double u_out_ = 0.0;
    std::deque<ScheduledSwitch> schedule_;
};

}  // namespace oscomp
