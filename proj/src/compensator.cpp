#include "oscomp/compensator.hpp"

#include <cmath>
#include <stdexcept>

namespace oscomp {

double optimal_gain() {
    return std::sqrt(3.0) / (2.0 * M_PI);
}

double base_law(const ExtremumEvent& event, double k) {
    return k * event.omega_est * event.omega_est * event.amp_signed;
}

namespace {

double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
    if (panels % 2 != 0) {
        ++panels;
    }
    const double h = (b - a) / panels;
    double acc = f(a) + f(b);
    for (int i = 1; i < panels; ++i) {
        acc += f(a + i * h) * (i % 2 == 0 ? 2.0 : 4.0);
    }
    return acc * h / 3.0;
}

}  // namespace

double energy_balance_residual(double amp, double omega, double u_const, double phi) {
    if (omega <= 0.0) {
        throw std::invalid_argument("energy_balance_residual: omega must be positive");
    }
    const double period = 2.0 * M_PI / omega;
    const auto integrand = [&](double t) {
        const double s = std::sin(omega * t + phi);
        return -amp * amp * omega * omega * s * s + 0.5 * u_const * u_const * t * t;
    };
    return simpson(integrand, 0.0, period, 10000);
}

double mean_oscillation_power(double amp, double omega) {
    return -0.5 * amp * amp * omega * omega;
}

void CompensatorConfig::validate() const {
    if (k_gain <= 0.0) {
        throw std::invalid_argument("CompensatorConfig: k_gain must be positive");
    }
    if (mode == CompensatorMode::higher_order) {
        if (!(l_weight > 1.0 && l_weight < 3.0)) {
            throw std::invalid_argument("CompensatorConfig: l_weight must be in (1, 3)");
        }
        if (!forward_gain) {
            throw std::invalid_argument("CompensatorConfig: forward_gain not set");
        }
        if (freq_eval == FreqEval::nominal && omega_nominal <= 0.0) {
            throw std::invalid_argument("CompensatorConfig: omega_nominal required for nominal eval");
        }
        if (detection_latency < 0.0) {
            throw std::invalid_argument("CompensatorConfig: negative detection_latency");
        }
    }
}

ScheduledSwitch higher_order_transform(double u_value, const ExtremumEvent& event,
                                       const CompensatorConfig& cfg) {
    if (event.omega_est <= 0.0) {
        throw std::invalid_argument("higher_order_transform: omega_est must be positive");
    }
    const double w_eval = cfg.freq_eval == CompensatorConfig::FreqEval::nominal
                              ? cfg.omega_nominal
                              : event.omega_est;
    const Complex g1 = cfg.forward_gain(w_eval);
    const double mag = std::abs(g1);
    if (mag < 1e-9) {
        throw std::domain_error(
            "higher_order_transform: |G(j w)| below 1e-9, plant notch at the oscillation frequency");
    }
    const Complex g2 = cfg.forward_gain(2.0 * w_eval);
    const double delay = (2.0 * M_PI + phase_principal(g2)) / w_eval;
    ScheduledSwitch sw;
    sw.value = cfg.l_weight * u_value / mag;
    sw.apply_at = event.t_star - cfg.detection_latency + delay;
    return sw;
}

bool pulse_energy_inequality_check(const std::function<double(double)>& step_response,
                                   double u_const, double omega) {
    if (omega <= 0.0) {
        throw std::invalid_argument("pulse_energy_inequality_check: omega must be positive");
    }
    const double horizon = M_PI / omega;
    const int n = 20000;
    const double h = horizon / n;
    // trapezoid: raw pulse integral vs the pulse filtered by the step response
    double raw = u_const * horizon;
    double filtered = 0.5 * (u_const * step_response(0.0) + u_const * step_response(horizon));
    for (int i = 1; i < n; ++i) {
        filtered += u_const * step_response(i * h);
    }
    filtered *= h;
    const double tol = 1e-9 * std::max(std::abs(raw), 1.0);
    return raw - filtered > tol;
}

Compensator::Compensator(CompensatorConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.k_gain <= 0.0) {
        cfg_.k_gain = optimal_gain();
    }
    if (cfg_.enabled) {
        cfg_.validate();
    }
}

void Compensator::on_event(const ExtremumEvent& event) {
    if (!cfg_.enabled || event.t_star < cfg_.enabled_from) {
        return;
    }
    u_base_ = base_law(event, cfg_.k_gain);
    if (cfg_.mode == CompensatorMode::second_order) {
        u_out_ = u_base_;
        return;
    }
    ScheduledSwitch sw = higher_order_transform(u_base_, event, cfg_);
    // A rescheduled value whose apply_at precedes a pending one replaces it,
    // keeping the applied signal a single-valued staircase.
    while (!schedule_.empty() && schedule_.back().apply_at > sw.apply_at) {
        schedule_.pop_back();
    }
    schedule_.push_back(sw);
}

double Compensator::output_at(double t) {
    while (!schedule_.empty() && schedule_.front().apply_at <= t + 1e-12) {
        u_out_ = schedule_.front().value;
        schedule_.pop_front();
    }
    return u_out_;
}

}  // namespace oscomp
