#include "oscomp/simkernel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include "oscomp/compensator.hpp"
#include "oscomp/outerloop.hpp"
#include "oscomp/scenarios.hpp"

namespace oscomp {

void SimConfig::validate() const {
    if (fs <= 0.0) throw std::invalid_argument("SimConfig: fs must be positive");
    if (duration <= 0.0) throw std::invalid_argument("SimConfig: duration must be positive");
    if (substeps < 1) throw std::invalid_argument("SimConfig: substeps must be >= 1");
    if (noise_sigma < 0.0) throw std::invalid_argument("SimConfig: negative noise_sigma");
    if (divergence_limit <= 0.0) throw std::invalid_argument("SimConfig: divergence_limit must be positive");
}

void StateLimiter::validate(int order) const {
    if (state_index < 0 || state_index >= order) {
        throw std::invalid_argument("StateLimiter: state_index out of range");
    }
    if (!(lower < upper)) {
        throw std::invalid_argument("StateLimiter: bounds must be ordered");
    }
    if (velocity_index && (*velocity_index < 0 || *velocity_index >= order)) {
        throw std::invalid_argument("StateLimiter: velocity_index out of range");
    }
}

void apply_limiter(std::vector<double>& x, const StateLimiter& lim) {
    double& p = x[lim.state_index];
    if (p < lim.lower) {
        p = lim.lower;
        if (lim.velocity_index && x[*lim.velocity_index] < 0.0) {
            x[*lim.velocity_index] = 0.0;
        }
    } else if (p > lim.upper) {
        p = lim.upper;
        if (lim.velocity_index && x[*lim.velocity_index] > 0.0) {
            x[*lim.velocity_index] = 0.0;
        }
    }
}

std::vector<double> rk4_step(const DerivFn& deriv, const std::vector<double>& x, double t, double h) {
    if (!(h > 0.0)) {
        throw std::invalid_argument("rk4_step: h must be positive");
    }
    const size_t n = x.size();
    const auto k1 = deriv(t, x);
    std::vector<double> tmp(n);
    for (size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
    const auto k2 = deriv(t + 0.5 * h, tmp);
    for (size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
    const auto k3 = deriv(t + 0.5 * h, tmp);
    for (size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
    const auto k4 = deriv(t + h, tmp);
    std::vector<double> out(n);
    for (size_t i = 0; i < n; ++i) {
        out[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        if (!std::isfinite(out[i])) {
            throw std::runtime_error("rk4_step: non-finite state at t=" + std::to_string(t) +
                                     ", component " + std::to_string(i));
        }
    }
    return out;
}

NoiseGenerator::NoiseGenerator(std::uint64_t seed, double sigma, double cutoff_hz, double fs)
    : rng_(seed), sigma_(sigma) {
    if (cutoff_hz <= 0.0) {
        cutoff_hz = fs / 10.0;
    }
    alpha_ = std::exp(-2.0 * M_PI * cutoff_hz / fs);
    gain_ = std::sqrt(1.0 - alpha_ * alpha_);
}

double NoiseGenerator::gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // Box-Muller on explicit uniforms; u1 in (0, 1] avoids log(0).
    const double norm = 1.0 / (static_cast<double>(rng_.max()) + 1.0);
    const double u1 = (static_cast<double>(rng_()) + 1.0) * norm;
    const double u2 = static_cast<double>(rng_()) * norm;
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
}

double NoiseGenerator::next() {
    if (sigma_ == 0.0) {
        return 0.0;
    }
    state_ = alpha_ * state_ + gain_ * gaussian();
    return sigma_ * state_;
}

namespace {

bool state_ok(const std::vector<double>& x, double limit) {
    for (double v : x) {
        if (!std::isfinite(v) || std::abs(v) > limit) {
            return false;
        }
    }
    return true;
}

}  // namespace

SimTrace run(const ScenarioConfig& sc) {
    sc.validate();
    const SimConfig& sim = sc.sim;
    const double fs = sim.fs;
    const double dt = 1.0 / fs;
    const long n_samples = static_cast<long>(std::ceil(sim.duration * fs)) + 1;

    const StateSpaceModel plant = sc.sim_model();
    std::vector<double> x = sc.initial_state;

    NoiseGenerator noise(sim.seed, sim.noise_sigma, sim.noise_cutoff, fs);
    PIState pi_state;
    std::optional<Detector> detector;
    Compensator comp(sc.make_compensator());

    SimTrace trace;
    trace.metadata_json = sc.to_json().dump();
    trace.t.reserve(n_samples);
    trace.y.reserve(n_samples);
    trace.y_noisy.reserve(n_samples);
    trace.u.reserve(n_samples);
    trace.u_hat.reserve(n_samples);
    trace.v.reserve(n_samples);

    const double h = dt / sim.substeps;
    for (long n = 0; n < n_samples; ++n) {
        const double t = n * dt;
        double y = 0.0;
        for (size_t i = 0; i < x.size(); ++i) {
            y += plant.c[i] * x[i];
        }
        const double y_meas = y + noise.next();

        double v_outer = 0.0;
        const bool outer_cut = sc.outer.cutoff_time && t >= *sc.outer.cutoff_time;
        if (sc.outer.type != OuterType::none && !outer_cut) {
            if (sc.outer.type == OuterType::p) {
                v_outer = p_step(sc.outer.pi, y_meas);
            } else {
                v_outer = pi_step(sc.outer.pi, pi_state, y_meas, dt);
            }
        }

        if (!detector) {
            detector.emplace(sc.make_detector_config(), y_meas);
        } else if (auto ev = detector->step(y_meas, n)) {
            trace.events.push_back(*ev);
            comp.on_event(*ev);
        }
        // half-sample slack rounds scheduled switches to the nearest sample
        const double u_hat = comp.output_at(t + 0.5 * dt);

        double v_total = v_outer + u_hat;
        for (const auto& d : sc.disturbances) {
            if (d.target == DisturbanceTarget::input && t >= d.time && t < d.time + d.width) {
                v_total += d.magnitude;
            }
        }
        if (sc.input_limits) {
            v_total = std::clamp(v_total, sc.input_limits->first, sc.input_limits->second);
        }

        trace.t.push_back(t);
        trace.y.push_back(y);
        trace.y_noisy.push_back(y_meas);
        trace.u.push_back(comp.held_base());
        trace.u_hat.push_back(u_hat);
        trace.v.push_back(v_total);

        if (n + 1 == n_samples) {
            break;
        }

        const auto deriv = [&](double tt, const std::vector<double>& xx) {
            std::vector<double> dx(xx.size(), 0.0);
            for (size_t i = 0; i < xx.size(); ++i) {
                double acc = plant.d_affine[i] + plant.b[i] * v_total;
                const auto& row = plant.a[i];
                for (size_t k = 0; k < xx.size(); ++k) {
                    acc += row[k] * xx[k];
                }
                dx[i] = acc;
            }
            for (const auto& d : sc.disturbances) {
                if (d.target == DisturbanceTarget::state && tt >= d.time && tt < d.time + d.width) {
                    dx[d.index] += d.magnitude;
                }
            }
            return dx;
        };

        bool dead = false;
        for (int s = 0; s < sim.substeps; ++s) {
            try {
                x = rk4_step(deriv, x, t + s * h, h);
            } catch (const std::runtime_error&) {
                dead = true;
                break;
            }
            for (const auto& lim : sc.limiters) {
                apply_limiter(x, lim);
            }
            if (!state_ok(x, sim.divergence_limit)) {
                dead = true;
                break;
            }
        }
        if (dead) {
            trace.diverged = true;
            trace.diverged_at = t;
            break;
        }
    }
    return trace;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string trace_to_csv(const SimTrace& trace) {
    std::string out = "t,y,y_noisy,u,u_hat,v\n";
    for (size_t i = 0; i < trace.size(); ++i) {
        out += format_double(trace.t[i]);
        out += ',';
        out += format_double(trace.y[i]);
        out += ',';
        out += format_double(trace.y_noisy[i]);
        out += ',';
        out += format_double(trace.u[i]);
        out += ',';
        out += format_double(trace.u_hat[i]);
        out += ',';
        out += format_double(trace.v[i]);
        out += '\n';
    }
    return out;
}

std::string events_to_csv(const SimTrace& trace) {
    std::string out = "i,kind,t_star,amp,omega\n";
    for (const auto& ev : trace.events) {
        out += std::to_string(ev.index);
        out += ',';
        out += ev.kind == ExtremumKind::maximum ? "max" : "min";
        out += ',';
        out += format_double(ev.t_star);
        out += ',';
        out += format_double(ev.amp_signed);
        out += ',';
        out += format_double(ev.omega_est);
        out += '\n';
    }
    return out;
}

}  // namespace oscomp
