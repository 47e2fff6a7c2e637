#include "oscomp/detector.hpp"

#include <cmath>
#include <stdexcept>

namespace oscomp {

void DetectorConfig::validate() const {
    if (window_n < 1) {
        throw std::invalid_argument("DetectorConfig: window_n must be >= 1");
    }
    if (fs <= 0.0) {
        throw std::invalid_argument("DetectorConfig: fs must be positive");
    }
    if (omega_max <= 0.0) {
        throw std::invalid_argument("DetectorConfig: omega_max must be positive");
    }
    if (fs <= omega_max / M_PI) {
        throw std::invalid_argument("DetectorConfig: fs too low to resolve omega_max");
    }
    if (!psi) {
        throw std::invalid_argument("DetectorConfig: psi not set");
    }
}

WindowExtrema::WindowExtrema(int window_n, double fill) : span_(window_n + 1) {
    if (window_n < 0) {
        throw std::invalid_argument("WindowExtrema: negative window");
    }
    // Seed the window as if the signal had been constant at `fill`.
    maxq_.push_back({fill, span_ - 1});
    minq_.push_back({fill, span_ - 1});
    n_ = span_;
}

void WindowExtrema::push(std::deque<Entry>& q, double v, bool is_max) {
    while (!q.empty() && (is_max ? q.back().value <= v : q.back().value >= v)) {
        q.pop_back();
    }
    q.push_back({v, n_});
    while (q.front().index + span_ <= n_) {
        q.pop_front();
    }
}

std::pair<double, double> WindowExtrema::step(double y) {
    push(maxq_, y, true);
    push(minq_, y, false);
    ++n_;
    return {maxq_.front().value, minq_.front().value};
}

namespace {
int sign_of(double v) {
    if (v > 0.0) return 1;
    if (v < 0.0) return -1;
    return 0;
}
}  // namespace

Detector::Detector(DetectorConfig config, double y0)
    : cfg_(std::move(config)),
      window_(cfg_.window_n, y0),
      prev_max_(y0),
      prev_min_(y0) {
    cfg_.validate();
    amp_est_ = y0 - cfg_.psi(0.0);
    omega_est_ = 0.5 * cfg_.omega_max;
}

std::optional<ExtremumEvent> Detector::step(double y_n, long n) {
    const double t = static_cast<double>(n) / cfg_.fs;
    const auto [ymax, ymin] = window_.step(y_n);
    const int s_max = sign_of(ymax - prev_max_);
    const int s_min = sign_of(ymin - prev_min_);
    const bool edge_max = s_max != prev_sign_max_;
    const bool edge_min = s_min != prev_sign_min_;
    prev_max_ = ymax;
    prev_min_ = ymin;
    prev_sign_max_ = s_max;
    prev_sign_min_ = s_min;

    // Candidates: running max turning down marks a maximum; running min
    // turning up marks a minimum. Alternation against the previous event.
    const bool cand_max = edge_max && s_max < 0 && last_event_sign_ != -1;
    const bool cand_min = edge_min && s_min > 0 && last_event_sign_ != +1;
    if (!cand_max && !cand_min) {
        return std::nullopt;
    }
    const double dt = t - t_star_prev_;
    if (!(dt > 0.0) || !(M_PI / dt < cfg_.omega_max)) {
        return std::nullopt;  // debounce
    }
    const double psi = cfg_.psi(t);
    int event_sign;
    if (cand_max && cand_min) {
        // Only possible before the first event; take the larger deviation.
        event_sign = std::abs(ymin - psi) > std::abs(ymax - psi) ? +1 : -1;
    } else {
        event_sign = cand_max ? -1 : +1;
    }

    ExtremumEvent ev;
    ev.kind = event_sign < 0 ? ExtremumKind::maximum : ExtremumKind::minimum;
    ev.t_star = t;
    ev.amp_signed = (event_sign < 0 ? ymax : ymin) - psi;
    ev.omega_est = std::min(M_PI / dt, cfg_.omega_max);
    ev.index = ++index_;

    last_event_sign_ = event_sign;
    t_star_prev_ = t;
    amp_est_ = ev.amp_signed;
    omega_est_ = ev.omega_est;
    return ev;
}

}  // namespace oscomp
