#pragma once

#include <deque>
#include <functional>
#include <optional>
#include <vector>

namespace oscomp {

enum class ExtremumKind { maximum, minimum };

/// One detected output extremum. amp_signed is relative to Psi: positive at
/// a maximum, negative at a minimum (in regular operation).
struct ExtremumEvent {
    int index = 0;
    ExtremumKind kind = ExtremumKind::maximum;
    double t_star = 0.0;     // detection timestamp [s]
    double amp_signed = 0.0;  // extremum value minus Psi(t_star)
    double omega_est = 0.0;   // pi / inter-event interval, clamped to (0, omega_max]
};

struct DetectorConfig {
    int window_n = 30;      // smoothing window spans the last window_n + 1 samples
    double fs = 1000.0;     // sampling frequency [Hz]
    double omega_max = 0.0;  // known upper bound on the oscillation frequency [rad/s]
    std::function<double(double)> psi;  // non-oscillatory reference offset

    void validate() const;
};

/// Sliding-window max/min over the last n+1 samples, O(1) amortized
/// (monotonic deques).
class WindowExtrema {
  public:
    WindowExtrema(int window_n, double fill);

    /// Push one sample; returns {max, min} over the current window.
    std::pair<double, double> step(double y);

    double current_max() const { return maxq_.front().value; }
    double current_min() const { return minq_.front().value; }

  private:
    struct Entry {
        double value;
        long index;
    };
    void push(std::deque<Entry>& q, double v, bool is_max);

    int span_;
    long n_ = 0;
    std::deque<Entry> maxq_;
    std::deque<Entry> minq_;
};

/// Online extrema detector. Feed one sample per call, in order; emits an
/// event when the smoothed (windowed) running max turns downward (maximum)
/// or the running min turns upward (minimum), subject to alternation with
/// the previous event and the debounce pi/(t - t_prev) < omega_max.
class Detector {
  public:
    Detector(DetectorConfig config, double y0);

    std::optional<ExtremumEvent> step(double y_n, long n);

    const DetectorConfig& config() const { return cfg_; }
    double amp_est() const { return amp_est_; }
    double omega_est() const { return omega_est_; }
    int event_count() const { return index_; }
    /// Worst-case lag between a true extremum and its event [s].
    double detection_latency() const { return (cfg_.window_n + 1) / cfg_.fs; }

  private:
    DetectorConfig cfg_;
    WindowExtrema window_;
    double prev_max_;
    double prev_min_;
    int prev_sign_max_ = 0;
    int prev_sign_min_ = 0;
    int last_event_sign_ = 0;  // -1 maximum, +1 minimum, 0 none yet
    double t_star_prev_ = 0.0;
    int index_ = 0;
    double amp_est_;
    double omega_est_;
};

}  // namespace oscomp
