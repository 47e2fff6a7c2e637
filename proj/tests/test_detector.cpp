#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "oscomp/detector.hpp"
#include "oscomp/simkernel.hpp"

using namespace oscomp;

namespace {

DetectorConfig basic_config(int n = 30, double fs = 1000.0, double omega_max = 30.0) {
    DetectorConfig cfg;
    cfg.window_n = n;
    cfg.fs = fs;
    cfg.omega_max = omega_max;
    cfg.psi = [](double) { return 0.0; };
    return cfg;
}

std::vector<ExtremumEvent> feed(Detector& det, const std::vector<double>& samples) {
    std::vector<ExtremumEvent> events;
    for (size_t n = 1; n < samples.size(); ++n) {
        if (auto ev = det.step(samples[n], static_cast<long>(n))) {
            events.push_back(*ev);
        }
    }
    return events;
}

}  // namespace

TEST_SUITE_BEGIN("detector");

TEST_CASE("initialization follows the half-bound rule") {
    Detector det(basic_config(), 2.0);
    CHECK(det.omega_est() == doctest::Approx(15.0));
    CHECK(det.amp_est() == doctest::Approx(2.0));

    DetectorConfig with_psi = basic_config();
    with_psi.psi = [](double) { return 2.0; };
    Detector det2(with_psi, 2.0);
    CHECK(det2.amp_est() == doctest::Approx(0.0));

    DetectorConfig bad = basic_config();
    bad.omega_max = 0.0;
    CHECK_THROWS_AS(Detector(bad, 0.0), std::invalid_argument);
}

TEST_CASE("clean sinusoid: timing, amplitude, frequency") {
    const double fs = 1000.0;
    Detector det(basic_config(), 0.0);
    std::vector<double> y(10001);
    for (size_t n = 0; n < y.size(); ++n) {
        y[n] = 2.0 * std::sin(10.0 * n / fs);
    }
    const auto events = feed(det, y);
    REQUIRE(events.size() >= 4);

    // first event: the t = pi/20 maximum, detected within the window delay
    const double t_peak = M_PI / 20.0;
    CHECK(events[0].kind == ExtremumKind::maximum);
    CHECK(events[0].t_star > t_peak);
    CHECK(events[0].t_star <= t_peak + 31.0 / fs + 1e-9);
    CHECK(events[0].amp_signed == doctest::Approx(2.0).epsilon(0.005));

    CHECK(std::abs(events[2].omega_est - 10.0) <= 0.5);
    for (size_t i = 2; i < events.size(); ++i) {
        CHECK(std::abs(events[i].omega_est - 10.0) / 10.0 <= 0.02);
        CHECK(std::abs(std::abs(events[i].amp_signed) - 2.0) / 2.0 <= 0.01);
    }
}

TEST_CASE("constant input never fires") {
    Detector det(basic_config(), 3.0);
    std::vector<double> y(5000, 3.0);
    CHECK(feed(det, y).empty());
}

TEST_CASE("seeded noise: event count and frequency estimates") {
    const double fs = 1000.0;
    NoiseGenerator noise(1, 0.02, fs / 10.0, fs);
    Detector det(basic_config(), 0.0 + 0.0);
    std::vector<double> y(10001);
    for (size_t n = 0; n < y.size(); ++n) {
        y[n] = std::sin(10.0 * n / fs) + noise.next();
    }
    const auto events = feed(det, y);
    const int expected = static_cast<int>(std::lround(2.0 * (10.0 * 10.0 / (2.0 * M_PI))));
    CHECK(std::abs(static_cast<int>(events.size()) - expected) <= 1);
    for (size_t i = 2; i < events.size(); ++i) {
        CHECK(std::abs(events[i].omega_est - 10.0) / 10.0 <= 0.10);
    }
}

TEST_CASE("alternation and debounce hold for arbitrary inputs") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> dist(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        DetectorConfig cfg = basic_config(10, 500.0, 60.0);
        Detector det(cfg, 0.0);
        std::vector<double> y(4000);
        double acc = 0.0;
        for (auto& v : y) {
            acc = 0.95 * acc + dist(rng);
            v = acc;
        }
        const auto events = feed(det, y);
        for (size_t i = 1; i < events.size(); ++i) {
            CHECK(events[i].kind != events[i - 1].kind);
            CHECK(events[i].t_star - events[i - 1].t_star > M_PI / cfg.omega_max);
            CHECK(events[i].omega_est > 0.0);
            CHECK(events[i].omega_est <= cfg.omega_max);
        }
    }
}

TEST_CASE("clean-sinusoid accuracy across the band") {
    const double fs = 2000.0;
    const double omega_max = 40.0;
    for (double frac : {0.2, 0.5, 0.8}) {
        const double w = frac * omega_max;
        const int n_win = static_cast<int>(0.1 * fs * M_PI / w);
        DetectorConfig cfg = basic_config(n_win, fs, omega_max);
        Detector det(cfg, 0.0);
        std::vector<double> y(static_cast<size_t>(20.0 * fs));
        for (size_t n = 0; n < y.size(); ++n) {
            y[n] = 1.5 * std::sin(w * n / fs);
        }
        const auto events = feed(det, y);
        REQUIRE(events.size() > 4);
        const double quant = w * w / (M_PI * fs);  // one-sample interval quantization
        for (size_t i = 2; i < events.size(); ++i) {
            CHECK(std::abs(events[i].omega_est - w) / w <= 0.02 + quant / w);
            CHECK(std::abs(std::abs(events[i].amp_signed) - 1.5) / 1.5 <= 0.01);
        }
    }
}

TEST_CASE("detection delay bounded by the window length") {
    const double fs = 1000.0;
    const int n_win = 30;
    Detector det(basic_config(n_win, fs, 30.0), 0.0);
    std::vector<double> y(8001);
    for (size_t n = 0; n < y.size(); ++n) {
        y[n] = std::sin(10.0 * n / fs);
    }
    const auto events = feed(det, y);
    REQUIRE(!events.empty());
    for (const auto& ev : events) {
        // distance to the nearest true extremum (pi/20 + k pi/10)
        const double phase = std::fmod(ev.t_star - M_PI / 20.0, M_PI / 10.0);
        const double delay = std::min(phase, M_PI / 10.0 - phase);
        CHECK(delay <= (n_win + 2) / fs);  // +1 sample: the true extremum falls between samples
    }
    CHECK(det.detection_latency() == doctest::Approx((n_win + 1) / fs));
}

TEST_CASE("running window extrema match the brute-force rescan") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> dist(-5.0, 5.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const int n_win = 1 + static_cast<int>(rng() % 16);
        std::vector<double> data(100);
        data[0] = dist(rng);
        WindowExtrema w(n_win, data[0]);
        for (size_t i = 1; i < data.size(); ++i) {
            data[i] = dist(rng);
            const auto [mx, mn] = w.step(data[i]);
            // the seeded prefix acts like n_win+1 copies of data[0]
            if (i >= static_cast<size_t>(n_win)) {
                const auto [emx, emn] = oracles::window_rescan(data, i, n_win);
                CHECK(mx == emx);
                CHECK(mn == emn);
            }
        }
    }
}

TEST_CASE("window max lags a ramp-descent by the window length") {
    const int n_win = 8;
    std::vector<double> data;
    for (int i = 0; i <= 50; ++i) data.push_back(i <= 25 ? i : 50 - i);
    WindowExtrema w(n_win, data[0]);
    std::vector<double> maxes;
    for (size_t i = 1; i < data.size(); ++i) {
        maxes.push_back(w.step(data[i]).first);
    }
    // peak value 25 persists for exactly n_win extra samples
    for (int k = 0; k < n_win; ++k) {
        CHECK(maxes[24 + k] == 25.0);
    }
    CHECK(maxes[25 + n_win] < 25.0);
}

TEST_CASE("all-equal window") {
    WindowExtrema w(5, 1.25);
    for (int i = 0; i < 20; ++i) {
        const auto [mx, mn] = w.step(1.25);
        CHECK(mx == 1.25);
        CHECK(mn == 1.25);
    }
}

TEST_SUITE_END();
