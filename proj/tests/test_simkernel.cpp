#include <doctest.h>

#include <cmath>

#include "oscomp/metrics.hpp"
#include "oscomp/scenarios.hpp"
#include "oscomp/simkernel.hpp"

using namespace oscomp;

TEST_SUITE_BEGIN("simkernel");

TEST_CASE("rk4 single step on the scalar exponential") {
    const DerivFn f = [](double, const std::vector<double>& x) {
        return std::vector<double>{-x[0]};
    };
    const auto out = rk4_step(f, {1.0}, 0.0, 0.1);
    CHECK(out[0] == doctest::Approx(0.9048375).epsilon(1e-10));
    CHECK(std::abs(out[0] - std::exp(-0.1)) < 1e-7);
}

TEST_CASE("rk4 harmonic oscillator over half a period") {
    const DerivFn f = [](double, const std::vector<double>& x) {
        return std::vector<double>{x[1], -100.0 * x[0]};
    };
    std::vector<double> x{2.0, 0.0};
    const double h = 1.0 / 5000.0;
    const double t_end = M_PI / 10.0;
    double t = 0.0;
    while (t + h <= t_end + 1e-15) {
        x = rk4_step(f, x, t, h);
        t += h;
    }
    if (t_end - t > 1e-12) {
        x = rk4_step(f, x, t, t_end - t);
    }
    CHECK(std::abs(x[0] + 2.0) <= 1e-4);
}

TEST_CASE("rk4 step-halving convergence on the case-study plant") {
    const auto sc = scenario_fifth_order_sim(2.0, 4.0);
    const StateSpaceModel plant = sc.sim_model();
    const double v = case_study_gravity_feedforward();
    const DerivFn f = [&](double, const std::vector<double>& x) {
        std::vector<double> dx(x.size());
        for (size_t i = 0; i < x.size(); ++i) {
            double acc = plant.d_affine[i] + plant.b[i] * v;
            for (size_t k = 0; k < x.size(); ++k) {
                acc += plant.a[i][k] * x[k];
            }
            dx[i] = acc;
        }
        return dx;
    };
    auto integrate = [&](double h, int steps) {
        std::vector<double> x = sc.initial_state;
        x[4] += 0.003;  // off equilibrium so the trajectory moves
        for (int i = 0; i < steps; ++i) {
            x = rk4_step(f, x, i * h, h);
        }
        return x;
    };
    const auto coarse = integrate(1.0 / 5000.0, 5000);
    const auto fine = integrate(1.0 / 50000.0, 50000);
    for (size_t i = 0; i < coarse.size(); ++i) {
        const double scale = std::max(std::abs(fine[i]), 1e-6);
        CHECK(std::abs(coarse[i] - fine[i]) / scale <= 1e-6);
    }
}

TEST_CASE("noise stream statistics and determinism") {
    SUBCASE("zero sigma is identically zero") {
        NoiseGenerator g(7, 0.0, 100.0, 1000.0);
        for (int i = 0; i < 100; ++i) {
            CHECK(g.next() == 0.0);
        }
    }
    SUBCASE("seeded mean within 5 sigma / sqrt(n)") {
        const double sigma = 0.02;
        NoiseGenerator g(123, sigma, 100.0, 1000.0);
        const int n = 1000000;
        double acc = 0.0, acc2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double v = g.next();
            acc += v;
            acc2 += v * v;
        }
        const double mean = acc / n;
        CHECK(std::abs(mean) <= 5.0 * sigma / std::sqrt(static_cast<double>(n)));
        // renormalized low-pass keeps the stationary std at sigma
        const double sd = std::sqrt(acc2 / n - mean * mean);
        CHECK(sd == doctest::Approx(sigma).epsilon(0.05));
    }
    SUBCASE("identical seeds give bitwise-identical streams") {
        NoiseGenerator a(42, 0.1, 50.0, 1000.0), b(42, 0.1, 50.0, 1000.0);
        for (int i = 0; i < 1000; ++i) {
            CHECK(a.next() == b.next());
        }
    }
}

TEST_CASE("limiter clamps and zeroes inward velocity") {
    const StateLimiter lim{2, 0.0, 0.021, 1};
    SUBCASE("inside bounds is untouched") {
        std::vector<double> x{0.0, -0.4, 0.01, 0.0, 0.0};
        auto before = x;
        apply_limiter(x, lim);
        CHECK(x == before);
    }
    SUBCASE("inelastic stop at the lower bound") {
        std::vector<double> x{0.0, -0.4, -0.003, 0.0, 0.0};
        apply_limiter(x, lim);
        CHECK(x[2] == 0.0);
        CHECK(x[1] == 0.0);
    }
    SUBCASE("outward velocity is kept so the state can lift off") {
        std::vector<double> x{0.0, 0.25, -0.003, 0.0, 0.0};
        apply_limiter(x, lim);
        CHECK(x[2] == 0.0);
        CHECK(x[1] == 0.25);
    }
}

TEST_CASE("run: uncompensated second-order envelopes match the closed form") {
    SUBCASE("decaying, a = 2") {
        auto sc = scenario_second_order(2.0, 100.0, 2.0, false);
        const SimTrace trace = run(sc);
        CHECK_FALSE(trace.diverged);
        const auto env = envelope_from_events(trace);
        REQUIRE(env.size() > 8);
        // same-kind events are two apart; skip the coarse first pair
        for (size_t i = 2; i + 2 < std::min<size_t>(env.size(), 12); ++i) {
            const double ratio = env[i + 2].second / env[i].second;
            CHECK(ratio == doctest::Approx(std::exp(-0.2 * M_PI)).epsilon(0.02));
        }
    }
    SUBCASE("diverging, a = -1") {
        auto sc = scenario_second_order(-1.0, 100.0, 2.0, false);
        sc.sim.duration = 6.0;
        const SimTrace trace = run(sc);
        const auto env = envelope_from_events(trace);
        REQUIRE(env.size() > 8);
        for (size_t i = 2; i + 2 < std::min<size_t>(env.size(), 12); ++i) {
            const double ratio = env[i + 2].second / env[i].second;
            CHECK(ratio == doctest::Approx(std::exp(0.1 * M_PI)).epsilon(0.02));
        }
    }
    SUBCASE("zero initial state stays at the offset") {
        auto sc = scenario_second_order(2.0, 100.0, 0.0, false);
        const SimTrace trace = run(sc);
        for (double y : trace.y) {
            CHECK(std::abs(y) < 1e-12);
        }
        CHECK(trace.events.empty());
    }
}

TEST_CASE("run: determinism is bitwise") {
    for (const char* name : {"second-order", "fifth-order-sim"}) {
        const auto sc = [&] {
            auto s = build_scenario(name);
            s.sim.duration = 2.0;
            return s;
        }();
        const SimTrace a = run(sc);
        const SimTrace b = run(sc);
        CHECK(trace_to_csv(a) == trace_to_csv(b));
        CHECK(events_to_csv(a) == events_to_csv(b));
    }
}

TEST_CASE("run: trace shape and ZOH contract") {
    auto sc = scenario_second_order(2.0, 100.0, 2.0, true);
    sc.sim.duration = 3.0;
    const SimTrace trace = run(sc);
    CHECK(trace.size() == static_cast<size_t>(3.0 * sc.sim.fs) + 1);
    for (size_t i = 1; i < trace.size(); ++i) {
        CHECK(trace.t[i] - trace.t[i - 1] == doctest::Approx(1.0 / sc.sim.fs).epsilon(1e-12));
    }
    // u_hat changes only when an event fired at or before the sample
    size_t switches = 0;
    for (size_t i = 1; i < trace.size(); ++i) {
        if (trace.u_hat[i] != trace.u_hat[i - 1]) {
            ++switches;
        }
    }
    CHECK(switches == trace.events.size());
}

TEST_CASE("energy surrogate of an undriven damped oscillator never grows") {
    const double a = 2.0, b = 100.0;
    const DerivFn f = [&](double, const std::vector<double>& x) {
        return std::vector<double>{x[1], -b * x[0] - a * x[1]};
    };
    std::vector<double> x{2.0, 0.0};
    const double h = 1e-3;
    double prev = 0.5 * (x[1] * x[1] + b * x[0] * x[0]);
    for (int i = 0; i < 5000; ++i) {
        x = rk4_step(f, x, i * h, h);
        const double e = 0.5 * (x[1] * x[1] + b * x[0] * x[0]);
        CHECK(e <= prev * (1.0 + 1e-6));
        prev = e;
    }
}

TEST_CASE("run: divergence truncates with the flag set") {
    auto sc = scenario_second_order(-1.0, 100.0, 2.0, false);
    sc.sim.duration = 60.0;
    sc.sim.divergence_limit = 1e6;
    const SimTrace trace = run(sc);
    CHECK(trace.diverged);
    CHECK(trace.size() < static_cast<size_t>(60.0 * sc.sim.fs) + 1);
    CHECK(trace.diverged_at > 0.0);
}

TEST_CASE("csv round-trip formatting") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(-2.0) == "-2");
    const double v = 0.1 + 0.2;
    CHECK(std::stod(format_double(v)) == v);
    SimTrace t;
    t.t = {0.0};
    t.y = {1.0 / 3.0};
    t.y_noisy = {1.0 / 3.0};
    t.u = {0.0};
    t.u_hat = {0.0};
    t.v = {0.0};
    const std::string csv = trace_to_csv(t);
    CHECK(csv.substr(0, 22) == "t,y,y_noisy,u,u_hat,v\n");
    CHECK(csv.find("0.3333333333333333") != std::string::npos);
}

TEST_SUITE_END();
