#include "oscomp/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "oscomp/compensator.hpp"
#include "oscomp/metrics.hpp"
#include "oscomp/scenarios.hpp"
#include "oscomp/simkernel.hpp"

namespace oscomp::cli {

namespace fs = std::filesystem;

namespace {

void write_atomic(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) {
            throw std::runtime_error("cannot open " + tmp.string());
        }
        f << content;
    }
    fs::rename(tmp, path);
}

struct RunSettings {
    std::string scenario;
    std::string config_file;        // load the scenario from a file instead
    std::string dump_config;        // write the resolved config here before running
    std::vector<std::string> sets;  // key=value, bare builder params or dotted paths
    std::string out_dir = ".";
    std::string tag;  // suffix for output file names
    std::optional<std::uint64_t> seed;
    std::optional<double> duration;
    std::optional<double> fs_hz;
    bool no_compensator = false;
    double report_omega = 0.0;     // 0 = detector omega_max / 3
    double settle_fraction = 0.1;  // settling threshold as a fraction of the peak envelope
};

std::pair<std::string, std::string> split_kv(const std::string& s) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw std::invalid_argument("--set expects key=value, got '" + s + "'");
    }
    return {s.substr(0, eq), s.substr(eq + 1)};
}

ScenarioConfig resolve_scenario(const RunSettings& rs, nlohmann::json* provenance) {
    ScenarioConfig sc;
    std::vector<std::pair<std::string, std::string>> overrides;
    if (rs.config_file.empty() && rs.scenario.empty()) {
        throw std::invalid_argument("run needs a scenario name or --config FILE");
    }
    if (!rs.config_file.empty()) {
        std::ifstream f(rs.config_file);
        if (!f) {
            throw std::invalid_argument("cannot open config file '" + rs.config_file + "'");
        }
        sc = ScenarioConfig::from_json(nlohmann::json::parse(f));
        for (const auto& s : rs.sets) {
            overrides.push_back(split_kv(s));
        }
    } else {
        std::map<std::string, std::string> params;
        const auto builder_params = scenario_param_names(rs.scenario);
        for (const auto& s : rs.sets) {
            auto [key, value] = split_kv(s);
            if (key.find('.') == std::string::npos &&
                std::find(builder_params.begin(), builder_params.end(), key) != builder_params.end()) {
                params[key] = value;
            } else {
                overrides.emplace_back(key, value);
            }
        }
        sc = build_scenario(rs.scenario, params);
    }
    for (const auto& [key, value] : overrides) {
        sc = ScenarioConfig::with_override(sc, key, value);
    }
    if (rs.no_compensator) {
        // compensator off and the input saturation lifted so the unstable
        // loop actually diverges instead of railing
        sc = ScenarioConfig::with_override(sc, "compensator.enabled", "false");
        sc = ScenarioConfig::with_override(sc, "input_limits", "null");
        sc = ScenarioConfig::with_override(sc, "outer.v_limits", "null");
    }
    if (rs.seed) sc.sim.seed = *rs.seed;
    if (rs.duration) sc.sim.duration = *rs.duration;
    if (rs.fs_hz) sc.sim.fs = *rs.fs_hz;
    if (provenance) {
        nlohmann::json ov = nlohmann::json::object();
        for (const auto& s : rs.sets) {
            auto [key, value] = split_kv(s);
            ov[key] = value;
        }
        (*provenance)["scenario_name"] = rs.scenario;
        (*provenance)["overrides"] = ov;
        (*provenance)["no_compensator"] = rs.no_compensator;
        (*provenance)["seed"] = sc.sim.seed;
    }
    return sc;
}

int do_run(const RunSettings& rs, std::ostream& out, std::ostream& err) {
    ScenarioConfig sc;
    nlohmann::json prov;
    try {
        sc = resolve_scenario(rs, &prov);
        sc.validate();
        if (!rs.dump_config.empty()) {
            write_atomic(rs.dump_config, sc.to_json().dump(2) + "\n");
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }

    const SimTrace trace = oscomp::run(sc);

    const double omega = rs.report_omega > 0.0 ? rs.report_omega : sc.detector.omega_max / 3.0;
    auto env = envelope_from_events(trace);
    double peak = 0.0;
    for (const auto& [t, a] : env) {
        peak = std::max(peak, a);
    }
    MetricsReport rep;
    if (peak > 0.0) {
        rep = analyze(trace, omega, sc.sim.fs, rs.settle_fraction * peak);
    } else {
        rep = communication_effort(trace, omega, sc.sim.fs);
    }

    nlohmann::json meta = nlohmann::json::parse(rep.to_json_string());
    meta["scenario"] = sc.to_json();
    meta["provenance"] = prov;
    meta["diverged"] = trace.diverged;
    if (trace.diverged) {
        meta["diverged_at"] = trace.diverged_at;
    }

    const std::string stem = sc.name + (rs.tag.empty() ? "" : "_" + rs.tag);
    const fs::path dir(rs.out_dir);
    write_atomic(dir / (stem + "_trace.csv"), trace_to_csv(trace));
    write_atomic(dir / (stem + "_events.csv"), events_to_csv(trace));
    write_atomic(dir / (stem + "_metrics.json"), meta.dump(2) + "\n");

    out << stem << ": " << trace.size() << " samples, " << trace.events.size() << " events";
    if (trace.diverged) {
        out << ", diverged at t=" << format_double(trace.diverged_at) << " (trace truncated)";
    }
    out << "\n";
    return trace.diverged ? 2 : 0;
}

int do_sweep(const RunSettings& rs, const std::vector<std::string>& sweeps, int jobs,
             std::ostream& out, std::ostream& err) {
    // cartesian product of the sweep axes
    std::vector<std::pair<std::string, std::vector<std::string>>> axes;
    for (const auto& s : sweeps) {
        auto [key, csv] = split_kv(s);
        std::vector<std::string> values;
        std::istringstream is(csv);
        std::string item;
        while (std::getline(is, item, ',')) {
            values.push_back(item);
        }
        if (values.empty()) {
            err << "error: --sweep " << s << " has no values\n";
            return 1;
        }
        axes.emplace_back(key, values);
    }
    if (axes.empty()) {
        err << "error: sweep needs at least one --sweep key=v1,v2\n";
        return 1;
    }
    std::vector<RunSettings> runs;
    std::vector<size_t> idx(axes.size(), 0);
    while (true) {
        RunSettings one = rs;
        std::string tag;
        for (size_t i = 0; i < axes.size(); ++i) {
            const auto& [key, values] = axes[i];
            one.sets.push_back(key + "=" + values[idx[i]]);
            std::string clean = key + "-" + values[idx[i]];
            std::replace(clean.begin(), clean.end(), '.', '_');
            tag += (tag.empty() ? "" : "__") + clean;
        }
        one.tag = tag;
        runs.push_back(std::move(one));
        size_t k = 0;
        while (k < axes.size() && ++idx[k] == axes[k].second.size()) {
            idx[k++] = 0;
        }
        if (k == axes.size()) {
            break;
        }
    }
    // validate everything up front so config errors abort before any run
    for (const auto& one : runs) {
        try {
            resolve_scenario(one, nullptr).validate();
        } catch (const std::exception& e) {
            err << "error: " << e.what() << "\n";
            return 1;
        }
    }
    if (jobs < 1) {
        jobs = static_cast<int>(std::thread::hardware_concurrency());
        if (jobs < 1) jobs = 1;
    }
    std::vector<std::string> lines(runs.size());
    std::atomic<size_t> next{0};
    std::vector<std::future<void>> workers;
    for (int w = 0; w < jobs; ++w) {
        workers.push_back(std::async(std::launch::async, [&] {
            for (size_t i = next.fetch_add(1); i < runs.size(); i = next.fetch_add(1)) {
                std::ostringstream o, e;
                const int rc = do_run(runs[i], o, e);
                lines[i] = o.str() + e.str() +
                           (rc == 2 ? "  [diverged]\n" : rc != 0 ? "  [error]\n" : "");
            }
        }));
    }
    for (auto& w : workers) {
        w.get();
    }
    for (const auto& line : lines) {
        out << line;
    }
    out << runs.size() << " runs written to " << rs.out_dir << "\n";
    return 0;
}

}  // namespace

int cmd_check(double perturb_gain, std::ostream& out) {
    bool all_ok = true;
    const auto report = [&](const std::string& name, bool ok, double residual) {
        out << "CHECK " << name << ": " << (ok ? "PASS" : "FAIL")
            << " (residual=" << format_double(residual) << ")\n";
        all_ok = all_ok && ok;
    };

    const double k = optimal_gain() + perturb_gain;

    // gain constant: 2 pi K / sqrt(3) == 1
    {
        const double r = std::abs(2.0 * M_PI * k / std::sqrt(3.0) - 1.0);
        report("gain-identity", r < 1e-12, r);
    }
    // energy balance of Eq-type oscillation vs constant input, random (A, w)
    {
        std::mt19937_64 rng(2024);
        std::uniform_real_distribution<double> amp_d(0.1, 10.0), w_d(1.0, 100.0);
        double worst = 0.0;
        for (int i = 0; i < 20; ++i) {
            const double a = amp_d(rng), w = w_d(rng);
            const double u = k * w * w * a;
            const double res = std::abs(energy_balance_residual(a, w, u)) / (M_PI * a * a * w);
            worst = std::max(worst, res);
        }
        report("energy-balance", worst < 1e-9, worst);
    }
    // detector on a clean sinusoid
    {
        DetectorConfig dc;
        dc.window_n = 30;
        dc.fs = 1000.0;
        dc.omega_max = 30.0;
        dc.psi = [](double) { return 0.0; };
        Detector det(dc, 0.0);
        double worst_w = 0.0, worst_a = 0.0;
        int count = 0;
        for (long n = 1; n <= 3000; ++n) {
            if (auto ev = det.step(std::sin(10.0 * n / dc.fs), n)) {
                ++count;
                if (count >= 3) {
                    worst_w = std::max(worst_w, std::abs(ev->omega_est - 10.0) / 10.0);
                    worst_a = std::max(worst_a, std::abs(std::abs(ev->amp_signed) - 1.0));
                }
            }
        }
        report("detector-frequency", count >= 4 && worst_w <= 0.02, worst_w);
        report("detector-amplitude", count >= 4 && worst_a <= 0.01, worst_a);
    }
    return all_ok ? 0 : 1;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Event-triggered adaptive compensation of oscillatory outputs"};
    app.require_subcommand(1);

    auto* list = app.add_subcommand("list", "List built-in scenarios");

    RunSettings rs;
    std::vector<std::string> sweeps;
    int jobs = 0;
    double perturb = 0.0;

    const auto add_run_options = [&](CLI::App* cmd, bool allow_config_file) {
        auto* pos = cmd->add_option("scenario", rs.scenario, "Scenario name (see `list`)");
        if (allow_config_file) {
            auto* cf = cmd->add_option("--config", rs.config_file,
                                       "Load the scenario from a config file instead of a name");
            pos->excludes(cf);
            cmd->add_option("--dump-config", rs.dump_config,
                            "Write the resolved scenario config to this path");
        } else {
            pos->required();
        }
        cmd->add_option("--set", rs.sets, "Override: builder param or dotted config path, key=value");
        cmd->add_option("--out", rs.out_dir, "Output directory");
        cmd->add_option("--seed", rs.seed, "Simulation seed");
        cmd->add_option("--duration", rs.duration, "Run duration [s]");
        cmd->add_option("--fs", rs.fs_hz, "Sampling rate [Hz]");
        cmd->add_flag("--no-compensator", rs.no_compensator,
                      "Disable the compensator and lift the input saturation (divergence study)");
        cmd->add_option("--report-omega", rs.report_omega,
                        "Frequency for the communication-effort baseline [rad/s]");
        cmd->add_option("--settle-threshold", rs.settle_fraction,
                        "Settling threshold as a fraction of the peak envelope");
    };

    auto* runc = app.add_subcommand("run", "Run one scenario, write trace/events/metrics");
    add_run_options(runc, true);

    auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep in parallel");
    add_run_options(sweep, false);
    sweep->add_option("--sweep", sweeps, "Axis: key=v1,v2,... (repeatable, cartesian product)")
        ->required();
    sweep->add_option("--jobs", jobs, "Worker count (default: hardware concurrency)");

    auto* check = app.add_subcommand("check", "Run the embedded verification suite");
    check->add_option("--perturb-gain", perturb, "Test hook: offset added to the gain constant");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        err << "error: " << e.get_name() << ": " << e.what() << "\n";
        return 1;
    }

    try {
        if (list->parsed()) {
            for (const auto& name : scenario_names()) {
                out << name << "  -  " << scenario_description(name) << "\n";
            }
            return 0;
        }
        if (runc->parsed()) {
            return do_run(rs, out, err);
        }
        if (sweep->parsed()) {
            return do_sweep(rs, sweeps, jobs, out, err);
        }
        if (check->parsed()) {
            return cmd_check(perturb, out);
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace oscomp::cli
