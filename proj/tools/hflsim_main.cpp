#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hflsim/config.hpp"
#include "hflsim/trace.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    int trials = 0;       // 0: keep the config's value
    long long seed = -1;  // <0: keep the config's seeds
    int workers = 1;
    bool dry_run = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool needs_out) {
    cmd->add_option("--config", opts.config_path, "Experiment or sweep config file")->required();
    auto* out = cmd->add_option("--out", opts.out_dir, "Output directory");
    if (needs_out) out->required();
    cmd->add_option("--trials", opts.trials, "Override the config's trial count");
    cmd->add_option("--seed", opts.seed, "Derive all four seed families from this value");
    cmd->add_option("--workers", opts.workers, "Worker threads (HFLSIM_WORKERS overrides)");
    cmd->add_flag("--dry-run", opts.dry_run, "Print the resolved plan without running or writing");
}

int effective_workers(int from_flag) {
    if (const char* env = std::getenv("HFLSIM_WORKERS")) {
        try {
            return std::max(1, std::stoi(env));
        } catch (...) {
            std::cerr << "hflsim: ignoring non-numeric HFLSIM_WORKERS\n";
        }
    }
    return std::max(1, from_flag);
}

void apply_overrides(hfl::ExperimentConfig& cfg, const CommonOpts& opts) {
    if (opts.trials > 0) cfg.trials = opts.trials;
    if (opts.seed >= 0) {
        const auto s = static_cast<std::uint64_t>(opts.seed);
        cfg.seeds = {hfl::derive_seed(s, 1), hfl::derive_seed(s, 2), hfl::derive_seed(s, 3),
                     hfl::derive_seed(s, 4)};
    }
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

template <typename Fn>
void write_stream(const fs::path& path, Fn&& fn) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    fn(out);
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_run_outputs(const fs::path& dir, const hfl::ExperimentConfig& cfg,
                       const hfl::ExperimentResult& result, const std::string& method) {
    fs::create_directories(dir);
    const std::string resolved = hfl::config_to_json(cfg);
    const std::uint64_t print = hfl::fingerprint(resolved);
    write_file(dir / "config.resolved.json", resolved);
    write_stream(dir / "trace.csv",
                 [&](std::ostream& out) { hfl::write_trace_csv(out, result, method, print); });
    write_stream(dir / "trials.csv",
                 [&](std::ostream& out) { hfl::write_trials_csv(out, result, print); });
    write_stream(dir / "summary.json", [&](std::ostream& out) {
        hfl::write_summary_json(out, result, method, resolved);
    });
}

std::string current_method_name(const hfl::ExperimentConfig& cfg) {
    return hfl::method_name({cfg.protocol, cfg.policy});
}

int cmd_run(const CommonOpts& opts) {
    auto cfg = hfl::load_config(opts.config_path);
    apply_overrides(cfg, opts);
    if (const auto errors = hfl::validate(cfg); !errors.empty()) throw hfl::ConfigError(errors);

    if (opts.dry_run) {
        std::cout << "plan: run " << current_method_name(cfg) << ", " << cfg.trials
                  << " trial(s), workers=" << effective_workers(opts.workers) << "\n"
                  << "outputs: " << opts.out_dir
                  << "/{config.resolved.json,trace.csv,trials.csv,summary.json}\n"
                  << hfl::config_to_json(cfg);
        return 0;
    }

    const auto data = hfl::load_experiment_dataset(cfg);
    const auto result = hfl::run_experiment(cfg, data, effective_workers(opts.workers));
    write_run_outputs(opts.out_dir, cfg, result, current_method_name(cfg));
    std::cout << "run " << current_method_name(cfg) << ": mean last-window accuracy "
              << hfl::format_double(result.mean_window_accuracy) << " +- "
              << hfl::format_double(result.std_window_accuracy) << " over " << cfg.trials
              << " trial(s)\n";
    return 0;
}

std::string point_dir_name(const std::string& axis, double value, const std::string& method) {
    std::string m = method;
    for (auto& c : m)
        if (c == '/') c = '+';
    return axis + "=" + hfl::format_double(value) + "_" + m;
}

int cmd_sweep(const CommonOpts& opts) {
    auto sweep = hfl::load_sweep(opts.config_path);
    if (opts.trials > 0) sweep.base.trials = opts.trials;
    if (opts.seed >= 0) {
        const auto s = static_cast<std::uint64_t>(opts.seed);
        sweep.base.seeds = {hfl::derive_seed(s, 1), hfl::derive_seed(s, 2), hfl::derive_seed(s, 3),
                            hfl::derive_seed(s, 4)};
    }

    const std::string axis = hfl::axis_name(sweep.axis);
    if (opts.dry_run) {
        std::cout << "plan: sweep " << axis << " over " << sweep.values.size() << " value(s) x "
                  << sweep.methods.size() << " method(s), " << sweep.base.trials
                  << " trial(s) each, workers=" << effective_workers(opts.workers) << "\n";
        for (const double v : sweep.values)
            for (const auto& m : sweep.methods)
                std::cout << "  " << axis << "=" << hfl::format_double(v) << " "
                          << hfl::method_name(m) << "\n";
        std::cout << "base config:\n" << hfl::config_to_json(sweep.base);
        return 0;
    }

    const fs::path out_dir(opts.out_dir);
    fs::create_directories(out_dir);
    // Sweep points share one dataset; the sweep axes never change it.
    const auto data = hfl::load_experiment_dataset(sweep.base);

    std::vector<hfl::SweepRow> rows;
    const int workers = effective_workers(opts.workers);
    for (const double value : sweep.values) {
        for (const auto& method : sweep.methods) {
            const auto cfg = hfl::at_sweep_point(sweep, value, method);
            const auto result = hfl::run_experiment(cfg, data, workers);
            const std::string name = hfl::method_name(method);
            write_run_outputs(out_dir / "points" / point_dir_name(axis, value, name), cfg, result,
                              name);
            rows.push_back({value, name, result.mean_window_accuracy, result.std_window_accuracy,
                            cfg.trials});
            std::cout << axis << "=" << hfl::format_double(value) << " " << name << ": "
                      << hfl::format_double(result.mean_window_accuracy) << " +- "
                      << hfl::format_double(result.std_window_accuracy) << "\n";
        }
    }

    const std::string resolved_base = hfl::config_to_json(sweep.base);
    write_file(out_dir / "base.resolved.json", resolved_base);
    write_stream(out_dir / "summary.csv", [&](std::ostream& out) {
        hfl::write_sweep_csv(out, axis, rows, hfl::fingerprint(resolved_base));
    });
    return 0;
}

int cmd_validate(const std::string& config_path) {
    if (hfl::is_sweep_file(config_path)) {
        const auto sweep = hfl::load_sweep(config_path);
        std::cout << "valid sweep: axis " << hfl::axis_name(sweep.axis) << ", "
                  << sweep.values.size() << " value(s), " << sweep.methods.size()
                  << " method(s)\nbase config:\n"
                  << hfl::config_to_json(sweep.base);
        return 0;
    }
    const auto cfg = hfl::load_config(config_path);
    std::cout << hfl::config_to_json(cfg);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid federated learning simulator for a cellular MEC cell"};
    app.require_subcommand(1);

    CommonOpts run_opts;
    auto* run_cmd = app.add_subcommand("run", "Run one experiment config");
    add_common(run_cmd, run_opts, true);

    CommonOpts sweep_opts;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run a parameter sweep");
    add_common(sweep_cmd, sweep_opts, true);

    std::string validate_path;
    auto* validate_cmd = app.add_subcommand("validate", "Validate a config and print it resolved");
    validate_cmd->add_option("--config", validate_path, "Config file to validate")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) return cmd_run(run_opts);
        if (sweep_cmd->parsed()) return cmd_sweep(sweep_opts);
        if (validate_cmd->parsed()) return cmd_validate(validate_path);
    } catch (const hfl::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "hflsim: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
