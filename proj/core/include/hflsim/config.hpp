#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "hflsim/engine.hpp"

namespace hfl {

/// Thrown by the loaders; `details` holds one message per violation.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> details);
    const std::vector<std::string>& details() const { return details_; }

private:
    std::vector<std::string> details_;
};

// Experiment config file: a JSON document mirroring ExperimentConfig field
// names. Unknown keys are rejected; every field has a documented default, so
// the minimal valid file names only the dataset. See README for the schema.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text);

/// Resolved config (every default filled in) as a stable JSON document.
/// parse_config(config_to_json(cfg)) reproduces cfg exactly.
std::string config_to_json(const ExperimentConfig& cfg);

/// Protocol/policy combination under its reporting name: "fedcs",
/// "centralized", or "<data_policy>/<client_policy>" for Hybrid-FL variants
/// (e.g. "iid/min_cv", "max_throughput/max_client").
struct MethodSpec {
    Protocol protocol = Protocol::HybridFl;
    SelectionPolicy policy{ClientPolicy::MinCv, DataPolicy::Iid};
};

std::string method_name(const MethodSpec& method);
MethodSpec parse_method(const std::string& name);
void apply_method(ExperimentConfig& cfg, const MethodSpec& method);

enum class SweepAxis { Mu, Sigma, UploadRatio, Fluctuation };

std::string axis_name(SweepAxis axis);

/// One sweep: a base config, an axis with its values, and the methods to
/// compare at every point.
struct SweepSpec {
    ExperimentConfig base;
    SweepAxis axis = SweepAxis::Mu;
    std::vector<double> values;
    std::vector<MethodSpec> methods;
};

// Sweep file: {"base": <path or inline config object>, "axis": "mu" |
// "sigma" | "upload_ratio" | "fluctuation", "values": [...], "methods":
// [names...]}. Relative base paths resolve against the sweep file's
// directory.
SweepSpec load_sweep(const std::string& path);

/// The base config with the axis value and method applied.
ExperimentConfig at_sweep_point(const SweepSpec& sweep, double value, const MethodSpec& method);

/// True when the file holds a sweep document (has an "axis" key).
bool is_sweep_file(const std::string& path);

}  // namespace hfl
