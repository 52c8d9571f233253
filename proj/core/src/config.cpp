#include "hflsim/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace hfl {

using nlohmann::json;

namespace {

std::string join_details(const std::vector<std::string>& details) {
    std::string msg = "config error:";
    for (const auto& d : details) msg += "\n  - " + d;
    return msg;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> details)
    : std::runtime_error(join_details(details)), details_(std::move(details)) {}

namespace {

// Collects violations while walking the document, so one load reports every
// problem at once.
struct Parser {
    std::vector<std::string> errors;

    void fail(const std::string& msg) { errors.push_back(msg); }

    void check_keys(const json& obj, const std::string& scope,
                    std::initializer_list<const char*> allowed) {
        for (const auto& [key, value] : obj.items()) {
            bool known = false;
            for (const char* a : allowed)
                if (key == a) known = true;
            if (!known) fail(scope + ": unknown key '" + key + "'");
        }
    }

    template <typename T>
    void read(const json& obj, const char* key, T& out, const std::string& scope) {
        if (!obj.contains(key)) return;
        try {
            out = obj.at(key).get<T>();
        } catch (const json::exception&) {
            fail(scope + ": bad value for '" + key + "'");
        }
    }

    // accepts a number or the literal "inf"
    void read_sigma(const json& obj, const char* key, double& out, const std::string& scope) {
        if (!obj.contains(key)) return;
        const auto& v = obj.at(key);
        if (v.is_string()) {
            if (v.get<std::string>() == "inf") {
                out = std::numeric_limits<double>::infinity();
            } else {
                fail(scope + ": '" + key + "' must be a number or \"inf\"");
            }
            return;
        }
        read(obj, key, out, scope);
    }

    void read_enum(const json& obj, const char* key, const std::string& scope,
                   std::initializer_list<std::pair<const char*, int>> mapping, int& out) {
        if (!obj.contains(key)) return;
        if (!obj.at(key).is_string()) {
            fail(scope + ": '" + key + "' must be a string");
            return;
        }
        const auto name = obj.at(key).get<std::string>();
        for (const auto& [text, value] : mapping) {
            if (name == text) {
                out = value;
                return;
            }
        }
        fail(scope + ": unknown value '" + name + "' for '" + key + "'");
    }
};

void parse_dataset(Parser& p, const json& v, DatasetSpec& out) {
    if (v.is_string()) {
        out.path = v.get<std::string>();
        out.synthetic.reset();
        return;
    }
    if (!v.is_object()) {
        p.fail("dataset: must be a file path or a synthetic spec object");
        return;
    }
    p.check_keys(v, "dataset", {"seed", "feature_dim", "num_classes", "train_per_class",
                                "test_per_class", "separation", "noise"});
    SyntheticSpec spec;
    p.read(v, "seed", spec.seed, "dataset");
    p.read(v, "feature_dim", spec.feature_dim, "dataset");
    p.read(v, "num_classes", spec.num_classes, "dataset");
    p.read(v, "train_per_class", spec.train_per_class, "dataset");
    p.read(v, "test_per_class", spec.test_per_class, "dataset");
    p.read(v, "separation", spec.separation, "dataset");
    p.read(v, "noise", spec.noise, "dataset");
    out.path.clear();
    out.synthetic = spec;
}

ExperimentConfig parse_config_json(const json& doc, Parser& p) {
    ExperimentConfig cfg;
    if (!doc.is_object()) {
        p.fail("config: top-level document must be an object");
        return cfg;
    }
    p.check_keys(doc, "config",
                 {"dataset", "protocol", "client_policy", "data_policy", "cv_definition",
                  "num_clients", "participation", "upload_ratio", "round_deadline_s",
                  "final_deadline_min", "summary_window_min", "fluctuation", "distribution",
                  "shard_size_range", "capability_range_sps", "cell", "training", "model",
                  "hidden_units", "payload", "seeds", "trials"});

    if (doc.contains("dataset")) parse_dataset(p, doc.at("dataset"), cfg.dataset);
    else p.fail("config: 'dataset' is required");

    int protocol = static_cast<int>(cfg.protocol);
    p.read_enum(doc, "protocol", "config",
                {{"fedcs", 0}, {"hybrid_fl", 1}, {"centralized", 2}}, protocol);
    cfg.protocol = static_cast<Protocol>(protocol);

    int client_policy = static_cast<int>(cfg.policy.client);
    p.read_enum(doc, "client_policy", "config", {{"max_client", 0}, {"min_cv", 1}}, client_policy);
    cfg.policy.client = static_cast<ClientPolicy>(client_policy);

    int data_policy = static_cast<int>(cfg.policy.data);
    p.read_enum(doc, "data_policy", "config", {{"max_throughput", 0}, {"iid", 1}, {"none", 2}},
                data_policy);
    cfg.policy.data = static_cast<DataPolicy>(data_policy);

    // fedcs implies the fixed fedcs policy pair unless the file says otherwise
    if (cfg.protocol == Protocol::FedCs && !doc.contains("data_policy"))
        cfg.policy.data = DataPolicy::None;
    if (cfg.protocol == Protocol::FedCs && !doc.contains("client_policy"))
        cfg.policy.client = ClientPolicy::MaxClient;

    int cv_def = static_cast<int>(cfg.cv_definition);
    p.read_enum(doc, "cv_definition", "config",
                {{"variance_over_mean", 0}, {"std_over_mean", 1}}, cv_def);
    cfg.cv_definition = static_cast<CvDefinition>(cv_def);

    p.read(doc, "num_clients", cfg.num_clients, "config");
    p.read(doc, "participation", cfg.participation, "config");
    p.read(doc, "upload_ratio", cfg.upload_ratio, "config");
    p.read(doc, "round_deadline_s", cfg.round_deadline_s, "config");
    p.read(doc, "final_deadline_min", cfg.final_deadline_min, "config");
    p.read(doc, "summary_window_min", cfg.summary_window_min, "config");
    p.read(doc, "fluctuation", cfg.fluctuation, "config");
    p.read(doc, "trials", cfg.trials, "config");

    if (doc.contains("distribution")) {
        const auto& d = doc.at("distribution");
        p.check_keys(d, "distribution", {"mu", "sigma", "lower", "upper", "num_classes"});
        p.read(d, "mu", cfg.distribution.mu, "distribution");
        p.read_sigma(d, "sigma", cfg.distribution.sigma, "distribution");
        p.read(d, "lower", cfg.distribution.lower, "distribution");
        p.read(d, "upper", cfg.distribution.upper, "distribution");
        p.read(d, "num_classes", cfg.distribution.num_classes, "distribution");
    }

    if (doc.contains("shard_size_range")) {
        std::vector<int> range;
        p.read(doc, "shard_size_range", range, "config");
        if (range.size() == 2) cfg.shard_size_range = {range[0], range[1]};
        else p.fail("config: shard_size_range must be [min, max]");
    }
    if (doc.contains("capability_range_sps")) {
        std::vector<double> range;
        p.read(doc, "capability_range_sps", range, "config");
        if (range.size() == 2) cfg.capability_range_sps = {range[0], range[1]};
        else p.fail("config: capability_range_sps must be [min, max]");
    }

    if (doc.contains("cell")) {
        const auto& c = doc.at("cell");
        p.check_keys(c, "cell",
                     {"cell_radius_m", "carrier_freq_ghz", "bs_antenna_height_m",
                      "client_antenna_height_m", "tx_power_dbm", "antenna_gain_dbi",
                      "rb_bandwidth_hz", "capacity_loss", "spectral_cap",
                      "noise_density_dbm_per_hz", "noise_figure_db"});
        p.read(c, "cell_radius_m", cfg.cell.cell_radius_m, "cell");
        p.read(c, "carrier_freq_ghz", cfg.cell.carrier_freq_ghz, "cell");
        p.read(c, "bs_antenna_height_m", cfg.cell.bs_antenna_height_m, "cell");
        p.read(c, "client_antenna_height_m", cfg.cell.client_antenna_height_m, "cell");
        p.read(c, "tx_power_dbm", cfg.cell.tx_power_dbm, "cell");
        p.read(c, "antenna_gain_dbi", cfg.cell.antenna_gain_dbi, "cell");
        p.read(c, "rb_bandwidth_hz", cfg.cell.rb_bandwidth_hz, "cell");
        p.read(c, "capacity_loss", cfg.cell.capacity_loss, "cell");
        p.read(c, "spectral_cap", cfg.cell.spectral_cap, "cell");
        p.read(c, "noise_density_dbm_per_hz", cfg.cell.noise_density_dbm_per_hz, "cell");
        p.read(c, "noise_figure_db", cfg.cell.noise_figure_db, "cell");
    }

    if (doc.contains("training")) {
        const auto& t = doc.at("training");
        p.check_keys(t, "training", {"batch_size", "epochs_per_round", "initial_lr", "lr_decay"});
        p.read(t, "batch_size", cfg.training.batch_size, "training");
        p.read(t, "epochs_per_round", cfg.training.epochs_per_round, "training");
        p.read(t, "initial_lr", cfg.training.initial_lr, "training");
        p.read(t, "lr_decay", cfg.training.lr_decay, "training");
    }

    int model = static_cast<int>(cfg.model);
    p.read_enum(doc, "model", "config", {{"softmax", 0}, {"mlp", 1}}, model);
    cfg.model = static_cast<ModelKind>(model);
    p.read(doc, "hidden_units", cfg.hidden_units, "config");

    if (doc.contains("payload")) {
        const auto& pay = doc.at("payload");
        p.check_keys(pay, "payload", {"model_bytes", "data_item_bytes"});
        p.read(pay, "model_bytes", cfg.payload.model_bytes, "payload");
        p.read(pay, "data_item_bytes", cfg.payload.data_item_bytes, "payload");
    }

    if (doc.contains("seeds")) {
        const auto& s = doc.at("seeds");
        p.check_keys(s, "seeds", {"partition", "resources", "training", "fluctuation"});
        p.read(s, "partition", cfg.seeds.partition, "seeds");
        p.read(s, "resources", cfg.seeds.resources, "seeds");
        p.read(s, "training", cfg.seeds.training, "seeds");
        p.read(s, "fluctuation", cfg.seeds.fluctuation, "seeds");
    }
    return cfg;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"cannot open config file: " + path});
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError({std::string("malformed JSON in ") + path + ": " + e.what()});
    }
    return doc;
}

ExperimentConfig finish_parse(const json& doc) {
    Parser p;
    ExperimentConfig cfg = parse_config_json(doc, p);
    if (p.errors.empty()) {
        const auto invariants = validate(cfg);
        p.errors.insert(p.errors.end(), invariants.begin(), invariants.end());
    }
    if (!p.errors.empty()) throw ConfigError(p.errors);
    return cfg;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError({std::string("malformed JSON: ") + e.what()});
    }
    return finish_parse(doc);
}

ExperimentConfig load_config(const std::string& path) {
    return finish_parse(read_json_file(path));
}

std::string config_to_json(const ExperimentConfig& cfg) {
    json doc;
    if (cfg.dataset.synthetic) {
        const auto& s = *cfg.dataset.synthetic;
        doc["dataset"] = {{"seed", s.seed},
                          {"feature_dim", s.feature_dim},
                          {"num_classes", s.num_classes},
                          {"train_per_class", s.train_per_class},
                          {"test_per_class", s.test_per_class},
                          {"separation", s.separation},
                          {"noise", s.noise}};
    } else {
        doc["dataset"] = cfg.dataset.path;
    }
    const char* protocols[] = {"fedcs", "hybrid_fl", "centralized"};
    const char* client_policies[] = {"max_client", "min_cv"};
    const char* data_policies[] = {"max_throughput", "iid", "none"};
    doc["protocol"] = protocols[static_cast<int>(cfg.protocol)];
    doc["client_policy"] = client_policies[static_cast<int>(cfg.policy.client)];
    doc["data_policy"] = data_policies[static_cast<int>(cfg.policy.data)];
    doc["cv_definition"] =
        cfg.cv_definition == CvDefinition::VarianceOverMean ? "variance_over_mean" : "std_over_mean";
    doc["num_clients"] = cfg.num_clients;
    doc["participation"] = cfg.participation;
    doc["upload_ratio"] = cfg.upload_ratio;
    doc["round_deadline_s"] = cfg.round_deadline_s;
    doc["final_deadline_min"] = cfg.final_deadline_min;
    doc["summary_window_min"] = cfg.summary_window_min;
    doc["fluctuation"] = cfg.fluctuation;
    if (std::isinf(cfg.distribution.sigma)) {
        doc["distribution"] = {{"mu", cfg.distribution.mu},
                               {"sigma", "inf"},
                               {"lower", cfg.distribution.lower},
                               {"upper", cfg.distribution.upper},
                               {"num_classes", cfg.distribution.num_classes}};
    } else {
        doc["distribution"] = {{"mu", cfg.distribution.mu},
                               {"sigma", cfg.distribution.sigma},
                               {"lower", cfg.distribution.lower},
                               {"upper", cfg.distribution.upper},
                               {"num_classes", cfg.distribution.num_classes}};
    }
    doc["shard_size_range"] = {cfg.shard_size_range.first, cfg.shard_size_range.second};
    doc["capability_range_sps"] = {cfg.capability_range_sps.first, cfg.capability_range_sps.second};
    doc["cell"] = {{"cell_radius_m", cfg.cell.cell_radius_m},
                   {"carrier_freq_ghz", cfg.cell.carrier_freq_ghz},
                   {"bs_antenna_height_m", cfg.cell.bs_antenna_height_m},
                   {"client_antenna_height_m", cfg.cell.client_antenna_height_m},
                   {"tx_power_dbm", cfg.cell.tx_power_dbm},
                   {"antenna_gain_dbi", cfg.cell.antenna_gain_dbi},
                   {"rb_bandwidth_hz", cfg.cell.rb_bandwidth_hz},
                   {"capacity_loss", cfg.cell.capacity_loss},
                   {"spectral_cap", cfg.cell.spectral_cap},
                   {"noise_density_dbm_per_hz", cfg.cell.noise_density_dbm_per_hz},
                   {"noise_figure_db", cfg.cell.noise_figure_db}};
    doc["training"] = {{"batch_size", cfg.training.batch_size},
                       {"epochs_per_round", cfg.training.epochs_per_round},
                       {"initial_lr", cfg.training.initial_lr},
                       {"lr_decay", cfg.training.lr_decay}};
    doc["model"] = cfg.model == ModelKind::Softmax ? "softmax" : "mlp";
    doc["hidden_units"] = cfg.hidden_units;
    doc["payload"] = {{"model_bytes", cfg.payload.model_bytes},
                      {"data_item_bytes", cfg.payload.data_item_bytes}};
    doc["seeds"] = {{"partition", cfg.seeds.partition},
                    {"resources", cfg.seeds.resources},
                    {"training", cfg.seeds.training},
                    {"fluctuation", cfg.seeds.fluctuation}};
    doc["trials"] = cfg.trials;
    return doc.dump(2) + "\n";
}

std::string method_name(const MethodSpec& method) {
    if (method.protocol == Protocol::FedCs) return "fedcs";
    if (method.protocol == Protocol::Centralized) return "centralized";
    const std::string data =
        method.policy.data == DataPolicy::MaxThroughput ? "max_throughput" : "iid";
    const std::string client =
        method.policy.client == ClientPolicy::MaxClient ? "max_client" : "min_cv";
    return data + "/" + client;
}

MethodSpec parse_method(const std::string& name) {
    if (name == "fedcs")
        return {Protocol::FedCs, {ClientPolicy::MaxClient, DataPolicy::None}};
    if (name == "centralized")
        return {Protocol::Centralized, {ClientPolicy::MaxClient, DataPolicy::Iid}};
    const auto slash = name.find('/');
    if (slash != std::string::npos) {
        const std::string data = name.substr(0, slash);
        const std::string client = name.substr(slash + 1);
        MethodSpec method;
        method.protocol = Protocol::HybridFl;
        if (data == "iid") method.policy.data = DataPolicy::Iid;
        else if (data == "max_throughput") method.policy.data = DataPolicy::MaxThroughput;
        else throw ConfigError({"unknown data policy in method '" + name + "'"});
        if (client == "min_cv") method.policy.client = ClientPolicy::MinCv;
        else if (client == "max_client") method.policy.client = ClientPolicy::MaxClient;
        else throw ConfigError({"unknown client policy in method '" + name + "'"});
        return method;
    }
    throw ConfigError({"unknown method '" + name +
                       "' (expected fedcs, centralized, or <data_policy>/<client_policy>)"});
}

void apply_method(ExperimentConfig& cfg, const MethodSpec& method) {
    cfg.protocol = method.protocol;
    cfg.policy = method.policy;
}

std::string axis_name(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::Mu: return "mu";
        case SweepAxis::Sigma: return "sigma";
        case SweepAxis::UploadRatio: return "upload_ratio";
        case SweepAxis::Fluctuation: return "fluctuation";
    }
    return "?";
}

SweepSpec load_sweep(const std::string& path) {
    const json doc = read_json_file(path);
    Parser p;
    SweepSpec sweep;
    if (!doc.is_object()) throw ConfigError({"sweep: top-level document must be an object"});
    p.check_keys(doc, "sweep", {"base", "axis", "values", "methods"});

    if (!doc.contains("base")) {
        p.fail("sweep: 'base' is required");
    } else if (doc.at("base").is_string()) {
        auto base_path = std::filesystem::path(doc.at("base").get<std::string>());
        if (base_path.is_relative())
            base_path = std::filesystem::path(path).parent_path() / base_path;
        sweep.base = load_config(base_path.string());
    } else {
        sweep.base = finish_parse(doc.at("base"));
    }

    int axis = 0;
    p.read_enum(doc, "axis", "sweep",
                {{"mu", 0}, {"sigma", 1}, {"upload_ratio", 2}, {"fluctuation", 3}}, axis);
    sweep.axis = static_cast<SweepAxis>(axis);
    if (!doc.contains("axis")) p.fail("sweep: 'axis' is required");

    if (doc.contains("values")) {
        const auto& values = doc.at("values");
        if (!values.is_array() || values.empty()) {
            p.fail("sweep: 'values' must be a nonempty array");
        } else {
            for (const auto& v : values) {
                if (v.is_string() && v.get<std::string>() == "inf")
                    sweep.values.push_back(std::numeric_limits<double>::infinity());
                else if (v.is_number())
                    sweep.values.push_back(v.get<double>());
                else
                    p.fail("sweep: values must be numbers (or \"inf\" on the sigma axis)");
            }
        }
    } else {
        p.fail("sweep: 'values' is required");
    }

    if (doc.contains("methods")) {
        const auto& methods = doc.at("methods");
        if (!methods.is_array() || methods.empty()) {
            p.fail("sweep: 'methods' must be a nonempty array");
        } else {
            for (const auto& m : methods) {
                if (!m.is_string()) {
                    p.fail("sweep: methods must be strings");
                    continue;
                }
                try {
                    sweep.methods.push_back(parse_method(m.get<std::string>()));
                } catch (const ConfigError& e) {
                    p.errors.insert(p.errors.end(), e.details().begin(), e.details().end());
                }
            }
        }
    } else {
        p.fail("sweep: 'methods' is required");
    }

    if (!p.errors.empty()) throw ConfigError(p.errors);

    // every (value, method) point must itself be a valid config
    for (const double v : sweep.values) {
        for (const auto& m : sweep.methods) {
            const auto cfg = at_sweep_point(sweep, v, m);
            const auto errors = validate(cfg);
            if (!errors.empty()) {
                std::vector<std::string> scoped;
                scoped.reserve(errors.size());
                for (const auto& e : errors)
                    scoped.push_back("sweep point " + axis_name(sweep.axis) + "=" +
                                     std::to_string(v) + ", " + method_name(m) + ": " + e);
                throw ConfigError(scoped);
            }
        }
    }
    return sweep;
}

ExperimentConfig at_sweep_point(const SweepSpec& sweep, double value, const MethodSpec& method) {
    ExperimentConfig cfg = sweep.base;
    switch (sweep.axis) {
        case SweepAxis::Mu: cfg.distribution.mu = value; break;
        case SweepAxis::Sigma: cfg.distribution.sigma = value; break;
        case SweepAxis::UploadRatio: cfg.upload_ratio = value; break;
        case SweepAxis::Fluctuation: cfg.fluctuation = value; break;
    }
    apply_method(cfg, method);
    return cfg;
}

bool is_sweep_file(const std::string& path) {
    const json doc = read_json_file(path);
    return doc.is_object() && doc.contains("axis");
}

}  // namespace hfl
