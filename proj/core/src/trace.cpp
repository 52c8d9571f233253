#include "hflsim/trace.hpp"

#include <cmath>
#include <cstdio>

#include <json.hpp>

namespace hfl {

std::uint64_t fingerprint(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

namespace {

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string join_ints(const std::vector<int>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ';';
        out += std::to_string(values[i]);
    }
    return out;
}

std::string join_counts(const std::vector<long long>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ';';
        out += std::to_string(values[i]);
    }
    return out;
}

std::string join_manifest(const std::vector<ManifestEntry>& manifest) {
    std::string out;
    for (std::size_t i = 0; i < manifest.size(); ++i) {
        if (i) out += '|';
        out += std::to_string(manifest[i].client_id) + ':' +
               std::to_string(manifest[i].class_label) + ':' +
               std::to_string(manifest[i].item_count);
    }
    return out;
}

}  // namespace

void write_trace_csv(std::ostream& out, const ExperimentResult& result,
                     const std::string& method, std::uint64_t config_fingerprint) {
    out << "# hflsim trace schema=" << kTraceSchemaVersion
        << " config=" << hex64(config_fingerprint) << "\n";
    out << "schema_version,trial,round,method,clock_start_s,clock_end_s,estimated_finish_s,"
           "actual_duration_s,upload_window_s,num_candidates,num_selected,selected_clients,"
           "manifest,manifest_items,manifest_bytes,server_items,server_class_counts,"
           "cumulative_cv,accuracy\n";
    for (const auto& trial : result.trials) {
        for (const auto& rec : trial.records) {
            long long server_items = 0;
            for (const long long c : rec.server_class_counts) server_items += c;
            out << kTraceSchemaVersion << ',' << trial.trial << ',' << rec.round << ',' << method
                << ',' << format_double(rec.clock_start_s) << ',' << format_double(rec.clock_end_s)
                << ',' << format_double(rec.estimated_finish_s) << ','
                << format_double(rec.actual_duration_s) << ','
                << format_double(rec.upload_window_s) << ',' << rec.num_candidates << ','
                << rec.selected_clients.size() << ',' << join_ints(rec.selected_clients) << ','
                << join_manifest(rec.manifest) << ',' << rec.manifest_items << ','
                << rec.manifest_bytes << ',' << server_items << ','
                << join_counts(rec.server_class_counts) << ','
                << format_double(rec.cumulative_cv) << ',' << format_double(rec.accuracy) << '\n';
        }
    }
}

void write_trials_csv(std::ostream& out, const ExperimentResult& result,
                      std::uint64_t config_fingerprint) {
    out << "# hflsim trials schema=" << kTraceSchemaVersion
        << " config=" << hex64(config_fingerprint) << "\n";
    out << "schema_version,trial,seed_partition,seed_resources,seed_training,seed_fluctuation,"
           "rounds,server_items,final_accuracy,window_accuracy\n";
    for (const auto& trial : result.trials) {
        out << kTraceSchemaVersion << ',' << trial.trial << ',' << trial.seeds.partition << ','
            << trial.seeds.resources << ',' << trial.seeds.training << ','
            << trial.seeds.fluctuation << ',' << trial.records.size() << ','
            << trial.server_items << ',' << format_double(trial.final_accuracy) << ','
            << format_double(trial.window_accuracy) << '\n';
    }
}

void write_summary_json(std::ostream& out, const ExperimentResult& result,
                        const std::string& method, const std::string& resolved_config) {
    nlohmann::json doc;
    doc["schema_version"] = kTraceSchemaVersion;
    doc["method"] = method;
    doc["mean_window_accuracy"] = result.mean_window_accuracy;
    doc["std_window_accuracy"] = result.std_window_accuracy;
    auto& trials = doc["trials"] = nlohmann::json::array();
    for (const auto& trial : result.trials) {
        trials.push_back({{"trial", trial.trial},
                          {"rounds", trial.records.size()},
                          {"server_items", trial.server_items},
                          {"final_accuracy", trial.final_accuracy},
                          {"window_accuracy", trial.window_accuracy},
                          {"seeds",
                           {{"partition", trial.seeds.partition},
                            {"resources", trial.seeds.resources},
                            {"training", trial.seeds.training},
                            {"fluctuation", trial.seeds.fluctuation}}}});
    }
    doc["config"] = nlohmann::json::parse(resolved_config);
    out << doc.dump(2) << "\n";
}

void write_sweep_csv(std::ostream& out, const std::string& axis,
                     const std::vector<SweepRow>& rows, std::uint64_t config_fingerprint) {
    out << "# hflsim sweep schema=" << kTraceSchemaVersion
        << " config=" << hex64(config_fingerprint) << "\n";
    out << "schema_version," << axis << ",method,mean_acc,std_acc,trials\n";
    for (const auto& row : rows) {
        out << kTraceSchemaVersion << ',' << format_double(row.value) << ',' << row.method << ','
            << format_double(row.mean_acc) << ',' << format_double(row.std_acc) << ','
            << row.trials << '\n';
    }
}

}  // namespace hfl
