#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "hflsim/engine.hpp"

namespace hfl {

// Output schema version. Bump on any column/layout change, including a
// change to a random draw sequence (which silently changes replayed values).
inline constexpr int kTraceSchemaVersion = 1;

/// FNV-1a of the resolved config text; stamped into every file header so
/// outputs are traceable to the exact config that produced them.
std::uint64_t fingerprint(const std::string& text);

std::string format_double(double v);

/// One row per round per trial.
void write_trace_csv(std::ostream& out, const ExperimentResult& result,
                     const std::string& method, std::uint64_t config_fingerprint);

/// One row per trial with its derived seeds and summary accuracies.
void write_trials_csv(std::ostream& out, const ExperimentResult& result,
                      std::uint64_t config_fingerprint);

/// Machine-readable run summary embedding the full resolved config.
void write_summary_json(std::ostream& out, const ExperimentResult& result,
                        const std::string& method, const std::string& resolved_config);

struct SweepRow {
    double value = 0.0;
    std::string method;
    double mean_acc = 0.0;
    double std_acc = 0.0;
    int trials = 0;
};

/// Sweep table: axis value x method -> mean +- std of last-window accuracy.
/// The value column is named after the axis.
void write_sweep_csv(std::ostream& out, const std::string& axis,
                     const std::vector<SweepRow>& rows, std::uint64_t config_fingerprint);

}  // namespace hfl
