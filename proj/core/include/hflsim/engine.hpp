#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hflsim/dataset.hpp"
#include "hflsim/learner.hpp"
#include "hflsim/netcomp.hpp"
#include "hflsim/partitioner.hpp"
#include "hflsim/scheduler.hpp"

namespace hfl {

enum class Protocol { FedCs, HybridFl, Centralized };

/// Base seeds for the four independent randomness families. Per-trial seeds
/// are derived, never used raw.
struct SeedSet {
    std::uint64_t partition = 1;
    std::uint64_t resources = 2;
    std::uint64_t training = 3;
    std::uint64_t fluctuation = 4;
};

/// Per-trial seeds derived from the base set; recorded in outputs for replay.
SeedSet trial_seeds(const SeedSet& base, int trial);

struct PayloadConfig {
    long long model_bytes = 1 << 20;   // global model, both directions
    long long data_item_bytes = 3072;  // one uploaded sample
};

/// Dataset source: a file path or an inline synthetic spec (exactly one).
struct DatasetSpec {
    std::string path;
    std::optional<SyntheticSpec> synthetic;
};

struct ExperimentConfig {
    DatasetSpec dataset;
    Protocol protocol = Protocol::HybridFl;
    SelectionPolicy policy{ClientPolicy::MinCv, DataPolicy::Iid};
    CvDefinition cv_definition = CvDefinition::VarianceOverMean;

    int num_clients = 1000;            // K
    double participation = 0.1;        // C: fraction asked per round
    double upload_ratio = 0.01;        // r_UL: fraction permitting data upload
    double round_deadline_s = 180.0;   // T_round
    double final_deadline_min = 400.0; // T_final
    double summary_window_min = 100.0; // accuracy averaged over the last window
    double fluctuation = 0.0;          // r_var

    ClassDistParams distribution;
    std::pair<int, int> shard_size_range{100, 1000};
    std::pair<double, double> capability_range_sps{10.0, 100.0};
    CellConfig cell;
    TrainHyperParams training;
    ModelKind model = ModelKind::Softmax;
    int hidden_units = 32;
    PayloadConfig payload;
    SeedSet seeds;
    int trials = 1;
};

/// Empty when valid; otherwise one message per violated invariant.
std::vector<std::string> validate(const ExperimentConfig& cfg);

/// The data-uploading client set: round(K * upload_ratio) ids drawn uniformly
/// without replacement, fixed for the whole experiment.
std::vector<int> mark_upload_permissions(int num_clients, double upload_ratio, Rng& rng);

struct RoundRecord {
    int round = 0;
    double clock_start_s = 0.0;
    double clock_end_s = 0.0;
    double estimated_finish_s = 0.0;  // relative to round start
    double actual_duration_s = 0.0;
    double upload_window_s = 0.0;
    int num_candidates = 0;
    std::vector<int> selected_clients;          // admission order
    std::vector<ManifestEntry> manifest;        // this round's admitted uploads
    long long manifest_items = 0;
    long long manifest_bytes = 0;
    std::vector<long long> server_class_counts; // cumulative server dataset
    double cumulative_cv = 0.0;                 // CV of the model-client histogram so far
    double accuracy = 0.0;                      // global model after aggregation
};

struct TrialResult {
    int trial = 0;
    SeedSet seeds;
    std::vector<RoundRecord> records;
    double window_accuracy = 0.0;  // mean accuracy of rounds ending in the last window
    double final_accuracy = 0.0;
    long long server_items = 0;
};

struct ExperimentResult {
    std::vector<TrialResult> trials;
    double mean_window_accuracy = 0.0;
    double std_window_accuracy = 0.0;
};

/// Loads the dataset named by the config (file or synthetic).
Dataset load_experiment_dataset(const ExperimentConfig& cfg);

/// Runs one independent trial to its final deadline.
TrialResult run_trial(const ExperimentConfig& cfg, const Dataset& data, int trial);

/// Runs all trials (optionally on a worker pool; results are merged by trial
/// index, so worker count never changes the output). Throws on an invalid
/// config, listing every violated invariant.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const Dataset& data, int workers = 1);

}  // namespace hfl
