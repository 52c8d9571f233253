#pragma once

#include <span>
#include <vector>

#include "hflsim/partitioner.hpp"

namespace hfl {

enum class ClientPolicy { MaxClient, MinCv };
enum class DataPolicy { MaxThroughput, Iid, None };

/// Which clients update models and which data gets uploaded. data == None
/// exactly when simulating FedCS.
struct SelectionPolicy {
    ClientPolicy client = ClientPolicy::MaxClient;
    DataPolicy data = DataPolicy::None;
};

// The paper's bias score is variance over mean, which is not the textbook
// std-over-mean coefficient of variation; both are available, the paper form
// is the default.
enum class CvDefinition { VarianceOverMean, StdOverMean };

/// Data-bias score of a class histogram: 0 iff perfectly balanced, +inf for
/// the all-zero histogram (so any candidate that adds data ranks better).
double coefficient_of_variation(const ClassHistogram& h,
                                CvDefinition def = CvDefinition::VarianceOverMean);

/// A candidate's report from the resource-request step: identity, estimated
/// resources, and its per-class data counts.
struct CandidateInfo {
    int client_id = 0;
    double theta_avg_bps = 0.0;
    double gamma_avg_sps = 0.0;
    long long n_samples = 0;
    ClassHistogram histogram;
};

struct ScheduleEntry {
    int client_id = 0;
    double upload_start_s = 0.0;
    double upload_finish_s = 0.0;
};

struct RoundSchedule {
    std::vector<ScheduleEntry> entries;
    double dist_time_s = 0.0;
    double finish_s = 0.0;  // dist_time_s when no clients are scheduled
};

/// Multicast distribution time of the global model: the broadcast completes
/// at the weakest selected link. 0 for an empty selection.
double distribution_time_s(std::span<const CandidateInfo> selected, long long model_bytes);

// Round-time model: local updates run in parallel from the end of
// distribution; model uploads are serialized on the shared channel in the
// given order.
//   finish_0 = dist_time
//   start_i  = max(finish_{i-1}, dist_time + update_time_i)
//   finish_i = start_i + upload_time_i
RoundSchedule estimate_round_schedule(std::span<const CandidateInfo> selected, int epochs,
                                      long long model_bytes, double dist_time_s);

/// Round-time increment of appending candidate k to the given order, under a
/// fixed distribution time.
double t_inc(std::span<const CandidateInfo> selected, const CandidateInfo& k, int epochs,
             long long model_bytes, double dist_time_s);

struct SchedulerParams {
    double round_deadline_s = 180.0;
    long long model_bytes = 1 << 20;
    int epochs = 5;
    SelectionPolicy policy;
    CvDefinition cv_definition = CvDefinition::VarianceOverMean;
};

struct SelectionResult {
    std::vector<CandidateInfo> selected;  // admission order
    RoundSchedule schedule;               // estimated, includes dist time
    ClassHistogram cumulative_after;      // history plus admitted histograms
};

// Greedy client selection. Repeatedly evaluates every remaining candidate
// (f = t_inc for MaxClient, f = t_inc * CV(history + tentative histogram)
// for MinCv), removes the argmin (ties to the lowest client id) and admits it
// only if the estimated round finish stays strictly below the deadline.
// Distribution time is re-derived for each tentative selection since adding a
// weak link slows the multicast. Rejected candidates leave the cumulative
// histogram untouched. May return an empty selection.
SelectionResult select_model_clients(std::vector<CandidateInfo> candidates,
                                     const SchedulerParams& params,
                                     const ClassHistogram& history);

/// Data-upload window: from the end of distribution until the first model
/// upload starts. With no selected clients the window spans the whole round
/// after distribution.
double compute_upload_window(const RoundSchedule& schedule, double round_deadline_s);

/// A permitted client's uploadable supply: remaining (never-uploaded) item
/// counts per class, consumed front-first from the shard's stable order.
struct UploadCandidate {
    int client_id = 0;
    double theta_avg_bps = 0.0;
    std::vector<long long> remaining;  // per class
};

/// One admitted item. Items within a (client, class) pair are consumed in
/// the shard's stable order, so pick order fully identifies items.
struct DataPick {
    int client_id = 0;
    int class_label = 0;
};

// Class-balanced greedy selection: sweep classes round-robin; per class take
// the front item from the richest-throughput owner with remaining supply
// (ties to the lowest id); admit while the cumulative serialized upload time
// stays within the window; stop once an item would overflow the window or all
// supply is gone. Per-class admitted counts differ by at most one among
// classes that still have supply.
std::vector<DataPick> select_upload_data_iid(double window_s,
                                             std::vector<UploadCandidate> supply,
                                             long long item_bytes);

// Volume-greedy selection: owners sorted by throughput descending (ties to
// the lowest id), items taken in each owner's stable order regardless of
// class, until the next item would overflow the window.
std::vector<DataPick> select_upload_data_max_throughput(double window_s,
                                                        std::vector<UploadCandidate> supply,
                                                        long long item_bytes);

/// Aggregated manifest row: `item_count` items of one class from one client.
struct ManifestEntry {
    int client_id = 0;
    int class_label = 0;
    long long item_count = 0;
};

std::vector<ManifestEntry> summarize_manifest(std::span<const DataPick> picks);

/// Everything the round executes: the model-client schedule and the
/// data-upload manifest.
struct RoundPlan {
    std::vector<int> model_clients;  // admission order
    RoundSchedule schedule;
    double round_deadline_s = 0.0;
    double upload_window_s = 0.0;
    std::vector<DataPick> picks;
    std::vector<ManifestEntry> manifest;
    long long estimated_data_bytes = 0;
};

}  // namespace hfl
