#include "hflsim/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hflsim/netcomp.hpp"

namespace hfl {

double coefficient_of_variation(const ClassHistogram& h, CvDefinition def) {
    const auto L = static_cast<double>(h.counts.size());
    if (h.counts.empty()) throw std::invalid_argument("cv: empty histogram");
    const double mean = static_cast<double>(h.total()) / L;
    if (mean == 0.0) return std::numeric_limits<double>::infinity();
    double var = 0.0;
    for (const long long c : h.counts) {
        const double d = static_cast<double>(c) - mean;
        var += d * d;
    }
    var /= L;
    return def == CvDefinition::VarianceOverMean ? var / mean : std::sqrt(var) / mean;
}

double distribution_time_s(std::span<const CandidateInfo> selected, long long model_bytes) {
    if (selected.empty()) return 0.0;
    double weakest = selected[0].theta_avg_bps;
    for (const auto& c : selected) weakest = std::min(weakest, c.theta_avg_bps);
    return upload_time_s(model_bytes, weakest);
}

RoundSchedule estimate_round_schedule(std::span<const CandidateInfo> selected, int epochs,
                                      long long model_bytes, double dist_time_s) {
    RoundSchedule sched;
    sched.dist_time_s = dist_time_s;
    sched.finish_s = dist_time_s;
    sched.entries.reserve(selected.size());
    for (const auto& c : selected) {
        const double ready = dist_time_s + update_time_s(c.n_samples, epochs, c.gamma_avg_sps);
        const double start = std::max(sched.finish_s, ready);
        const double finish = start + upload_time_s(model_bytes, c.theta_avg_bps);
        sched.entries.push_back({c.client_id, start, finish});
        sched.finish_s = finish;
    }
    return sched;
}

double t_inc(std::span<const CandidateInfo> selected, const CandidateInfo& k, int epochs,
             long long model_bytes, double dist_time_s) {
    std::vector<CandidateInfo> extended(selected.begin(), selected.end());
    extended.push_back(k);
    const double with = estimate_round_schedule(extended, epochs, model_bytes, dist_time_s).finish_s;
    const double without = estimate_round_schedule(selected, epochs, model_bytes, dist_time_s).finish_s;
    return with - without;
}

SelectionResult select_model_clients(std::vector<CandidateInfo> candidates,
                                     const SchedulerParams& params,
                                     const ClassHistogram& history) {
    SelectionResult result;
    result.cumulative_after = history;
    double elapsed = 0.0;  // estimated round finish of the current selection

    while (!candidates.empty()) {
        std::size_t best = 0;
        double best_f = std::numeric_limits<double>::infinity();
        double best_finish = 0.0;
        bool have_best = false;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            const auto& k = candidates[i];
            std::vector<CandidateInfo> tentative = result.selected;
            tentative.push_back(k);
            const double dist = distribution_time_s(tentative, params.model_bytes);
            const double finish =
                estimate_round_schedule(tentative, params.epochs, params.model_bytes, dist).finish_s;
            double f = finish - elapsed;  // t_inc, with the re-derived dist time
            if (params.policy.client == ClientPolicy::MinCv) {
                ClassHistogram tentative_hist = result.cumulative_after;
                tentative_hist.add(k.histogram);
                const double cv = coefficient_of_variation(tentative_hist, params.cv_definition);
                f = std::isinf(cv) ? cv : f * cv;
            }
            if (!have_best || f < best_f ||
                (f == best_f && k.client_id < candidates[best].client_id)) {
                best = i;
                best_f = f;
                best_finish = finish;
                have_best = true;
            }
        }
        const CandidateInfo picked = candidates[best];
        candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(best));
        if (best_finish < params.round_deadline_s) {
            elapsed = best_finish;
            result.selected.push_back(picked);
            result.cumulative_after.add(picked.histogram);
        }
    }

    const double dist = distribution_time_s(result.selected, params.model_bytes);
    result.schedule =
        estimate_round_schedule(result.selected, params.epochs, params.model_bytes, dist);
    return result;
}

double compute_upload_window(const RoundSchedule& schedule, double round_deadline_s) {
    if (schedule.entries.empty()) return round_deadline_s - schedule.dist_time_s;
    double first_start = schedule.entries[0].upload_start_s;
    for (const auto& e : schedule.entries) first_start = std::min(first_start, e.upload_start_s);
    return first_start - schedule.dist_time_s;
}

namespace {

bool supply_exhausted(const std::vector<UploadCandidate>& supply) {
    for (const auto& u : supply)
        for (const long long n : u.remaining)
            if (n > 0) return false;
    return true;
}

}  // namespace

std::vector<DataPick> select_upload_data_iid(double window_s,
                                             std::vector<UploadCandidate> supply,
                                             long long item_bytes) {
    std::vector<DataPick> picks;
    if (supply.empty()) return picks;
    const int num_classes = static_cast<int>(supply[0].remaining.size());
    double elapsed = 0.0;
    bool open = true;
    while (open) {
        if (supply_exhausted(supply)) break;
        for (int cls = 0; cls < num_classes; ++cls) {
            UploadCandidate* owner = nullptr;
            for (auto& u : supply) {
                if (u.remaining[static_cast<std::size_t>(cls)] <= 0) continue;
                if (!owner || u.theta_avg_bps > owner->theta_avg_bps ||
                    (u.theta_avg_bps == owner->theta_avg_bps && u.client_id < owner->client_id))
                    owner = &u;
            }
            if (owner) {
                const double with_item = elapsed + upload_time_s(item_bytes, owner->theta_avg_bps);
                if (with_item <= window_s) {
                    elapsed = with_item;
                    --owner->remaining[static_cast<std::size_t>(cls)];
                    picks.push_back({owner->client_id, cls});
                } else {
                    open = false;  // current class sweep still completes
                }
            }
            if (supply_exhausted(supply)) open = false;
        }
    }
    return picks;
}

std::vector<DataPick> select_upload_data_max_throughput(double window_s,
                                                        std::vector<UploadCandidate> supply,
                                                        long long item_bytes) {
    std::sort(supply.begin(), supply.end(), [](const UploadCandidate& a, const UploadCandidate& b) {
        if (a.theta_avg_bps != b.theta_avg_bps) return a.theta_avg_bps > b.theta_avg_bps;
        return a.client_id < b.client_id;
    });
    std::vector<DataPick> picks;
    double elapsed = 0.0;
    for (auto& u : supply) {
        const double item_time = upload_time_s(item_bytes, u.theta_avg_bps);
        for (std::size_t cls = 0; cls < u.remaining.size(); ++cls) {
            while (u.remaining[cls] > 0) {
                if (elapsed + item_time > window_s) return picks;
                elapsed += item_time;
                --u.remaining[cls];
                picks.push_back({u.client_id, static_cast<int>(cls)});
            }
        }
    }
    return picks;
}

std::vector<ManifestEntry> summarize_manifest(std::span<const DataPick> picks) {
    std::vector<ManifestEntry> manifest;
    for (const auto& pick : picks) {
        auto it = std::find_if(manifest.begin(), manifest.end(), [&](const ManifestEntry& e) {
            return e.client_id == pick.client_id && e.class_label == pick.class_label;
        });
        if (it == manifest.end())
            manifest.push_back({pick.client_id, pick.class_label, 1});
        else
            ++it->item_count;
    }
    std::sort(manifest.begin(), manifest.end(), [](const ManifestEntry& a, const ManifestEntry& b) {
        if (a.client_id != b.client_id) return a.client_id < b.client_id;
        return a.class_label < b.class_label;
    });
    return manifest;
}

}  // namespace hfl
