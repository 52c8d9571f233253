#include "hflsim/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <tuple>

namespace hfl {

namespace {

// stream tags for seed derivation
constexpr std::uint64_t kTagTrial = 0x747269616cULL;        // "trial"
constexpr std::uint64_t kTagRadio = 0x726164696fULL;        // "radio"
constexpr std::uint64_t kTagPermissions = 0x7065726dULL;    // "perm"
constexpr std::uint64_t kTagCandidates = 0x63616e64ULL;     // "cand"
constexpr std::uint64_t kTagInit = 0x696e6974ULL;           // "init"
constexpr std::uint64_t kTagRound = 0x726f756e64ULL;        // "round"

}  // namespace

SeedSet trial_seeds(const SeedSet& base, int trial) {
    const auto t = static_cast<std::uint64_t>(trial);
    return {derive_seed(base.partition, kTagTrial, t),
            derive_seed(base.resources, kTagTrial, t),
            derive_seed(base.training, kTagTrial, t),
            derive_seed(base.fluctuation, kTagTrial, t)};
}

std::vector<std::string> validate(const ExperimentConfig& cfg) {
    std::vector<std::string> errors;
    if (cfg.dataset.path.empty() == !cfg.dataset.synthetic.has_value())
        errors.push_back("dataset: exactly one of file path or synthetic spec required");
    if (cfg.num_clients < 1) errors.push_back("num_clients must be >= 1");
    if (!(cfg.participation > 0.0) || cfg.participation > 1.0)
        errors.push_back("participation must be in (0, 1]");
    if (cfg.upload_ratio < 0.0 || cfg.upload_ratio > 1.0)
        errors.push_back("upload_ratio must be in [0, 1]");
    if (!(cfg.round_deadline_s > 0.0)) errors.push_back("round_deadline_s must be > 0");
    if (!(cfg.final_deadline_min > 0.0)) errors.push_back("final_deadline_min must be > 0");
    if (cfg.summary_window_min < 0.0) errors.push_back("summary_window_min must be >= 0");
    if (cfg.fluctuation < 0.0 || cfg.fluctuation >= 1.0)
        errors.push_back("fluctuation must be in [0, 1)");
    if (cfg.shard_size_range.first < 1 || cfg.shard_size_range.first > cfg.shard_size_range.second)
        errors.push_back("shard_size_range must satisfy 1 <= min <= max");
    if (!(cfg.capability_range_sps.first > 0.0) ||
        cfg.capability_range_sps.first > cfg.capability_range_sps.second)
        errors.push_back("capability_range_sps must satisfy 0 < min <= max");
    if (cfg.payload.model_bytes < 1) errors.push_back("payload: model_bytes must be >= 1");
    if (cfg.payload.data_item_bytes < 1) errors.push_back("payload: data_item_bytes must be >= 1");
    if (cfg.trials < 1) errors.push_back("trials must be >= 1");
    if (cfg.hidden_units < 1 && cfg.model == ModelKind::Mlp)
        errors.push_back("hidden_units must be >= 1 for the mlp model");
    if ((cfg.policy.data == DataPolicy::None) != (cfg.protocol == Protocol::FedCs))
        errors.push_back("data_policy must be none exactly when protocol is fedcs");
    if (cfg.protocol == Protocol::FedCs && cfg.policy.client != ClientPolicy::MaxClient)
        errors.push_back("fedcs selects clients by round time only (client_policy max_client)");

    auto append = [&errors](const std::vector<std::string>& more) {
        errors.insert(errors.end(), more.begin(), more.end());
    };
    append(cfg.distribution.validate());
    append(cfg.cell.validate());
    append(cfg.training.validate());
    return errors;
}

std::vector<int> mark_upload_permissions(int num_clients, double upload_ratio, Rng& rng) {
    const auto count = static_cast<int>(std::llround(static_cast<double>(num_clients) * upload_ratio));
    return rng.sample_without_replacement(num_clients, count);
}

Dataset load_experiment_dataset(const ExperimentConfig& cfg) {
    if (cfg.dataset.synthetic) return make_synthetic(*cfg.dataset.synthetic);
    return load_dataset(cfg.dataset.path);
}

namespace {

struct ClientProfile {
    double x = 0.0;
    double y = 0.0;
    ClientResources resources;
};

struct TrialState {
    double clock_s = 0.0;
    ModelParams global;
    ClassHistogram model_client_hist;         // cumulative over all selected clients
    std::vector<int> server_rows;             // train-pool rows gathered so far
    std::vector<long long> server_class_counts;
    std::vector<std::vector<int>> upload_cursor;  // per client, per class: items consumed
    std::vector<long long> remaining_items;       // per client
};

std::vector<ClientProfile> build_profiles(const ExperimentConfig& cfg, Rng& rng) {
    std::vector<ClientProfile> profiles(static_cast<std::size_t>(cfg.num_clients));
    for (auto& p : profiles) {
        std::tie(p.x, p.y) = random_position_in_cell(cfg.cell.cell_radius_m, rng);
        p.resources.avg_capability_sps =
            rng.uniform(cfg.capability_range_sps.first, cfg.capability_range_sps.second);
        p.resources.avg_throughput_bps =
            mean_throughput_bps(std::hypot(p.x, p.y), cfg.cell);
        p.resources.fluctuation = cfg.fluctuation;
    }
    return profiles;
}

double realized_round_duration(const ExperimentConfig& cfg,
                               const std::vector<CandidateInfo>& selected,
                               const std::vector<ClientProfile>& profiles, Rng& fluct_rng) {
    if (selected.empty()) return cfg.round_deadline_s;
    // Fluctuated draws in plan order: throughput then capability per client.
    std::vector<CandidateInfo> realized = selected;
    for (auto& c : realized) {
        const auto& res = profiles[static_cast<std::size_t>(c.client_id)].resources;
        c.theta_avg_bps = sample_round_value(res.avg_throughput_bps, cfg.fluctuation, fluct_rng);
        c.gamma_avg_sps = sample_round_value(res.avg_capability_sps, cfg.fluctuation, fluct_rng);
    }
    const double dist = distribution_time_s(realized, cfg.payload.model_bytes);
    return estimate_round_schedule(realized, cfg.training.epochs_per_round,
                                   cfg.payload.model_bytes, dist)
        .finish_s;
}

RoundRecord run_round(const ExperimentConfig& cfg, const Dataset& data, const ModelSpec& spec,
                      const std::vector<ClientShard>& shards,
                      const std::vector<ClientProfile>& profiles,
                      const std::vector<int>& permitted, const SeedSet& seeds, TrialState& state,
                      int round) {
    RoundRecord rec;
    rec.round = round;
    rec.clock_start_s = state.clock_s;
    const int L = cfg.distribution.num_classes;

    // Resource request: ask ceil(K*C) random clients.
    const auto num_candidates = static_cast<int>(
        std::ceil(static_cast<double>(cfg.num_clients) * cfg.participation));
    Rng cand_rng(derive_seed(seeds.resources, kTagCandidates, static_cast<std::uint64_t>(round)));
    const auto candidate_ids = cand_rng.sample_without_replacement(cfg.num_clients, num_candidates);
    rec.num_candidates = num_candidates;

    std::vector<CandidateInfo> candidates;
    candidates.reserve(candidate_ids.size());
    for (const int id : candidate_ids) {
        const auto& shard = shards[static_cast<std::size_t>(id)];
        const auto& res = profiles[static_cast<std::size_t>(id)].resources;
        candidates.push_back({id, res.avg_throughput_bps, res.avg_capability_sps,
                              static_cast<long long>(shard.size()), shard.histogram()});
    }

    // Client selection (skipped by the centralized baseline).
    SchedulerParams params{cfg.round_deadline_s, cfg.payload.model_bytes,
                           cfg.training.epochs_per_round, cfg.policy, cfg.cv_definition};
    SelectionResult selection;
    selection.cumulative_after = state.model_client_hist;
    if (cfg.protocol != Protocol::Centralized)
        selection = select_model_clients(candidates, params, state.model_client_hist);
    state.model_client_hist = selection.cumulative_after;
    for (const auto& c : selection.selected) rec.selected_clients.push_back(c.client_id);
    rec.estimated_finish_s = selection.schedule.finish_s;
    rec.cumulative_cv = coefficient_of_variation(state.model_client_hist, cfg.cv_definition);

    // Data selection over permitted candidates with remaining supply.
    rec.upload_window_s = compute_upload_window(selection.schedule, cfg.round_deadline_s);
    std::vector<DataPick> picks;
    if (cfg.policy.data != DataPolicy::None) {
        std::vector<UploadCandidate> supply;
        for (const int id : candidate_ids) {
            if (!std::binary_search(permitted.begin(), permitted.end(), id)) continue;
            if (state.remaining_items[static_cast<std::size_t>(id)] <= 0) continue;
            UploadCandidate u;
            u.client_id = id;
            u.theta_avg_bps = profiles[static_cast<std::size_t>(id)].resources.avg_throughput_bps;
            u.remaining.resize(static_cast<std::size_t>(L));
            const auto& shard = shards[static_cast<std::size_t>(id)];
            for (int cls = 0; cls < L; ++cls)
                u.remaining[static_cast<std::size_t>(cls)] =
                    static_cast<long long>(shard.items_by_class[static_cast<std::size_t>(cls)].size()) -
                    state.upload_cursor[static_cast<std::size_t>(id)][static_cast<std::size_t>(cls)];
            supply.push_back(std::move(u));
        }
        picks = cfg.policy.data == DataPolicy::Iid
                    ? select_upload_data_iid(rec.upload_window_s, supply, cfg.payload.data_item_bytes)
                    : select_upload_data_max_throughput(rec.upload_window_s, supply,
                                                        cfg.payload.data_item_bytes);
    }

    // Commit admitted items to the server dataset (front-first per class).
    for (const auto& pick : picks) {
        auto& cursor = state.upload_cursor[static_cast<std::size_t>(pick.client_id)]
                                          [static_cast<std::size_t>(pick.class_label)];
        const auto& shard = shards[static_cast<std::size_t>(pick.client_id)];
        const int pos = shard.items_by_class[static_cast<std::size_t>(pick.class_label)]
                                            [static_cast<std::size_t>(cursor)];
        ++cursor;
        --state.remaining_items[static_cast<std::size_t>(pick.client_id)];
        state.server_rows.push_back(shard.sample_ids[static_cast<std::size_t>(pos)]);
        ++state.server_class_counts[static_cast<std::size_t>(pick.class_label)];
    }
    rec.manifest = summarize_manifest(picks);
    rec.manifest_items = static_cast<long long>(picks.size());
    rec.manifest_bytes = rec.manifest_items * cfg.payload.data_item_bytes;
    rec.server_class_counts = state.server_class_counts;

    // Realized execution with fluctuated resources.
    Rng fluct_rng(derive_seed(seeds.fluctuation, kTagRound, static_cast<std::uint64_t>(round)));
    rec.actual_duration_s = realized_round_duration(cfg, selection.selected, profiles, fluct_rng);

    // Model update and aggregation, clients in id order, server model last.
    std::vector<ModelParams> updated;
    std::vector<int> train_order = rec.selected_clients;
    std::sort(train_order.begin(), train_order.end());
    for (const int id : train_order) {
        Rng rng(derive_seed(seeds.training, static_cast<std::uint64_t>(round),
                            static_cast<std::uint64_t>(id)));
        updated.push_back(local_update(spec, state.global, data.train,
                                       shards[static_cast<std::size_t>(id)].sample_ids,
                                       cfg.training, round, rng));
    }
    if (cfg.protocol != Protocol::FedCs && !state.server_rows.empty()) {
        Rng rng(derive_seed(seeds.training, static_cast<std::uint64_t>(round),
                            static_cast<std::uint64_t>(cfg.num_clients)));
        updated.push_back(server_update(spec, state.global, data.train, state.server_rows,
                                        cfg.training, round, rng));
    }
    if (!updated.empty()) state.global = aggregate(updated);
    rec.accuracy = evaluate(spec, state.global, data.test).accuracy;

    state.clock_s += rec.actual_duration_s;
    rec.clock_end_s = state.clock_s;
    return rec;
}

}  // namespace

TrialResult run_trial(const ExperimentConfig& cfg, const Dataset& data, int trial) {
    const SeedSet seeds = trial_seeds(cfg.seeds, trial);
    const int L = cfg.distribution.num_classes;

    Rng partition_rng(seeds.partition);
    const auto shards = partition(data, cfg.num_clients, cfg.distribution,
                                  cfg.shard_size_range, partition_rng);

    Rng radio_rng(derive_seed(seeds.resources, kTagRadio));
    const auto profiles = build_profiles(cfg, radio_rng);

    Rng perm_rng(derive_seed(seeds.resources, kTagPermissions));
    const auto permitted = mark_upload_permissions(cfg.num_clients, cfg.upload_ratio, perm_rng);

    const ModelSpec spec{cfg.model, data.train.feature_dim, data.train.num_classes,
                         cfg.hidden_units};

    TrialState state;
    state.global = init_model(spec, derive_seed(seeds.training, kTagInit));
    state.model_client_hist = ClassHistogram(L);
    state.server_class_counts.assign(static_cast<std::size_t>(L), 0);
    state.upload_cursor.assign(static_cast<std::size_t>(cfg.num_clients),
                               std::vector<int>(static_cast<std::size_t>(L), 0));
    state.remaining_items.resize(static_cast<std::size_t>(cfg.num_clients));
    for (int id = 0; id < cfg.num_clients; ++id)
        state.remaining_items[static_cast<std::size_t>(id)] =
            static_cast<long long>(shards[static_cast<std::size_t>(id)].size());

    TrialResult result;
    result.trial = trial;
    result.seeds = seeds;

    const double final_deadline_s = cfg.final_deadline_min * 60.0;
    int round = 0;
    while (state.clock_s < final_deadline_s) {
        result.records.push_back(
            run_round(cfg, data, spec, shards, profiles, permitted, seeds, state, round));
        ++round;
    }

    const double window_start_s = final_deadline_s - cfg.summary_window_min * 60.0;
    double sum = 0.0;
    int n = 0;
    for (const auto& rec : result.records) {
        if (rec.clock_end_s >= window_start_s) {
            sum += rec.accuracy;
            ++n;
        }
    }
    result.window_accuracy = n > 0 ? sum / n : 0.0;
    result.final_accuracy = result.records.back().accuracy;
    result.server_items = static_cast<long long>(state.server_rows.size());
    return result;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const Dataset& data, int workers) {
    if (const auto errors = validate(cfg); !errors.empty()) {
        std::string msg = "invalid experiment config:";
        for (const auto& e : errors) msg += "\n  - " + e;
        throw std::invalid_argument(msg);
    }

    ExperimentResult result;
    result.trials.resize(static_cast<std::size_t>(cfg.trials));
    workers = std::max(1, std::min(workers, cfg.trials));

    if (workers == 1) {
        for (int t = 0; t < cfg.trials; ++t)
            result.trials[static_cast<std::size_t>(t)] = run_trial(cfg, data, t);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> failures(static_cast<std::size_t>(cfg.trials));
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (int t = next.fetch_add(1); t < cfg.trials; t = next.fetch_add(1)) {
                    try {
                        result.trials[static_cast<std::size_t>(t)] = run_trial(cfg, data, t);
                    } catch (...) {
                        failures[static_cast<std::size_t>(t)] = std::current_exception();
                    }
                }
            });
        }
        for (auto& th : pool) th.join();
        for (const auto& failure : failures)
            if (failure) std::rethrow_exception(failure);
    }

    double sum = 0.0;
    for (const auto& t : result.trials) sum += t.window_accuracy;
    result.mean_window_accuracy = sum / static_cast<double>(cfg.trials);
    double sq = 0.0;
    for (const auto& t : result.trials) {
        const double d = t.window_accuracy - result.mean_window_accuracy;
        sq += d * d;
    }
    result.std_window_accuracy = cfg.trials > 1 ? std::sqrt(sq / (cfg.trials - 1)) : 0.0;
    return result;
}

}  // namespace hfl
