#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hflsim/dataset.hpp"
#include "hflsim/rng.hpp"

namespace hfl {

// Truncated normal over the class-count axis. sigma = 0 degenerates to a
// point mass at mu (mu must then be an integer class count); sigma = +inf
// degenerates to the uniform distribution over 1..num_classes.
struct ClassDistParams {
    double mu = 5.5;
    double sigma = 0.7;
    double lower = 0.5;
    double upper = 10.5;
    int num_classes = 10;

    /// Empty when valid, otherwise one message per violated invariant.
    std::vector<std::string> validate() const;
};

/// Per-class sample counts (the scheduler's bias input and the clients' data
/// reports).
struct ClassHistogram {
    std::vector<long long> counts;

    ClassHistogram() = default;
    explicit ClassHistogram(int num_classes)
        : counts(static_cast<std::size_t>(num_classes), 0) {}

    int num_classes() const { return static_cast<int>(counts.size()); }
    long long total() const;
    void add(const ClassHistogram& other);
};

/// CDF of the truncated normal at x. Requires lower <= x <= upper and a
/// finite positive sigma; throws std::domain_error otherwise.
double truncated_normal_cdf(double x, const ClassDistParams& p);

/// Probability that a client holds l distinct classes, for l = 1..num_classes
/// (index l-1). Sums to 1. Handles the sigma = 0 and sigma = inf special
/// cases; throws std::invalid_argument on invalid params.
std::vector<double> class_count_pmf(const ClassDistParams& p);

// Integer apportionment of `total` by weight: floor each target, then hand
// out the remaining units by descending fractional part, ties to the smaller
// index.
std::vector<int> largest_remainder_counts(const std::vector<double>& weights, int total);

/// One client's local data. Samples reference rows of the source train pool;
/// items_by_class holds positions into `sample_ids` per class, in draw order.
/// That per-class order is the stable upload order consumed by the data
/// selection algorithm.
struct ClientShard {
    int client_id = 0;
    std::vector<int> class_set;                    // sorted, distinct labels
    std::vector<int> sample_ids;                   // rows of the train pool, draw order
    std::vector<int> sample_labels;                // parallel to sample_ids
    std::vector<std::vector<int>> items_by_class;  // class -> positions into sample_ids

    std::size_t size() const { return sample_ids.size(); }
    ClassHistogram histogram() const;
};

// Generates the K client shards. Deterministic given (data, params, rng
// seed); the exact draw sequence is part of the contract:
//   1. counts[l] = largest_remainder_counts(K * pmf, K)
//   2. the list (counts[1] copies of 1, counts[2] copies of 2, ...) is
//      Fisher-Yates shuffled and assigned to clients 0..K-1 in id order
//   3. per client, in id order:
//        a. class set: partial Fisher-Yates over 0..L-1 taking the first l
//           entries (sampling keeps the draw order; class_set stores them
//           sorted)
//        b. shard size n: uniform_int over [size_range.first, size_range.second]
//        c. per sample: a class index uniform_int over the draw-order class
//           list, then a pool row uniform_int over that class's pool
//           (with replacement)
std::vector<ClientShard> partition(const Dataset& data, int num_clients,
                                   const ClassDistParams& p,
                                   std::pair<int, int> size_range, Rng& rng);

}  // namespace hfl
