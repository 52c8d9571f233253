#include "hflsim/partitioner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace hfl {

namespace {

bool is_integer(double x) { return x == std::floor(x); }

double standard_normal_cdf(double x) { return 0.5 * (1.0 + std::erf(x / std::sqrt(2.0))); }

}  // namespace

std::vector<std::string> ClassDistParams::validate() const {
    std::vector<std::string> errors;
    if (num_classes < 2) errors.push_back("distribution: num_classes must be >= 2");
    if (!(lower < upper)) errors.push_back("distribution: lower bound must be below upper bound");
    if (std::isnan(mu) || std::isnan(sigma)) errors.push_back("distribution: mu/sigma must not be NaN");
    if (sigma < 0.0) errors.push_back("distribution: sigma must be >= 0");
    if (sigma == 0.0) {
        if (!is_integer(mu) || mu < 1.0 || mu > static_cast<double>(num_classes))
            errors.push_back("distribution: sigma = 0 requires mu to be an integer class count in 1.."
                             + std::to_string(num_classes));
    } else if (std::isfinite(sigma)) {
        if (mu < lower || mu > upper)
            errors.push_back("distribution: mu must lie within [lower, upper]");
    }
    return errors;
}

long long ClassHistogram::total() const {
    return std::accumulate(counts.begin(), counts.end(), 0LL);
}

void ClassHistogram::add(const ClassHistogram& other) {
    if (other.counts.size() != counts.size())
        throw std::invalid_argument("histogram: class count mismatch");
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
}

double truncated_normal_cdf(double x, const ClassDistParams& p) {
    if (!(p.sigma > 0.0) || !std::isfinite(p.sigma))
        throw std::domain_error("truncated_normal_cdf: sigma must be finite and > 0");
    if (x < p.lower || x > p.upper)
        throw std::domain_error("truncated_normal_cdf: x outside truncation interval");
    const double lo = standard_normal_cdf((p.lower - p.mu) / p.sigma);
    const double hi = standard_normal_cdf((p.upper - p.mu) / p.sigma);
    return (standard_normal_cdf((x - p.mu) / p.sigma) - lo) / (hi - lo);
}

std::vector<double> class_count_pmf(const ClassDistParams& p) {
    if (const auto errors = p.validate(); !errors.empty())
        throw std::invalid_argument(errors.front());
    const auto L = static_cast<std::size_t>(p.num_classes);
    std::vector<double> r(L, 0.0);
    if (p.sigma == 0.0) {
        r[static_cast<std::size_t>(p.mu) - 1] = 1.0;
        return r;
    }
    if (std::isinf(p.sigma)) {
        std::fill(r.begin(), r.end(), 1.0 / static_cast<double>(L));
        return r;
    }
    // Cut points clamp the class edges l +- 0.5 into the truncation interval,
    // with the outermost classes absorbing any tail, so the pmf telescopes to
    // F(upper) - F(lower) = 1 for any bounds. The paper's defaults
    // (lower = 0.5, upper = L + 0.5) make the clamping a no-op.
    double prev = 0.0;  // F(lower)
    for (std::size_t l = 1; l <= L; ++l) {
        const double edge = (l == L) ? p.upper
                                     : std::clamp(static_cast<double>(l) + 0.5, p.lower, p.upper);
        const double cur = truncated_normal_cdf(edge, p);
        r[l - 1] = cur - prev;
        prev = cur;
    }
    return r;
}

std::vector<int> largest_remainder_counts(const std::vector<double>& weights, int total) {
    const std::size_t n = weights.size();
    std::vector<int> counts(n, 0);
    std::vector<double> frac(n, 0.0);
    long long assigned = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double target = weights[i] * static_cast<double>(total);
        counts[i] = static_cast<int>(std::floor(target));
        frac[i] = target - std::floor(target);
        assigned += counts[i];
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
    for (std::size_t i = 0; assigned < total; ++i, ++assigned)
        ++counts[order[i % n]];
    return counts;
}

ClassHistogram ClientShard::histogram() const {
    ClassHistogram h(static_cast<int>(items_by_class.size()));
    for (std::size_t c = 0; c < items_by_class.size(); ++c)
        h.counts[c] = static_cast<long long>(items_by_class[c].size());
    return h;
}

std::vector<ClientShard> partition(const Dataset& data, int num_clients,
                                   const ClassDistParams& p,
                                   std::pair<int, int> size_range, Rng& rng) {
    if (num_clients < 1) throw std::invalid_argument("partition: need at least one client");
    if (size_range.first < 1 || size_range.first > size_range.second)
        throw std::invalid_argument("partition: invalid shard size range");
    if (data.train.num_classes != p.num_classes)
        throw std::invalid_argument("partition: dataset classes do not match distribution params");
    const int L = p.num_classes;

    const auto pmf = class_count_pmf(p);
    const auto per_count = largest_remainder_counts(pmf, num_clients);

    std::vector<int> class_count_of_client;
    class_count_of_client.reserve(static_cast<std::size_t>(num_clients));
    for (int l = 1; l <= L; ++l)
        class_count_of_client.insert(class_count_of_client.end(),
                                     static_cast<std::size_t>(per_count[static_cast<std::size_t>(l - 1)]),
                                     l);
    rng.shuffle(class_count_of_client);

    std::vector<ClientShard> shards(static_cast<std::size_t>(num_clients));
    std::vector<int> class_order(static_cast<std::size_t>(L));
    for (int k = 0; k < num_clients; ++k) {
        auto& shard = shards[static_cast<std::size_t>(k)];
        shard.client_id = k;
        shard.items_by_class.assign(static_cast<std::size_t>(L), {});
        const int l = class_count_of_client[static_cast<std::size_t>(k)];

        std::iota(class_order.begin(), class_order.end(), 0);
        for (int i = 0; i < l; ++i) {
            const auto j = static_cast<std::size_t>(rng.uniform_int(i, L - 1));
            std::swap(class_order[static_cast<std::size_t>(i)], class_order[j]);
        }
        shard.class_set.assign(class_order.begin(), class_order.begin() + l);
        std::sort(shard.class_set.begin(), shard.class_set.end());

        const auto n = static_cast<int>(rng.uniform_int(size_range.first, size_range.second));
        shard.sample_ids.reserve(static_cast<std::size_t>(n));
        for (int s = 0; s < n; ++s) {
            const int cls = class_order[static_cast<std::size_t>(rng.uniform_int(0, l - 1))];
            const auto& pool = data.train_by_class[static_cast<std::size_t>(cls)];
            if (pool.empty())
                throw std::runtime_error("partition: train pool has no samples of class "
                                         + std::to_string(cls));
            const int row = pool[static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1))];
            shard.items_by_class[static_cast<std::size_t>(cls)].push_back(
                static_cast<int>(shard.sample_ids.size()));
            shard.sample_ids.push_back(row);
            shard.sample_labels.push_back(cls);
        }
    }
    return shards;
}

}  // namespace hfl
