#include "hflsim/learner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace hfl {

std::vector<std::string> TrainHyperParams::validate() const {
    std::vector<std::string> errors;
    if (batch_size < 1) errors.push_back("training: batch_size must be >= 1");
    if (epochs_per_round < 1) errors.push_back("training: epochs_per_round must be >= 1");
    if (!(initial_lr >= 0.0)) errors.push_back("training: initial_lr must be >= 0");
    if (!(lr_decay > 0.0) || lr_decay > 1.0) errors.push_back("training: lr_decay must be in (0, 1]");
    return errors;
}

std::size_t param_count(const ModelSpec& spec) {
    const auto d = static_cast<std::size_t>(spec.feature_dim);
    const auto L = static_cast<std::size_t>(spec.num_classes);
    const auto h = static_cast<std::size_t>(spec.hidden_units);
    if (spec.kind == ModelKind::Softmax) return L * (d + 1);
    return h * (d + 1) + L * (h + 1);
}

ModelParams init_model(const ModelSpec& spec, std::uint64_t seed) {
    const std::size_t p = param_count(spec);
    if (spec.feature_dim < 1 || spec.num_classes < 2 || p == 0)
        throw std::invalid_argument("init_model: model spec yields no parameters");
    if (spec.kind == ModelKind::Mlp && spec.hidden_units < 1)
        throw std::invalid_argument("init_model: mlp needs at least one hidden unit");
    ModelParams model;
    model.weights.resize(p);
    Rng rng(seed);
    for (auto& w : model.weights) w = rng.uniform(-0.05, 0.05);
    return model;
}

namespace {

// softmax of logits in place, numerically stable
void softmax(std::vector<double>& z) {
    const double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (auto& v : z) {
        v = std::exp(v - zmax);
        sum += v;
    }
    for (auto& v : z) v /= sum;
}

double sample_softmax(const ModelSpec& spec, std::span<const double> w,
                      std::span<const double> x, int label, std::span<double> grad,
                      double inv_batch) {
    const int d = spec.feature_dim;
    const int L = spec.num_classes;
    const std::size_t stride = static_cast<std::size_t>(d) + 1;
    std::vector<double> z(static_cast<std::size_t>(L));
    for (int c = 0; c < L; ++c) {
        const double* wc = w.data() + static_cast<std::size_t>(c) * stride;
        double acc = wc[d];
        for (int j = 0; j < d; ++j) acc += wc[j] * x[static_cast<std::size_t>(j)];
        z[static_cast<std::size_t>(c)] = acc;
    }
    softmax(z);
    const double p_true = std::max(z[static_cast<std::size_t>(label)], 1e-300);
    for (int c = 0; c < L; ++c) {
        const double delta = (z[static_cast<std::size_t>(c)] - (c == label ? 1.0 : 0.0)) * inv_batch;
        double* gc = grad.data() + static_cast<std::size_t>(c) * stride;
        for (int j = 0; j < d; ++j) gc[j] += delta * x[static_cast<std::size_t>(j)];
        gc[d] += delta;
    }
    return -std::log(p_true) * inv_batch;
}

double sample_mlp(const ModelSpec& spec, std::span<const double> w,
                  std::span<const double> x, int label, std::span<double> grad,
                  double inv_batch) {
    const int d = spec.feature_dim;
    const int L = spec.num_classes;
    const int H = spec.hidden_units;
    const std::size_t s1 = static_cast<std::size_t>(d) + 1;
    const std::size_t s2 = static_cast<std::size_t>(H) + 1;
    const std::size_t off2 = static_cast<std::size_t>(H) * s1;

    std::vector<double> hidden(static_cast<std::size_t>(H));
    for (int h = 0; h < H; ++h) {
        const double* wh = w.data() + static_cast<std::size_t>(h) * s1;
        double acc = wh[d];
        for (int j = 0; j < d; ++j) acc += wh[j] * x[static_cast<std::size_t>(j)];
        hidden[static_cast<std::size_t>(h)] = std::tanh(acc);
    }
    std::vector<double> z(static_cast<std::size_t>(L));
    for (int c = 0; c < L; ++c) {
        const double* wc = w.data() + off2 + static_cast<std::size_t>(c) * s2;
        double acc = wc[H];
        for (int h = 0; h < H; ++h) acc += wc[h] * hidden[static_cast<std::size_t>(h)];
        z[static_cast<std::size_t>(c)] = acc;
    }
    softmax(z);
    const double p_true = std::max(z[static_cast<std::size_t>(label)], 1e-300);

    std::vector<double> dhidden(static_cast<std::size_t>(H), 0.0);
    for (int c = 0; c < L; ++c) {
        const double delta = z[static_cast<std::size_t>(c)] - (c == label ? 1.0 : 0.0);
        const double* wc = w.data() + off2 + static_cast<std::size_t>(c) * s2;
        double* gc = grad.data() + off2 + static_cast<std::size_t>(c) * s2;
        for (int h = 0; h < H; ++h) {
            gc[h] += delta * hidden[static_cast<std::size_t>(h)] * inv_batch;
            dhidden[static_cast<std::size_t>(h)] += delta * wc[h];
        }
        gc[H] += delta * inv_batch;
    }
    for (int h = 0; h < H; ++h) {
        const double hv = hidden[static_cast<std::size_t>(h)];
        const double dpre = dhidden[static_cast<std::size_t>(h)] * (1.0 - hv * hv) * inv_batch;
        double* gh = grad.data() + static_cast<std::size_t>(h) * s1;
        for (int j = 0; j < d; ++j) gh[j] += dpre * x[static_cast<std::size_t>(j)];
        gh[d] += dpre;
    }
    return -std::log(p_true) * inv_batch;
}

}  // namespace

double loss_and_gradient(const ModelSpec& spec, std::span<const double> weights,
                         const LabeledSet& pool, std::span<const int> rows,
                         std::span<double> grad) {
    if (rows.empty()) throw std::invalid_argument("loss_and_gradient: empty batch");
    if (weights.size() != param_count(spec) || grad.size() != weights.size())
        throw std::invalid_argument("loss_and_gradient: weight/gradient size mismatch");
    const double inv_batch = 1.0 / static_cast<double>(rows.size());
    double loss = 0.0;
    for (const int row : rows) {
        const auto x = pool.row(static_cast<std::size_t>(row));
        const int label = pool.labels[static_cast<std::size_t>(row)];
        loss += spec.kind == ModelKind::Softmax
                    ? sample_softmax(spec, weights, x, label, grad, inv_batch)
                    : sample_mlp(spec, weights, x, label, grad, inv_batch);
    }
    return loss;
}

namespace {

ModelParams run_sgd(const ModelSpec& spec, const ModelParams& start, const LabeledSet& pool,
                    std::span<const int> rows, const TrainHyperParams& hp, int round_index,
                    Rng& rng) {
    ModelParams model;
    model.weights = start.weights;
    model.sample_weight = static_cast<long long>(rows.size());
    if (model.weights.size() != param_count(spec))
        throw std::invalid_argument("sgd: model does not match spec");

    const double lr = hp.initial_lr * std::pow(hp.lr_decay, round_index);
    std::vector<int> order(rows.begin(), rows.end());
    std::vector<double> grad(model.weights.size());
    for (int epoch = 0; epoch < hp.epochs_per_round; ++epoch) {
        rng.shuffle(order);
        for (std::size_t begin = 0; begin < order.size(); begin += static_cast<std::size_t>(hp.batch_size)) {
            const std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(hp.batch_size));
            std::fill(grad.begin(), grad.end(), 0.0);
            const double loss = loss_and_gradient(
                spec, model.weights, pool,
                std::span<const int>(order.data() + begin, end - begin), grad);
            if (!std::isfinite(loss))
                throw std::runtime_error("training diverged: non-finite loss at round " +
                                         std::to_string(round_index));
            for (std::size_t i = 0; i < model.weights.size(); ++i)
                model.weights[i] -= lr * grad[i];
        }
        for (const double w : model.weights)
            if (!std::isfinite(w))
                throw std::runtime_error("training diverged: non-finite weight at round " +
                                         std::to_string(round_index));
    }
    return model;
}

}  // namespace

ModelParams local_update(const ModelSpec& spec, const ModelParams& start, const LabeledSet& pool,
                         std::span<const int> rows, const TrainHyperParams& hp, int round_index,
                         Rng& rng) {
    if (rows.empty()) throw std::invalid_argument("local_update: empty shard");
    return run_sgd(spec, start, pool, rows, hp, round_index, rng);
}

ModelParams server_update(const ModelSpec& spec, const ModelParams& start, const LabeledSet& pool,
                          std::span<const int> rows, const TrainHyperParams& hp, int round_index,
                          Rng& rng) {
    if (rows.empty()) return {start.weights, 0};
    return run_sgd(spec, start, pool, rows, hp, round_index, rng);
}

ModelParams aggregate(std::span<const ModelParams> models) {
    if (models.empty()) throw std::invalid_argument("aggregate: no models");
    const std::size_t p = models[0].weights.size();
    long long total = 0;
    for (const auto& m : models) {
        if (m.weights.size() != p) throw std::invalid_argument("aggregate: dimension mismatch");
        if (m.sample_weight < 0) throw std::invalid_argument("aggregate: negative sample weight");
        total += m.sample_weight;
    }
    ModelParams out;
    out.weights.assign(p, 0.0);
    out.sample_weight = total;
    for (const auto& m : models) {
        const double w = total > 0 ? static_cast<double>(m.sample_weight) / static_cast<double>(total)
                                   : 1.0 / static_cast<double>(models.size());
        for (std::size_t i = 0; i < p; ++i) out.weights[i] += w * m.weights[i];
    }
    return out;
}

EvalResult evaluate(const ModelSpec& spec, const ModelParams& model, const LabeledSet& test) {
    if (test.size() == 0) throw std::invalid_argument("evaluate: empty test set");
    const int L = spec.num_classes;
    EvalResult result;
    result.per_class.assign(static_cast<std::size_t>(L), 0.0);
    result.class_counts.assign(static_cast<std::size_t>(L), 0);
    std::vector<long long> correct(static_cast<std::size_t>(L), 0);

    const std::size_t stride = static_cast<std::size_t>(spec.feature_dim) + 1;
    const std::size_t s2 = static_cast<std::size_t>(spec.hidden_units) + 1;
    const std::size_t off2 = static_cast<std::size_t>(spec.hidden_units) * stride;
    std::vector<double> hidden(static_cast<std::size_t>(spec.hidden_units));

    for (std::size_t i = 0; i < test.size(); ++i) {
        const auto x = test.row(i);
        int best = 0;
        double best_z = -std::numeric_limits<double>::infinity();
        if (spec.kind == ModelKind::Softmax) {
            for (int c = 0; c < L; ++c) {
                const double* wc = model.weights.data() + static_cast<std::size_t>(c) * stride;
                double z = wc[spec.feature_dim];
                for (int j = 0; j < spec.feature_dim; ++j) z += wc[j] * x[static_cast<std::size_t>(j)];
                if (z > best_z) {
                    best_z = z;
                    best = c;
                }
            }
        } else {
            for (int h = 0; h < spec.hidden_units; ++h) {
                const double* wh = model.weights.data() + static_cast<std::size_t>(h) * stride;
                double acc = wh[spec.feature_dim];
                for (int j = 0; j < spec.feature_dim; ++j) acc += wh[j] * x[static_cast<std::size_t>(j)];
                hidden[static_cast<std::size_t>(h)] = std::tanh(acc);
            }
            for (int c = 0; c < L; ++c) {
                const double* wc = model.weights.data() + off2 + static_cast<std::size_t>(c) * s2;
                double z = wc[spec.hidden_units];
                for (int h = 0; h < spec.hidden_units; ++h)
                    z += wc[h] * hidden[static_cast<std::size_t>(h)];
                if (z > best_z) {
                    best_z = z;
                    best = c;
                }
            }
        }
        const int label = test.labels[i];
        ++result.class_counts[static_cast<std::size_t>(label)];
        if (best == label) ++correct[static_cast<std::size_t>(label)];
    }

    long long total_correct = 0;
    for (int c = 0; c < L; ++c) {
        total_correct += correct[static_cast<std::size_t>(c)];
        if (result.class_counts[static_cast<std::size_t>(c)] > 0)
            result.per_class[static_cast<std::size_t>(c)] =
                static_cast<double>(correct[static_cast<std::size_t>(c)]) /
                static_cast<double>(result.class_counts[static_cast<std::size_t>(c)]);
    }
    result.accuracy = static_cast<double>(total_correct) / static_cast<double>(test.size());
    return result;
}

}  // namespace hfl
