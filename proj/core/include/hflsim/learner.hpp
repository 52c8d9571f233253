#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hflsim/dataset.hpp"
#include "hflsim/rng.hpp"

namespace hfl {

struct TrainHyperParams {
    int batch_size = 50;
    int epochs_per_round = 5;
    double initial_lr = 0.25;
    double lr_decay = 0.99;  // applied per global round

    std::vector<std::string> validate() const;
};

enum class ModelKind { Softmax, Mlp };

// Softmax: multinomial logistic regression on raw features,
//   weights[c*(dim+1) + j], j == dim is the bias.
// Mlp: one tanh hidden layer,
//   W1 at [h*(dim+1) + j], W2 at offset hidden*(dim+1) + [c*(hidden+1) + k].
struct ModelSpec {
    ModelKind kind = ModelKind::Softmax;
    int feature_dim = 0;
    int num_classes = 0;
    int hidden_units = 32;
};

std::size_t param_count(const ModelSpec& spec);

/// Flat parameter vector plus the sample count behind its last update (the
/// FedAvg aggregation weight).
struct ModelParams {
    std::vector<double> weights;
    long long sample_weight = 0;
};

/// Uniform init in [-0.05, 0.05], deterministic per seed. Zero-parameter
/// specs are rejected.
ModelParams init_model(const ModelSpec& spec, std::uint64_t seed);

/// Mean cross-entropy loss over the given pool rows; accumulates the mean
/// gradient into `grad` (must be zeroed by the caller, size param_count).
double loss_and_gradient(const ModelSpec& spec, std::span<const double> weights,
                         const LabeledSet& pool, std::span<const int> rows,
                         std::span<double> grad);

/// One round of local training: epochs_per_round epochs of mini-batch SGD at
/// lr = initial_lr * lr_decay^round_index. Aborts with std::runtime_error on
/// a non-finite loss or parameter. sample_weight of the result is rows.size().
ModelParams local_update(const ModelSpec& spec, const ModelParams& start, const LabeledSet& pool,
                         std::span<const int> rows, const TrainHyperParams& hp, int round_index,
                         Rng& rng);

/// Same training rule applied to the server's accumulated dataset. An empty
/// dataset returns the input weights with sample_weight 0.
ModelParams server_update(const ModelSpec& spec, const ModelParams& start, const LabeledSet& pool,
                          std::span<const int> rows, const TrainHyperParams& hp, int round_index,
                          Rng& rng);

/// Sample-count-weighted average (FedAvg). All-zero weights fall back to the
/// unweighted mean. The result's sample_weight is the total.
ModelParams aggregate(std::span<const ModelParams> models);

struct EvalResult {
    double accuracy = 0.0;
    std::vector<double> per_class;        // accuracy per class, 0 for absent classes
    std::vector<long long> class_counts;  // test samples per class
};

/// Fraction of correct argmax predictions (ties to the lowest class id).
EvalResult evaluate(const ModelSpec& spec, const ModelParams& model, const LabeledSet& test);

}  // namespace hfl
