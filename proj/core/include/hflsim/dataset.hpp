#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hfl {

/// A flat table of fixed-length feature vectors with integer labels.
struct LabeledSet {
    int feature_dim = 0;
    int num_classes = 0;
    std::vector<double> features;  // row-major, size() == labels.size() * feature_dim
    std::vector<int> labels;       // each in [0, num_classes)

    std::size_t size() const { return labels.size(); }
    std::span<const double> row(std::size_t i) const {
        return {features.data() + i * static_cast<std::size_t>(feature_dim),
                static_cast<std::size_t>(feature_dim)};
    }
};

/// Train pool plus a fixed held-out test split, with a per-class index over
/// the train pool.
struct Dataset {
    LabeledSet train;
    LabeledSet test;
    std::vector<std::vector<int>> train_by_class;  // class -> train row ids

    void build_class_index();
};

// Ten Gaussian clusters in feature space. Class means are random unit
// directions scaled by `separation`; samples add isotropic noise with the
// given standard deviation. `separation` and `noise` control how hard the
// classification task is.
struct SyntheticSpec {
    std::uint64_t seed = 7;
    int feature_dim = 16;
    int num_classes = 10;
    int train_per_class = 300;
    int test_per_class = 100;
    double separation = 2.0;
    double noise = 1.0;
};

Dataset make_synthetic(const SyntheticSpec& spec);

// Dataset file layout (stable; version tag in the header line):
//
//   hflsim-dataset 1 <feature_dim> <num_classes> <num_rows>
//   <split> <label> <f_1> ... <f_feature_dim>
//
// <split> is `train` or `test`, <label> an integer in [0, num_classes),
// features are decimal floats written with round-trip precision. Fields are
// space-separated, one row per line.
Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& data, const std::string& path);

}  // namespace hfl
