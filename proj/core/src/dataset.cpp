#include "hflsim/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hflsim/rng.hpp"

namespace hfl {

void Dataset::build_class_index() {
    train_by_class.assign(static_cast<std::size_t>(train.num_classes), {});
    for (std::size_t i = 0; i < train.size(); ++i) {
        const int label = train.labels[i];
        if (label < 0 || label >= train.num_classes)
            throw std::invalid_argument("dataset: label out of range");
        train_by_class[static_cast<std::size_t>(label)].push_back(static_cast<int>(i));
    }
}

namespace {

std::vector<double> class_mean(Rng& rng, int dim, double separation) {
    std::vector<double> m(static_cast<std::size_t>(dim));
    double norm2 = 0.0;
    for (auto& v : m) {
        v = rng.normal();
        norm2 += v * v;
    }
    const double scale = separation / std::sqrt(norm2);
    for (auto& v : m) v *= scale;
    return m;
}

void append_samples(LabeledSet& set, Rng& rng, std::span<const double> mean,
                    int label, int count, double noise) {
    for (int i = 0; i < count; ++i) {
        for (const double m : mean) set.features.push_back(m + noise * rng.normal());
        set.labels.push_back(label);
    }
}

}  // namespace

Dataset make_synthetic(const SyntheticSpec& spec) {
    if (spec.feature_dim < 1 || spec.num_classes < 2)
        throw std::invalid_argument("synthetic dataset: feature_dim >= 1 and num_classes >= 2 required");
    if (spec.train_per_class < 1 || spec.test_per_class < 1)
        throw std::invalid_argument("synthetic dataset: per-class sample counts must be positive");

    Dataset data;
    data.train.feature_dim = data.test.feature_dim = spec.feature_dim;
    data.train.num_classes = data.test.num_classes = spec.num_classes;

    Rng mean_rng(derive_seed(spec.seed, 0x6d65616eULL));  // "mean"
    std::vector<std::vector<double>> means;
    means.reserve(static_cast<std::size_t>(spec.num_classes));
    for (int c = 0; c < spec.num_classes; ++c)
        means.push_back(class_mean(mean_rng, spec.feature_dim, spec.separation));

    for (int c = 0; c < spec.num_classes; ++c) {
        Rng train_rng(derive_seed(spec.seed, 0x747261696eULL, static_cast<std::uint64_t>(c)));
        Rng test_rng(derive_seed(spec.seed, 0x74657374ULL, static_cast<std::uint64_t>(c)));
        append_samples(data.train, train_rng, means[static_cast<std::size_t>(c)], c,
                       spec.train_per_class, spec.noise);
        append_samples(data.test, test_rng, means[static_cast<std::size_t>(c)], c,
                       spec.test_per_class, spec.noise);
    }
    data.build_class_index();
    return data;
}

void save_dataset(const Dataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open dataset file for writing: " + path);
    const std::size_t rows = data.train.size() + data.test.size();
    out << "hflsim-dataset 1 " << data.train.feature_dim << ' ' << data.train.num_classes
        << ' ' << rows << '\n';
    char buf[40];
    auto write_set = [&](const LabeledSet& set, const char* split) {
        for (std::size_t i = 0; i < set.size(); ++i) {
            out << split << ' ' << set.labels[i];
            for (const double v : set.row(i)) {
                std::snprintf(buf, sizeof buf, "%.17g", v);
                out << ' ' << buf;
            }
            out << '\n';
        }
    };
    write_set(data.train, "train");
    write_set(data.test, "test");
    if (!out) throw std::runtime_error("write failed: " + path);
}

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);

    std::string magic;
    int version = 0, dim = 0, classes = 0;
    std::size_t rows = 0;
    in >> magic >> version >> dim >> classes >> rows;
    if (!in || magic != "hflsim-dataset")
        throw std::runtime_error("not a hflsim dataset file: " + path);
    if (version != 1)
        throw std::runtime_error("unsupported dataset version in " + path);
    if (dim < 1 || classes < 2)
        throw std::runtime_error("invalid dataset header in " + path);

    Dataset data;
    data.train.feature_dim = data.test.feature_dim = dim;
    data.train.num_classes = data.test.num_classes = classes;

    std::string split;
    for (std::size_t i = 0; i < rows; ++i) {
        int label = 0;
        in >> split >> label;
        LabeledSet* set = nullptr;
        if (split == "train") set = &data.train;
        else if (split == "test") set = &data.test;
        else throw std::runtime_error("bad split tag in dataset row: " + split);
        if (label < 0 || label >= classes)
            throw std::runtime_error("label out of range in dataset file: " + path);
        set->labels.push_back(label);
        for (int j = 0; j < dim; ++j) {
            double v = 0.0;
            in >> v;
            set->features.push_back(v);
        }
        if (!in) throw std::runtime_error("truncated dataset file: " + path);
    }
    if (data.train.size() == 0 || data.test.size() == 0)
        throw std::runtime_error("dataset must contain both train and test rows: " + path);
    data.build_class_index();
    return data;
}

}  // namespace hfl
