// Writes a synthetic desk-scale dataset in the simulator's dataset file
// format. Defaults reproduce the bundled dataset used by the acceptance
// suite.

#include <iostream>

#include <CLI11.hpp>

#include "hflsim/dataset.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Generate a synthetic labeled dataset for hflsim"};

    hfl::SyntheticSpec spec;
    std::string out_path;
    app.add_option("--out", out_path, "Output dataset file")->required();
    app.add_option("--seed", spec.seed, "Generator seed");
    app.add_option("--feature-dim", spec.feature_dim, "Feature dimension");
    app.add_option("--classes", spec.num_classes, "Number of classes");
    app.add_option("--train-per-class", spec.train_per_class, "Train samples per class");
    app.add_option("--test-per-class", spec.test_per_class, "Held-out test samples per class");
    app.add_option("--separation", spec.separation, "Distance of class means from the origin");
    app.add_option("--noise", spec.noise, "Within-class noise standard deviation");

    CLI11_PARSE(app, argc, argv);

    try {
        const auto data = hfl::make_synthetic(spec);
        hfl::save_dataset(data, out_path);
        std::cout << "wrote " << out_path << ": dim " << spec.feature_dim << ", "
                  << spec.num_classes << " classes, " << data.train.size() << " train / "
                  << data.test.size() << " test samples\n";
    } catch (const std::exception& e) {
        std::cerr << "hflsim-datagen: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
