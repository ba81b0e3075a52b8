#include "glyphlab/presets.hpp"

#include <stdexcept>

namespace glyphlab {

namespace {

AETrainConfig ae_layer(int hidden, int iters, double lr, double l2, double rho) {
    AETrainConfig cfg;
    cfg.hidden_size = hidden;
    cfg.iterations = iters;
    cfg.learning_rate = lr;
    cfg.l2_weight = l2;
    cfg.sparsity_weight = 4.0;
    cfg.sparsity_target = rho;
    return cfg;
}

}  // namespace

AePreset ae_preset(int hidden_layers) {
    if (hidden_layers != 2 && hidden_layers != 3)
        throw std::invalid_argument("ae preset: depth must be 2 or 3");
    AePreset preset;
    preset.layers.push_back(ae_layer(100, 350, 0.15, 0.004, 0.15));
    if (hidden_layers == 3) preset.layers.push_back(ae_layer(100, 300, 0.1, 0.002, 0.1));
    preset.layers.push_back(ae_layer(50, hidden_layers == 3 ? 350 : 300, 0.1, 0.002, 0.1));
    preset.head_iterations = 100;
    preset.head_l2 = 0.002;
    preset.fine_tune_iterations = 300;
    preset.fine_tune_l2 = 0.0005;
    return preset;
}

CnnSpec cnn_preset(int hidden_layers, std::size_t num_classes) {
    if (hidden_layers != 2 && hidden_layers != 3)
        throw std::invalid_argument("cnn preset: depth must be 2 or 3");
    CnnSpec spec;
    spec.blocks = {CnnBlockSpec{8, 3, true}, CnnBlockSpec{16, 3, true}};
    spec.num_classes = static_cast<int>(num_classes);
    if (hidden_layers == 2) {
        spec.fc_sizes = {100, 50};
        spec.fc_decays = {0.09, 0.06};
    } else {
        spec.fc_sizes = {100, 100, 50};
        spec.fc_decays = {0.09, 0.06, 0.06};
    }
    validate_cnn_spec(spec);
    return spec;
}

CnnTrainOptions cnn_train_preset(std::uint64_t seed) {
    CnnTrainOptions opts;
    opts.epochs = 20;
    opts.batch_size = 16;
    opts.learning_rate = 0.001;
    opts.seed = seed;
    return opts;
}

}  // namespace glyphlab
