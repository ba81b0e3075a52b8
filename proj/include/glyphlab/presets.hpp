#pragma once

#include <cstddef>

#include "glyphlab/autoencoder.hpp"
#include "glyphlab/cnn.hpp"

namespace glyphlab {

// Everything the stacked-autoencoder recipe needs: the per-layer greedy
// pretraining schedule plus the shared supervised settings for the softmax
// head and the joint fine-tuning pass.
struct AePreset {
    std::vector<AETrainConfig> layers;
    int head_iterations = 100;
    double head_l2 = 0.002;
    // Joint fine-tuning runs much longer than the head stage and nearly
    // unregularized: the deeper stack needs the extra iterations to converge,
    // and a strong shared L2 taxes its extra encoder hard enough to invert
    // the depth ordering.
    int fine_tune_iterations = 300;
    double fine_tune_l2 = 0.0005;
    // Consumed only by the gradient-descent fallback.
    double supervised_learning_rate = 0.1;
};

// hidden_layers selects the stack: 2 -> 100-50, 3 -> 100-100-50. Layer
// schedules are 350/300(/350) iterations with learning rates 0.15/0.1(/0.1),
// L2 0.004/0.002(/0.002) and sparsity targets 0.15/0.1(/0.1) at weight 4.
// The supervised stage trains the head for 100 iterations at L2 0.002 and
// fine-tunes the stack for 300 iterations at L2 0.0005. Throws
// std::invalid_argument for any other depth.
AePreset ae_preset(int hidden_layers);

// Fixed convolutional stem (8 then 16 filters, 3x3, each followed by 2x2
// max-pooling) and a fully-connected stage of hidden_layers layers:
// 2 -> 100-50, 3 -> 100-100-50, with per-layer weight decay 0.09/0.06(/0.06);
// the final classifier matrix shares the last hidden layer's decay and the
// conv kernels carry none. Throws std::invalid_argument for any other depth.
CnnSpec cnn_preset(int hidden_layers, std::size_t num_classes);

// The shared supervised recipe: 20 epochs, batch 16, rmsprop at 0.001.
CnnTrainOptions cnn_train_preset(std::uint64_t seed);

}  // namespace glyphlab
