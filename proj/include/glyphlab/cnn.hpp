#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "glyphlab/report.hpp"
#include "glyphlab/tensor.hpp"

namespace glyphlab {

struct CnnBlockSpec {
    int filters = 8;
    int kernel = 3;  // square kernels, valid convolution
    bool pool = true;
};

// Architecture: per block conv -> ReLU -> optional 2x2/2 maxpool; flatten
// (channel-major); hidden FC layers with ReLU; final FC to num_classes +
// softmax.
struct CnnSpec {
    std::vector<CnnBlockSpec> blocks;
    std::vector<int> fc_sizes;  // hidden FC widths; the classifier FC is implicit
    int num_classes = 10;
    // L2 coefficient on every weight matrix/kernel (never biases).
    double weight_decay = 0.0;
    // Optional per-hidden-FC-layer overrides; when nonempty (must match
    // fc_sizes), hidden FC i uses fc_decays[i] and the final classifier FC
    // uses fc_decays.back(); conv kernels keep weight_decay.
    std::vector<double> fc_decays;
};

// Throws std::invalid_argument when the spec is malformed or the shape
// algebra drives a spatial dimension below 1.
void validate_cnn_spec(const CnnSpec& spec);

// Flat parameter count; layout is blocks in order (kernels
// filter-major/channel-major/row-major, then biases), then each FC layer (W
// row-major, then b), ending with the classifier FC.
std::size_t cnn_param_count(const CnnSpec& spec);

// Glorot-uniform weights (fan_in/fan_out through each kernel or matrix),
// zero biases, from a stream split off the seed.
std::vector<double> cnn_init_params(const CnnSpec& spec, std::uint64_t seed);

// batch rows are flattened 28x28 images. Returns N x num_classes
// probability rows (all-zero parameters give exactly uniform rows).
Tensor cnn_forward(const CnnSpec& spec, const std::vector<double>& params,
                   const Tensor& batch);

// Mean cross-entropy over the batch plus the configured L2 terms; fills the
// gradient (same layout as params) and returns the loss.
double cnn_loss_grad(const CnnSpec& spec, const std::vector<double>& params,
                     const Tensor& batch, const std::vector<int>& labels,
                     std::vector<double>& grad);

// Argmax of cnn_forward rows; ties resolve to the lowest class index.
std::vector<int> cnn_predict(const CnnSpec& spec, const std::vector<double>& params,
                             const Tensor& batch);

struct RmsPropState {
    std::vector<double> cache;  // running mean of squared gradients
    double decay = 0.9;
    double epsilon = 1e-8;
    double learning_rate = 0.001;

    explicit RmsPropState(std::size_t n = 0) : cache(n, 0.0) {}
};

// cache <- decay*cache + (1-decay)*grad^2; params -= lr * grad/sqrt(cache+eps).
void rmsprop_step(RmsPropState& state, std::vector<double>& params,
                  const std::vector<double>& grad);

struct CnnTrainOptions {
    int epochs = 20;
    int batch_size = 16;
    std::uint64_t seed = 0;
    double learning_rate = 0.001;
};

// Mini-batch rmsprop with a seeded shuffle each epoch; the last short batch
// is kept. History records per-epoch mean training loss and the error rate
// on the validation set (on the training set when no validation rows are
// given). Throws std::invalid_argument when batch_size exceeds the sample
// count or is < 1.
std::pair<std::vector<double>, RunHistory> train_cnn(const CnnSpec& spec, const Tensor& train,
                                                     const std::vector<int>& train_labels,
                                                     const Tensor* valid,
                                                     const std::vector<int>* valid_labels,
                                                     const CnnTrainOptions& opts);

}  // namespace glyphlab
