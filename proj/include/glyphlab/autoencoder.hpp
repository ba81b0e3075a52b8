#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "glyphlab/ops.hpp"
#include "glyphlab/report.hpp"
#include "glyphlab/tensor.hpp"

namespace glyphlab {

enum class Optimizer { kScg, kGd };

// One sparse autoencoder layer; both halves use the logistic activation.
struct AELayer {
    Tensor W_enc;  // hidden x input
    Tensor b_enc;  // hidden
    Tensor W_dec;  // input x hidden
    Tensor b_dec;  // input
};

struct AETrainConfig {
    int hidden_size = 100;
    double l2_weight = 0.002;      // lambda, weights only
    double sparsity_weight = 4.0;  // beta
    double sparsity_target = 0.1;  // rho, must lie in (0,1)
    int iterations = 300;
    double learning_rate = 0.1;  // consumed only by the gradient-descent fallback
};

struct SoftmaxHead {
    Tensor W;  // classes x features
    Tensor b;  // classes
};

// Greedily pretrained encoder chain plus (once trained) a softmax head.
struct AEStack {
    std::vector<AELayer> layers;
    SoftmaxHead head;

    bool has_head() const { return head.W.rank() == 2; }
};

// sigmoid(X W_enc^T + b_enc) for an N x input batch -> N x hidden.
Tensor encode(const AELayer& layer, const Tensor& batch);
// All encoder layers in order.
Tensor encode_stack(const AEStack& stack, const Tensor& batch);

// Parameter vector layout for one layer: W_enc, b_enc, W_dec, b_dec, each
// row-major in declaration order.
std::vector<double> pack_layer(const AELayer& layer);
void unpack_layer(const std::vector<double>& theta, AELayer& layer);

// Objective for one layer on a batch (rows = samples):
//   (1/N) sum_n ||x_n - xhat_n||^2  +  lambda (||W_enc||_F^2 + ||W_dec||_F^2)
//   +  beta sum_j KL(rho || rhohat_j)
// with xhat = sigmoid(W_dec sigmoid(W_enc x + b_enc) + b_dec) and rhohat_j
// the batch-mean activation of hidden unit j. Biases carry no L2. The
// gradient covers all four blocks in pack_layer order.
std::pair<LossBreakdown, std::vector<double>> ae_objective(const AELayer& layer,
                                                           const Tensor& batch,
                                                           const AETrainConfig& cfg);

// Greedy layer-wise pretraining: layer 0 on the raw batch, layer t on the
// activations of layer t-1. Weight init is uniform within the symmetric
// Glorot bound, biases zero, drawn from a per-layer stream split off the
// seed, so earlier layers are bit-identical no matter how many layers
// follow. Throws std::invalid_argument on empty cfgs or a nonpositive
// hidden size.
AEStack pretrain_stack(const Tensor& batch, const std::vector<AETrainConfig>& cfgs,
                       std::uint64_t seed, Optimizer opt = Optimizer::kScg);

// Multinomial cross-entropy + l2_weight * ||W||_F^2 on frozen features,
// zero-initialized. Throws std::invalid_argument when a label falls outside
// [0, num_classes).
SoftmaxHead train_softmax_head(const Tensor& features, const std::vector<int>& labels,
                               std::size_t num_classes, int iterations, double l2_weight,
                               Optimizer opt = Optimizer::kScg, double learning_rate = 0.1);

// Trainable-parameter vector for fine-tuning: per layer (W_enc, b_enc), then
// head (W, b). Decoder halves are frozen diagnostics after pretraining.
std::vector<double> pack_trainable(const AEStack& stack);
void unpack_trainable(const std::vector<double>& theta, AEStack& stack);

// Cross-entropy + l2_weight * (sum ||W_enc||_F^2 + ||W_head||_F^2) over the
// packed trainables; fills grad and optionally the training error rate in
// percent. Exposed for the finite-difference tests.
double stack_objective(AEStack& scratch, const std::vector<double>& theta, const Tensor& batch,
                       const std::vector<int>& labels, double l2_weight,
                       std::vector<double>& grad, double* error_pct = nullptr);

// Joint supervised training of every encoder plus the head. Accepted steps
// never increase the objective (optimizer guarantee); zero iterations leaves
// the stack untouched. Returns one history point per accepted step.
RunHistory fine_tune(AEStack& stack, const Tensor& batch, const std::vector<int>& labels,
                     int iterations, double l2_weight, Optimizer opt = Optimizer::kScg,
                     double learning_rate = 0.1);

// Argmax of head probabilities; ties resolve to the lowest class index.
// Returns (labels, N x classes probability rows). Throws
// std::invalid_argument on an input-width mismatch.
std::pair<std::vector<int>, Tensor> predict_ae(const AEStack& stack, const Tensor& batch);

}  // namespace glyphlab
