#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "glyphlab/tensor.hpp"

namespace glyphlab {

// Additive decomposition of a training objective. total is always the exact
// sum of the three parts in the arithmetic used.
struct LossBreakdown {
    double reconstruction = 0.0;
    double l2_penalty = 0.0;
    double sparsity_penalty = 0.0;
    double total = 0.0;
};

// Elementwise max(0, x).
Tensor relu(const Tensor& x);
// d/dx of sum(upstream .* relu(x)); slope at x == 0 is taken as 0.
Tensor relu_backward(const Tensor& x, const Tensor& upstream);

// Elementwise logistic 1/(1 + e^-x), evaluated in the overflow-free branch.
Tensor sigmoid(const Tensor& x);
double sigmoid_scalar(double x);
// Backward given the forward *output* y: upstream .* y .* (1 - y).
Tensor sigmoid_backward_from_output(const Tensor& y, const Tensor& upstream);

// Shift-stable softmax of one row vector; output is nonnegative and sums to
// one within 1e-12 for any finite input.
std::vector<double> softmax_row(const std::vector<double>& z);
// In-place row-wise softmax over an N x K matrix stored row-major.
void softmax_rows_inplace(double* z, std::size_t n_rows, std::size_t n_cols);

// KL(rho || rho_hat) for Bernoulli means. rho must lie in (0,1); rho_hat is
// clamped to [1e-10, 1 - 1e-10] before evaluation so degenerate activations
// stay finite.
double kl_sparsity(double rho, double rho_hat);
// Derivative w.r.t. rho_hat, evaluated at the clamped value.
double kl_sparsity_grad(double rho, double rho_hat);

inline constexpr double kProbClamp = 1e-12;  // cross-entropy probability floor

// -sum_i t_i * ln(clamp(p_i, 1e-12, 1)). target must be the same length as
// pred and pred must sum to 1 within 1e-6.
double cross_entropy(const std::vector<double>& target, const std::vector<double>& pred);

// Valid cross-correlation: out[i,j] = bias + sum_{u,v} image[i+u, j+v] * kernel[u,v].
// No kernel flip; the same convention is used by the backward passes.
Tensor conv2d_valid(const Tensor& image, const Tensor& kernel, double bias);
// Gradients of sum(upstream .* conv2d_valid(image, kernel, bias)).
Tensor conv2d_grad_kernel(const Tensor& image, const Tensor& upstream, std::size_t k);
Tensor conv2d_grad_image(const Tensor& kernel, const Tensor& upstream,
                         std::size_t in_h, std::size_t in_w);

// 2x2 max pooling with stride 2. Odd trailing row/column is dropped, so the
// output is floor(H/2) x floor(W/2). Ties break on the first cell in
// row-major window order. argmax holds the flat input index feeding each
// output cell, for backward routing.
struct PoolResult {
    Tensor output;
    std::vector<std::size_t> argmax;
};
PoolResult maxpool_2x2(const Tensor& map);
// Routes each upstream value to its recorded argmax cell; zero elsewhere.
Tensor maxpool_2x2_backward(const PoolResult& pooled, const Tensor& upstream,
                            std::size_t in_h, std::size_t in_w);

}  // namespace glyphlab
