#include "glyphlab/ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace glyphlab {

Tensor relu(const Tensor& x) {
    Tensor out(x.shape());
    for (std::size_t i = 0; i < x.numel(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
    return out;
}

Tensor relu_backward(const Tensor& x, const Tensor& upstream) {
    if (!x.same_shape(upstream)) throw std::invalid_argument("relu_backward: shape mismatch");
    Tensor out(x.shape());
    for (std::size_t i = 0; i < x.numel(); ++i) out[i] = x[i] > 0.0 ? upstream[i] : 0.0;
    return out;
}

double sigmoid_scalar(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double ex = std::exp(x);
    return ex / (1.0 + ex);
}

Tensor sigmoid(const Tensor& x) {
    Tensor out(x.shape());
    for (std::size_t i = 0; i < x.numel(); ++i) out[i] = sigmoid_scalar(x[i]);
    return out;
}

Tensor sigmoid_backward_from_output(const Tensor& y, const Tensor& upstream) {
    if (!y.same_shape(upstream)) throw std::invalid_argument("sigmoid_backward: shape mismatch");
    Tensor out(y.shape());
    for (std::size_t i = 0; i < y.numel(); ++i) out[i] = upstream[i] * y[i] * (1.0 - y[i]);
    return out;
}

void softmax_rows_inplace(double* z, std::size_t n_rows, std::size_t n_cols) {
    for (std::size_t r = 0; r < n_rows; ++r) {
        double* row = z + r * n_cols;
        double m = row[0];
        for (std::size_t c = 1; c < n_cols; ++c) m = std::max(m, row[c]);
        double sum = 0.0;
        for (std::size_t c = 0; c < n_cols; ++c) {
            row[c] = std::exp(row[c] - m);
            sum += row[c];
        }
        const double inv = 1.0 / sum;
        for (std::size_t c = 0; c < n_cols; ++c) row[c] *= inv;
    }
}

std::vector<double> softmax_row(const std::vector<double>& z) {
    if (z.empty()) throw std::invalid_argument("softmax_row: empty input");
    std::vector<double> out = z;
    softmax_rows_inplace(out.data(), 1, out.size());
    return out;
}

namespace {
constexpr double kRhoClamp = 1e-10;
}

double kl_sparsity(double rho, double rho_hat) {
    if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("kl_sparsity: rho must be in (0,1)");
    const double q = std::clamp(rho_hat, kRhoClamp, 1.0 - kRhoClamp);
    // Floored at 0: cancellation can otherwise yield tiny negatives near q == rho.
    return std::max(0.0, rho * std::log(rho / q) +
                             (1.0 - rho) * std::log((1.0 - rho) / (1.0 - q)));
}

double kl_sparsity_grad(double rho, double rho_hat) {
    if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("kl_sparsity: rho must be in (0,1)");
    const double q = std::clamp(rho_hat, kRhoClamp, 1.0 - kRhoClamp);
    return -rho / q + (1.0 - rho) / (1.0 - q);
}

double cross_entropy(const std::vector<double>& target, const std::vector<double>& pred) {
    if (target.size() != pred.size())
        throw std::invalid_argument("cross_entropy: dimension mismatch");
    double sum = 0.0;
    for (double p : pred) sum += p;
    if (std::abs(sum - 1.0) > 1e-6)
        throw std::invalid_argument("cross_entropy: pred does not sum to 1");
    double loss = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
        if (target[i] != 0.0)
            loss -= target[i] * std::log(std::clamp(pred[i], kProbClamp, 1.0));
    }
    return loss;
}

Tensor conv2d_valid(const Tensor& image, const Tensor& kernel, double bias) {
    if (image.rank() != 2 || kernel.rank() != 2)
        throw std::invalid_argument("conv2d_valid: expects 2-D image and kernel");
    const std::size_t h = image.rows(), w = image.cols();
    const std::size_t k = kernel.rows();
    if (kernel.cols() != k) throw std::invalid_argument("conv2d_valid: kernel must be square");
    if (k > h || k > w) throw std::invalid_argument("conv2d_valid: kernel larger than image");
    const std::size_t oh = h - k + 1, ow = w - k + 1;
    Tensor out({oh, ow});
    for (std::size_t i = 0; i < oh; ++i) {
        for (std::size_t j = 0; j < ow; ++j) {
            double acc = bias;
            for (std::size_t u = 0; u < k; ++u) {
                const double* irow = image.data() + (i + u) * w + j;
                const double* krow = kernel.data() + u * k;
                for (std::size_t v = 0; v < k; ++v) acc += irow[v] * krow[v];
            }
            out.at(i, j) = acc;
        }
    }
    return out;
}

Tensor conv2d_grad_kernel(const Tensor& image, const Tensor& upstream, std::size_t k) {
    const std::size_t h = image.rows(), w = image.cols();
    const std::size_t oh = upstream.rows(), ow = upstream.cols();
    if (oh != h - k + 1 || ow != w - k + 1)
        throw std::invalid_argument("conv2d_grad_kernel: upstream shape mismatch");
    Tensor grad({k, k});
    for (std::size_t u = 0; u < k; ++u) {
        for (std::size_t v = 0; v < k; ++v) {
            double acc = 0.0;
            for (std::size_t i = 0; i < oh; ++i) {
                const double* irow = image.data() + (i + u) * w + v;
                const double* grow = upstream.data() + i * ow;
                for (std::size_t j = 0; j < ow; ++j) acc += irow[j] * grow[j];
            }
            grad.at(u, v) = acc;
        }
    }
    return grad;
}

Tensor conv2d_grad_image(const Tensor& kernel, const Tensor& upstream,
                         std::size_t in_h, std::size_t in_w) {
    const std::size_t k = kernel.rows();
    const std::size_t oh = upstream.rows(), ow = upstream.cols();
    if (oh != in_h - k + 1 || ow != in_w - k + 1)
        throw std::invalid_argument("conv2d_grad_image: upstream shape mismatch");
    Tensor grad({in_h, in_w});
    for (std::size_t i = 0; i < oh; ++i) {
        for (std::size_t j = 0; j < ow; ++j) {
            const double g = upstream.at(i, j);
            if (g == 0.0) continue;
            for (std::size_t u = 0; u < k; ++u) {
                double* row = grad.data() + (i + u) * in_w + j;
                const double* krow = kernel.data() + u * k;
                for (std::size_t v = 0; v < k; ++v) row[v] += g * krow[v];
            }
        }
    }
    return grad;
}

PoolResult maxpool_2x2(const Tensor& map) {
    if (map.rank() != 2) throw std::invalid_argument("maxpool_2x2: expects 2-D input");
    const std::size_t h = map.rows(), w = map.cols();
    if (h < 2 || w < 2) throw std::invalid_argument("maxpool_2x2: input smaller than 2x2");
    const std::size_t oh = h / 2, ow = w / 2;
    PoolResult res{Tensor({oh, ow}), std::vector<std::size_t>(oh * ow)};
    for (std::size_t i = 0; i < oh; ++i) {
        for (std::size_t j = 0; j < ow; ++j) {
            std::size_t best = (2 * i) * w + 2 * j;
            double best_v = map[best];
            const std::size_t cand[3] = {(2 * i) * w + 2 * j + 1,
                                         (2 * i + 1) * w + 2 * j,
                                         (2 * i + 1) * w + 2 * j + 1};
            for (std::size_t c : cand) {
                if (map[c] > best_v) {
                    best_v = map[c];
                    best = c;
                }
            }
            res.output.at(i, j) = best_v;
            res.argmax[i * ow + j] = best;
        }
    }
    return res;
}

Tensor maxpool_2x2_backward(const PoolResult& pooled, const Tensor& upstream,
                            std::size_t in_h, std::size_t in_w) {
    if (!pooled.output.same_shape(upstream))
        throw std::invalid_argument("maxpool_2x2_backward: shape mismatch");
    Tensor grad({in_h, in_w});
    for (std::size_t i = 0; i < upstream.numel(); ++i)
        grad[pooled.argmax[i]] += upstream[i];
    return grad;
}

}  // namespace glyphlab
