#include "glyphlab/autoencoder.hpp"

#include <Eigen/Core>
#include <cmath>
#include <random>
#include <stdexcept>

#include "glyphlab/scg.hpp"
#include "glyphlab/util.hpp"

namespace glyphlab {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MMap = Eigen::Map<RowMat>;
using CMMap = Eigen::Map<const RowMat>;
using VMap = Eigen::Map<Eigen::VectorXd>;
using CVMap = Eigen::Map<const Eigen::VectorXd>;

Eigen::Index idx(std::size_t v) { return static_cast<Eigen::Index>(v); }

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

void glorot_fill(Tensor& w, std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& v : w.values()) v = uniform(rng, -limit, limit);
}

void sigmoid_inplace(Tensor& t) {
    for (double& v : t.values()) v = sigmoid_scalar(v);
}

// Appends src's elements to dst (used by the pack functions).
void append(std::vector<double>& dst, const Tensor& t) {
    dst.insert(dst.end(), t.values().begin(), t.values().end());
}

std::size_t take(const std::vector<double>& src, std::size_t offset, Tensor& t) {
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(offset), t.numel(),
                t.values().begin());
    return offset + t.numel();
}

MinimizeResult run_optimizer(const ValueGradFn& objective, std::vector<double> theta0,
                             int iterations, Optimizer opt, double learning_rate,
                             const std::function<void(std::size_t, double)>& on_accept = {}) {
    if (opt == Optimizer::kScg) {
        ScgOptions o;
        o.max_iters = static_cast<std::size_t>(iterations);
        return scg_minimize(objective, std::move(theta0), o, on_accept);
    }
    GdOptions o;
    o.max_iters = static_cast<std::size_t>(iterations);
    o.learning_rate = learning_rate;
    return gd_minimize(objective, std::move(theta0), o, on_accept);
}

// Softmax scores for features F (N x h) under head (K x h, K): writes
// probabilities into out (N x K).
void head_probabilities(const SoftmaxHead& head, const Tensor& features, Tensor& out) {
    const std::size_t n = features.rows(), h = features.cols(), k = head.W.rows();
    if (head.W.cols() != h)
        throw std::invalid_argument("predict: feature width does not match head");
    out = Tensor({n, k});
    MMap s(out.data(), idx(n), idx(k));
    s.noalias() = CMMap(features.data(), idx(n), idx(h)) *
                  CMMap(head.W.data(), idx(k), idx(h)).transpose();
    s.rowwise() += CVMap(head.b.data(), idx(k)).transpose();
    softmax_rows_inplace(out.data(), n, k);
}

int argmax_row(const double* row, std::size_t k) {
    int best = 0;
    for (std::size_t j = 1; j < k; ++j)
        if (row[j] > row[best]) best = static_cast<int>(j);
    return best;
}

void check_labels(const std::vector<int>& labels, std::size_t n, std::size_t num_classes) {
    if (labels.size() != n)
        throw std::invalid_argument("labels length does not match batch rows");
    for (int y : labels)
        if (y < 0 || static_cast<std::size_t>(y) >= num_classes)
            throw std::invalid_argument("label " + std::to_string(y) + " outside 0.." +
                                        std::to_string(num_classes - 1));
}

}  // namespace

Tensor encode(const AELayer& layer, const Tensor& batch) {
    const std::size_t n = batch.rows(), d = batch.cols(), h = layer.W_enc.rows();
    if (layer.W_enc.cols() != d)
        throw std::invalid_argument("encode: input width " + std::to_string(d) +
                                    " does not match layer input " +
                                    std::to_string(layer.W_enc.cols()));
    Tensor out({n, h});
    MMap a(out.data(), idx(n), idx(h));
    a.noalias() = CMMap(batch.data(), idx(n), idx(d)) *
                  CMMap(layer.W_enc.data(), idx(h), idx(d)).transpose();
    a.rowwise() += CVMap(layer.b_enc.data(), idx(h)).transpose();
    sigmoid_inplace(out);
    return out;
}

Tensor encode_stack(const AEStack& stack, const Tensor& batch) {
    Tensor cur = batch;
    for (const AELayer& layer : stack.layers) cur = encode(layer, cur);
    return cur;
}

std::vector<double> pack_layer(const AELayer& layer) {
    std::vector<double> theta;
    theta.reserve(layer.W_enc.numel() + layer.b_enc.numel() + layer.W_dec.numel() +
                  layer.b_dec.numel());
    append(theta, layer.W_enc);
    append(theta, layer.b_enc);
    append(theta, layer.W_dec);
    append(theta, layer.b_dec);
    return theta;
}

void unpack_layer(const std::vector<double>& theta, AELayer& layer) {
    std::size_t off = 0;
    off = take(theta, off, layer.W_enc);
    off = take(theta, off, layer.b_enc);
    off = take(theta, off, layer.W_dec);
    off = take(theta, off, layer.b_dec);
    if (off != theta.size())
        throw std::invalid_argument("unpack_layer: parameter count mismatch");
}

std::pair<LossBreakdown, std::vector<double>> ae_objective(const AELayer& layer,
                                                           const Tensor& batch,
                                                           const AETrainConfig& cfg) {
    const std::size_t n = batch.rows(), d = batch.cols(), h = layer.W_enc.rows();
    if (layer.W_enc.cols() != d || layer.W_dec.rows() != d || layer.W_dec.cols() != h ||
        layer.b_enc.numel() != h || layer.b_dec.numel() != d)
        throw std::invalid_argument("ae_objective: inconsistent layer shapes");
    const double inv_n = 1.0 / static_cast<double>(n);

    CMMap x(batch.data(), idx(n), idx(d));
    CMMap w_enc(layer.W_enc.data(), idx(h), idx(d));
    CMMap w_dec(layer.W_dec.data(), idx(d), idx(h));

    Tensor a1t({n, h});
    MMap a1(a1t.data(), idx(n), idx(h));
    a1.noalias() = x * w_enc.transpose();
    a1.rowwise() += CVMap(layer.b_enc.data(), idx(h)).transpose();
    sigmoid_inplace(a1t);

    Tensor a2t({n, d});
    MMap a2(a2t.data(), idx(n), idx(d));
    a2.noalias() = a1 * w_dec.transpose();
    a2.rowwise() += CVMap(layer.b_dec.data(), idx(d)).transpose();
    sigmoid_inplace(a2t);

    LossBreakdown loss;
    loss.reconstruction = inv_n * (a2 - x).squaredNorm();
    loss.l2_penalty = cfg.l2_weight * (w_enc.squaredNorm() + w_dec.squaredNorm());

    Eigen::VectorXd rho_hat = a1.colwise().mean();
    for (Eigen::Index j = 0; j < rho_hat.size(); ++j)
        loss.sparsity_penalty += kl_sparsity(cfg.sparsity_target, rho_hat[j]);
    loss.sparsity_penalty *= cfg.sparsity_weight;
    loss.total = loss.reconstruction + loss.l2_penalty + loss.sparsity_penalty;

    std::vector<double> grad(h * d + h + d * h + d);
    MMap g_enc(grad.data(), idx(h), idx(d));
    VMap gb_enc(grad.data() + h * d, idx(h));
    MMap g_dec(grad.data() + h * d + h, idx(d), idx(h));
    VMap gb_dec(grad.data() + h * d + h + d * h, idx(d));

    // Reuse a2t as the decoder delta: (2/N)(a2 - x) . a2 . (1 - a2).
    {
        double* a2p = a2t.data();
        const double* xp = batch.data();
        for (std::size_t i = 0; i < n * d; ++i) {
            const double a = a2p[i];
            a2p[i] = 2.0 * inv_n * (a - xp[i]) * a * (1.0 - a);
        }
    }
    g_dec.noalias() = a2.transpose() * a1;
    g_dec += 2.0 * cfg.l2_weight * w_dec;
    gb_dec = a2.colwise().sum();

    Tensor d1t({n, h});
    MMap d1(d1t.data(), idx(n), idx(h));
    d1.noalias() = a2 * w_dec;
    {
        Eigen::VectorXd kg(rho_hat.size());
        for (Eigen::Index j = 0; j < rho_hat.size(); ++j)
            kg[j] = cfg.sparsity_weight * inv_n *
                    kl_sparsity_grad(cfg.sparsity_target, rho_hat[j]);
        d1.rowwise() += kg.transpose();
    }
    {
        double* d1p = d1t.data();
        const double* a1p = a1t.data();
        for (std::size_t i = 0; i < n * h; ++i) d1p[i] *= a1p[i] * (1.0 - a1p[i]);
    }
    g_enc.noalias() = d1.transpose() * x;
    g_enc += 2.0 * cfg.l2_weight * w_enc;
    gb_enc = d1.colwise().sum();

    return {loss, std::move(grad)};
}

AEStack pretrain_stack(const Tensor& batch, const std::vector<AETrainConfig>& cfgs,
                       std::uint64_t seed, Optimizer opt) {
    if (cfgs.empty()) throw std::invalid_argument("pretrain_stack: no layer configs");

    AEStack stack;
    Tensor cur = batch;
    for (std::size_t t = 0; t < cfgs.size(); ++t) {
        const AETrainConfig& cfg = cfgs[t];
        if (cfg.hidden_size < 1)
            throw std::invalid_argument("pretrain_stack: hidden size must be >= 1");
        const std::size_t d = cur.cols(), h = static_cast<std::size_t>(cfg.hidden_size);

        AELayer layer{Tensor({h, d}), Tensor({h}), Tensor({d, h}), Tensor({d})};
        std::mt19937_64 rng(mix_seed(seed, t, 0xAE1));
        glorot_fill(layer.W_enc, d, h, rng);
        glorot_fill(layer.W_dec, h, d, rng);

        AELayer scratch = layer;
        const ValueGradFn objective = [&](const std::vector<double>& theta,
                                          std::vector<double>& grad) {
            unpack_layer(theta, scratch);
            auto [loss, g] = ae_objective(scratch, cur, cfg);
            grad = std::move(g);
            return loss.total;
        };
        MinimizeResult res =
            run_optimizer(objective, pack_layer(layer), cfg.iterations, opt, cfg.learning_rate);
        unpack_layer(res.theta, layer);

        cur = encode(layer, cur);
        stack.layers.push_back(std::move(layer));
    }
    return stack;
}

SoftmaxHead train_softmax_head(const Tensor& features, const std::vector<int>& labels,
                               std::size_t num_classes, int iterations, double l2_weight,
                               Optimizer opt, double learning_rate) {
    const std::size_t n = features.rows(), h = features.cols();
    if (num_classes < 1) throw std::invalid_argument("train_softmax_head: no classes");
    check_labels(labels, n, num_classes);
    const double inv_n = 1.0 / static_cast<double>(n);

    SoftmaxHead head{Tensor({num_classes, h}), Tensor({num_classes})};
    SoftmaxHead scratch = head;

    const ValueGradFn objective = [&](const std::vector<double>& theta,
                                      std::vector<double>& grad) {
        std::size_t off = take(theta, 0, scratch.W);
        take(theta, off, scratch.b);

        Tensor probs;
        head_probabilities(scratch, features, probs);
        double ce = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            ce -= std::log(std::max(probs.at(i, static_cast<std::size_t>(labels[i])),
                                    kProbClamp));
        ce *= inv_n;
        const double l2 =
            l2_weight * CMMap(scratch.W.data(), idx(num_classes), idx(h)).squaredNorm();

        // probs -> (1/N)(P - Y)
        for (std::size_t i = 0; i < n; ++i) {
            double* row = probs.data() + i * num_classes;
            row[static_cast<std::size_t>(labels[i])] -= 1.0;
            for (std::size_t j = 0; j < num_classes; ++j) row[j] *= inv_n;
        }
        grad.assign(theta.size(), 0.0);
        MMap g_w(grad.data(), idx(num_classes), idx(h));
        VMap g_b(grad.data() + num_classes * h, idx(num_classes));
        g_w.noalias() = CMMap(probs.data(), idx(n), idx(num_classes)).transpose() *
                        CMMap(features.data(), idx(n), idx(h));
        g_w += 2.0 * l2_weight * CMMap(scratch.W.data(), idx(num_classes), idx(h));
        g_b = CMMap(probs.data(), idx(n), idx(num_classes)).colwise().sum();
        return ce + l2;
    };

    std::vector<double> theta0(num_classes * h + num_classes, 0.0);
    MinimizeResult res = run_optimizer(objective, std::move(theta0), iterations, opt,
                                       learning_rate);
    std::size_t off = take(res.theta, 0, head.W);
    take(res.theta, off, head.b);
    return head;
}

std::vector<double> pack_trainable(const AEStack& stack) {
    std::vector<double> theta;
    for (const AELayer& layer : stack.layers) {
        append(theta, layer.W_enc);
        append(theta, layer.b_enc);
    }
    append(theta, stack.head.W);
    append(theta, stack.head.b);
    return theta;
}

void unpack_trainable(const std::vector<double>& theta, AEStack& stack) {
    std::size_t off = 0;
    for (AELayer& layer : stack.layers) {
        off = take(theta, off, layer.W_enc);
        off = take(theta, off, layer.b_enc);
    }
    off = take(theta, off, stack.head.W);
    off = take(theta, off, stack.head.b);
    if (off != theta.size())
        throw std::invalid_argument("unpack_trainable: parameter count mismatch");
}

double stack_objective(AEStack& scratch, const std::vector<double>& theta, const Tensor& batch,
                       const std::vector<int>& labels, double l2_weight,
                       std::vector<double>& grad, double* error_pct) {
    unpack_trainable(theta, scratch);
    const std::size_t n = batch.rows();
    const std::size_t k = scratch.head.W.rows();
    check_labels(labels, n, k);
    const double inv_n = 1.0 / static_cast<double>(n);

    // Forward, keeping every activation for the backward sweep.
    std::vector<Tensor> acts;
    acts.reserve(scratch.layers.size() + 1);
    acts.push_back(batch);
    for (const AELayer& layer : scratch.layers) acts.push_back(encode(layer, acts.back()));

    Tensor probs;
    head_probabilities(scratch.head, acts.back(), probs);

    double ce = 0.0;
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = probs.data() + i * k;
        ce -= std::log(std::max(row[static_cast<std::size_t>(labels[i])], kProbClamp));
        if (argmax_row(row, k) != labels[i]) ++wrong;
    }
    ce *= inv_n;
    if (error_pct) *error_pct = 100.0 * static_cast<double>(wrong) * inv_n;

    double l2 = CMMap(scratch.head.W.data(), idx(k), idx(scratch.head.W.cols())).squaredNorm();
    for (const AELayer& layer : scratch.layers)
        l2 += CMMap(layer.W_enc.data(), idx(layer.W_enc.rows()), idx(layer.W_enc.cols()))
                  .squaredNorm();
    l2 *= l2_weight;

    // Backward. probs -> (1/N)(P - Y).
    for (std::size_t i = 0; i < n; ++i) {
        double* row = probs.data() + i * k;
        row[static_cast<std::size_t>(labels[i])] -= 1.0;
        for (std::size_t j = 0; j < k; ++j) row[j] *= inv_n;
    }

    grad.assign(theta.size(), 0.0);
    const std::size_t h_last = acts.back().cols();
    std::size_t head_off = theta.size() - k * h_last - k;
    MMap g_hw(grad.data() + head_off, idx(k), idx(h_last));
    VMap g_hb(grad.data() + head_off + k * h_last, idx(k));
    CMMap g_delta(probs.data(), idx(n), idx(k));
    g_hw.noalias() =
        g_delta.transpose() * CMMap(acts.back().data(), idx(n), idx(h_last));
    g_hw += 2.0 * l2_weight * CMMap(scratch.head.W.data(), idx(k), idx(h_last));
    g_hb = g_delta.colwise().sum();

    // Delta flowing into the top activation.
    Tensor delta_t({n, h_last});
    MMap delta(delta_t.data(), idx(n), idx(h_last));
    delta.noalias() =
        g_delta * CMMap(scratch.head.W.data(), idx(k), idx(h_last));

    std::size_t off_end = head_off;  // one past the current layer's block
    for (std::size_t t = scratch.layers.size(); t-- > 0;) {
        const AELayer& layer = scratch.layers[t];
        const std::size_t h = layer.W_enc.rows(), d = layer.W_enc.cols();
        {
            double* dp = delta_t.data();
            const double* ap = acts[t + 1].data();
            for (std::size_t i = 0; i < n * h; ++i) dp[i] *= ap[i] * (1.0 - ap[i]);
        }
        const std::size_t off = off_end - (h * d + h);
        MMap g_w(grad.data() + off, idx(h), idx(d));
        VMap g_b(grad.data() + off + h * d, idx(h));
        CMMap cur_delta(delta_t.data(), idx(n), idx(h));
        g_w.noalias() = cur_delta.transpose() * CMMap(acts[t].data(), idx(n), idx(d));
        g_w += 2.0 * l2_weight * CMMap(layer.W_enc.data(), idx(h), idx(d));
        g_b = cur_delta.colwise().sum();

        if (t > 0) {
            Tensor next({n, d});
            MMap nd(next.data(), idx(n), idx(d));
            nd.noalias() = cur_delta * CMMap(layer.W_enc.data(), idx(h), idx(d));
            delta_t = std::move(next);
        }
        off_end = off;
    }
    return ce + l2;
}

RunHistory fine_tune(AEStack& stack, const Tensor& batch, const std::vector<int>& labels,
                     int iterations, double l2_weight, Optimizer opt, double learning_rate) {
    if (!stack.has_head()) throw std::invalid_argument("fine_tune: stack has no head");
    if (iterations <= 0) return {};

    AEStack scratch = stack;
    double last_error = 0.0;
    const ValueGradFn objective = [&](const std::vector<double>& theta,
                                      std::vector<double>& grad) {
        return stack_objective(scratch, theta, batch, labels, l2_weight, grad, &last_error);
    };
    RunHistory history;
    const auto on_accept = [&](std::size_t step, double value) {
        history.push_back({static_cast<int>(step), value, last_error});
    };
    MinimizeResult res = run_optimizer(objective, pack_trainable(stack), iterations, opt,
                                       learning_rate, on_accept);
    unpack_trainable(res.theta, stack);
    return history;
}

std::pair<std::vector<int>, Tensor> predict_ae(const AEStack& stack, const Tensor& batch) {
    if (!stack.has_head()) throw std::invalid_argument("predict_ae: stack has no head");
    const Tensor features = encode_stack(stack, batch);
    Tensor probs;
    head_probabilities(stack.head, features, probs);
    const std::size_t n = probs.rows(), k = probs.cols();
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = argmax_row(probs.data() + i * k, k);
    return {std::move(labels), std::move(probs)};
}

}  // namespace glyphlab
