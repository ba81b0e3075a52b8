#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "glyphlab/autoencoder.hpp"
#include "glyphlab/error.hpp"
#include "glyphlab/ops.hpp"
#include "glyphlab/presets.hpp"
#include "glyphlab/scg.hpp"

using namespace glyphlab;

namespace {

std::mt19937_64 rng(5150);

double urand(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Tensor random_tensor(std::vector<std::size_t> shape, double lo = 0.0, double hi = 1.0) {
    Tensor t(std::move(shape));
    for (double& v : t.values()) v = urand(lo, hi);
    return t;
}

// Relative error with an absolute floor: near-zero coordinates are measured
// absolutely, since central differences of an O(1) objective carry ~1e-11
// cancellation noise that would otherwise swamp a 1e-7-sized gradient.
double rel_err(double got, double want) {
    return std::abs(got - want) / std::max({std::abs(got), std::abs(want), 1e-3});
}

AELayer random_layer(std::size_t input, std::size_t hidden) {
    AELayer layer{Tensor({hidden, input}), Tensor({hidden}), Tensor({input, hidden}),
                  Tensor({input})};
    for (double& v : layer.W_enc.values()) v = urand(-0.5, 0.5);
    for (double& v : layer.b_enc.values()) v = urand(-0.2, 0.2);
    for (double& v : layer.W_dec.values()) v = urand(-0.5, 0.5);
    for (double& v : layer.b_dec.values()) v = urand(-0.2, 0.2);
    return layer;
}

// Tiny linearly separable batch: class = argmax over the first K pixels.
std::pair<Tensor, std::vector<int>> separable_toy(std::size_t n, std::size_t dim,
                                                  std::size_t k) {
    Tensor X({n, dim});
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t cls = i % k;
        for (std::size_t j = 0; j < dim; ++j) X.at(i, j) = urand(0.0, 0.2);
        X.at(i, cls) = urand(0.8, 1.0);
        y[i] = static_cast<int>(cls);
    }
    return {X, y};
}

}  // namespace

// ---------------------------------------------------------------------------
// Scaled conjugate gradient

TEST_CASE("scg solves a 10-dim quadratic to 1e-6 within 50 iterations") {
    // f(x) = 0.5 (x-c)' D (x-c) with known minimizer c.
    std::vector<double> c(10), d(10);
    for (int i = 0; i < 10; ++i) {
        c[static_cast<std::size_t>(i)] = urand(-2.0, 2.0);
        d[static_cast<std::size_t>(i)] = urand(0.5, 8.0);
    }
    ValueGradFn f = [&](const std::vector<double>& x, std::vector<double>& g) {
        double v = 0.0;
        for (std::size_t i = 0; i < 10; ++i) {
            const double e = x[i] - c[i];
            v += 0.5 * d[i] * e * e;
            g[i] = d[i] * e;
        }
        return v;
    };
    ScgOptions opts;
    opts.max_iters = 50;
    opts.grad_tol = 1e-12;
    const MinimizeResult res = scg_minimize(f, std::vector<double>(10, 0.0), opts);
    double dist = 0.0;
    for (std::size_t i = 0; i < 10; ++i)
        dist += (res.theta[i] - c[i]) * (res.theta[i] - c[i]);
    CHECK(std::sqrt(dist) <= 1e-6);
    CHECK(res.iterations <= 50);
    for (std::size_t i = 1; i < res.accepted_values.size(); ++i)
        CHECK(res.accepted_values[i] <= res.accepted_values[i - 1]);
}

TEST_CASE("scg accepted values never increase on a hard non-convex objective") {
    // Rosenbrock in 4 dims: plenty of rejected steps and damping action.
    ValueGradFn f = [](const std::vector<double>& x, std::vector<double>& g) {
        double v = 0.0;
        std::fill(g.begin(), g.end(), 0.0);
        for (std::size_t i = 0; i + 1 < x.size(); ++i) {
            const double a = x[i + 1] - x[i] * x[i];
            const double b = 1.0 - x[i];
            v += 100.0 * a * a + b * b;
            g[i] += -400.0 * a * x[i] - 2.0 * b;
            g[i + 1] += 200.0 * a;
        }
        return v;
    };
    ScgOptions opts;
    opts.max_iters = 500;
    const MinimizeResult res = scg_minimize(f, {-1.2, 1.0, -1.2, 1.0}, opts);
    REQUIRE(res.accepted_values.size() > 2);
    for (std::size_t i = 1; i < res.accepted_values.size(); ++i)
        CHECK(res.accepted_values[i] <= res.accepted_values[i - 1]);
}

TEST_CASE("scg terminates cleanly at a stationary start") {
    ValueGradFn f = [](const std::vector<double>& x, std::vector<double>& g) {
        double v = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            v += 0.5 * x[i] * x[i];
            g[i] = x[i];
        }
        return v;
    };
    const MinimizeResult res = scg_minimize(f, std::vector<double>(3, 0.0), {});
    CHECK(res.termination == "grad_tol");
    CHECK(res.theta == std::vector<double>(3, 0.0));
}

TEST_CASE("scg reports non-finite objectives as numerical errors") {
    ValueGradFn f = [](const std::vector<double>& x, std::vector<double>& g) {
        g.assign(x.size(), 1.0);
        return std::numeric_limits<double>::quiet_NaN();
    };
    CHECK_THROWS_AS(scg_minimize(f, {1.0, 2.0}, {}), NumericalError);
}

TEST_CASE("gd fallback descends a quadratic") {
    ValueGradFn f = [](const std::vector<double>& x, std::vector<double>& g) {
        double v = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            v += 0.5 * x[i] * x[i];
            g[i] = x[i];
        }
        return v;
    };
    GdOptions opts;
    opts.max_iters = 200;
    opts.learning_rate = 0.5;
    const MinimizeResult res = gd_minimize(f, {4.0, -3.0}, opts);
    CHECK(std::abs(res.theta[0]) < 1e-6);
    CHECK(res.accepted_values.front() > res.accepted_values.back());
}

// ---------------------------------------------------------------------------
// Sparse autoencoder objective

TEST_CASE("ae objective decomposes additively") {
    const AELayer layer = random_layer(6, 4);
    const Tensor batch = random_tensor({5, 6});
    AETrainConfig cfg;
    cfg.hidden_size = 4;
    cfg.l2_weight = 0.004;
    cfg.sparsity_weight = 4.0;
    cfg.sparsity_target = 0.15;

    const auto [loss, grad] = ae_objective(layer, batch, cfg);
    CHECK(loss.total == loss.reconstruction + loss.l2_penalty + loss.sparsity_penalty);
    CHECK(loss.reconstruction >= 0.0);
    CHECK(loss.l2_penalty >= 0.0);
    CHECK(loss.sparsity_penalty >= 0.0);
    CHECK(grad.size() == pack_layer(layer).size());

    // The L2 part is the closed form lambda * (||W_enc||^2 + ||W_dec||^2).
    double sq = 0.0;
    for (double v : layer.W_enc.values()) sq += v * v;
    for (double v : layer.W_dec.values()) sq += v * v;
    CHECK(rel_err(loss.l2_penalty, cfg.l2_weight * sq) < 1e-12);

    // Zero penalties when lambda = beta = 0.
    AETrainConfig bare = cfg;
    bare.l2_weight = 0.0;
    bare.sparsity_weight = 0.0;
    const auto [loss2, grad2] = ae_objective(layer, batch, bare);
    CHECK(loss2.l2_penalty == 0.0);
    CHECK(loss2.sparsity_penalty == 0.0);
    CHECK(loss2.total == loss2.reconstruction);
}

TEST_CASE("ae reconstruction loss vanishes only at a perfect identity") {
    // Hidden wide enough to represent the input, but sigmoids cannot hit 0/1;
    // instead check the loss is the exact mean squared residual.
    const AELayer layer = random_layer(4, 8);
    const Tensor batch = random_tensor({3, 4}, 0.1, 0.9);
    AETrainConfig cfg;
    cfg.hidden_size = 8;
    cfg.l2_weight = 0.0;
    cfg.sparsity_weight = 0.0;

    const auto [loss, grad] = ae_objective(layer, batch, cfg);
    const Tensor h = encode(layer, batch);
    double want = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            double z = layer.b_dec[j];
            for (std::size_t k = 0; k < 8; ++k) z += layer.W_dec.at(j, k) * h.at(i, k);
            const double e = batch.at(i, j) - sigmoid_scalar(z);
            want += e * e;
        }
    }
    want /= 3.0;
    CHECK(rel_err(loss.reconstruction, want) < 1e-12);
}

TEST_CASE("ae objective gradient matches finite differences on a 6-4-6 layer") {
    for (int trial = 0; trial < 5; ++trial) {
        AELayer layer = random_layer(6, 4);
        const Tensor batch = random_tensor({7, 6});
        AETrainConfig cfg;
        cfg.hidden_size = 4;
        cfg.l2_weight = 0.004;
        cfg.sparsity_weight = 4.0;
        cfg.sparsity_target = 0.15;

        std::vector<double> theta = pack_layer(layer);
        AELayer scratch = layer;
        auto value_at = [&](const std::vector<double>& t) {
            unpack_layer(t, scratch);
            return ae_objective(scratch, batch, cfg).first.total;
        };
        const auto [loss, grad] = ae_objective(layer, batch, cfg);
        for (std::size_t i = 0; i < theta.size(); ++i) {
            const double keep = theta[i];
            theta[i] = keep + 1e-5;
            const double fp = value_at(theta);
            theta[i] = keep - 1e-5;
            const double fm = value_at(theta);
            theta[i] = keep;
            CHECK(rel_err(grad[i], (fp - fm) / 2e-5) <= 1e-6);
        }
    }
}

TEST_CASE("greedy pretraining leaves earlier layers bit-identical") {
    const Tensor batch = random_tensor({12, 9});
    AETrainConfig l1;
    l1.hidden_size = 5;
    l1.iterations = 8;
    AETrainConfig l2 = l1;
    l2.hidden_size = 3;
    AETrainConfig l3 = l1;
    l3.hidden_size = 2;

    const AEStack two = pretrain_stack(batch, {l1, l2}, 77);
    const AEStack three = pretrain_stack(batch, {l1, l2, l3}, 77);
    REQUIRE(two.layers.size() == 2);
    REQUIRE(three.layers.size() == 3);
    for (std::size_t t = 0; t < 2; ++t) {
        CHECK(two.layers[t].W_enc.values() == three.layers[t].W_enc.values());
        CHECK(two.layers[t].b_enc.values() == three.layers[t].b_enc.values());
        CHECK(two.layers[t].W_dec.values() == three.layers[t].W_dec.values());
    }
    CHECK_FALSE(two.has_head());
    CHECK_THROWS_AS(pretrain_stack(batch, {}, 1), std::invalid_argument);
}

TEST_CASE("pretraining reduces the layer objective") {
    const Tensor batch = random_tensor({30, 12});
    AETrainConfig cfg;
    cfg.hidden_size = 6;
    cfg.iterations = 40;
    const AEStack stack = pretrain_stack(batch, {cfg}, 3);

    // Compare against the freshly initialized layer (iterations = 0 run).
    AETrainConfig zero = cfg;
    zero.iterations = 0;
    const AEStack init = pretrain_stack(batch, {zero}, 3);
    const double before = ae_objective(init.layers[0], batch, cfg).first.total;
    const double after = ae_objective(stack.layers[0], batch, cfg).first.total;
    CHECK(after < before);
}

// ---------------------------------------------------------------------------
// Softmax head + fine-tuning

TEST_CASE("softmax head probabilities are normalized and learn a separable toy") {
    const auto [X, y] = separable_toy(60, 8, 4);
    const SoftmaxHead head = train_softmax_head(X, y, 4, 150, 0.0);

    AEStack probe;  // headless encode: zero layers, head only
    probe.head = head;
    const auto [labels, probs] = predict_ae(probe, X);
    for (std::size_t i = 0; i < 60; ++i) {
        double sum = 0.0;
        for (std::size_t k = 0; k < 4; ++k) sum += probs.at(i, k);
        CHECK(std::abs(sum - 1.0) < 1e-9);
        CHECK(labels[i] == y[i]);
    }
    CHECK_THROWS_AS(train_softmax_head(X, {1}, 4, 10, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(train_softmax_head(X, std::vector<int>(60, 9), 4, 10, 0.0),
                    std::invalid_argument);
}

TEST_CASE("fine-tune gradient matches finite differences through the whole stack") {
    const Tensor batch = random_tensor({9, 6});
    std::vector<int> labels(9);
    for (std::size_t i = 0; i < 9; ++i) labels[i] = static_cast<int>(i % 3);

    AETrainConfig l1;
    l1.hidden_size = 5;
    l1.iterations = 4;
    AETrainConfig l2 = l1;
    l2.hidden_size = 4;
    AETrainConfig l3 = l1;
    l3.hidden_size = 3;

    // Both supported depths: gradient flow through two and three encoders.
    for (const std::vector<AETrainConfig>& cfgs :
         {std::vector<AETrainConfig>{l1, l2}, std::vector<AETrainConfig>{l1, l2, l3}}) {
        AEStack stack = pretrain_stack(batch, cfgs, 21);
        stack.head = train_softmax_head(encode_stack(stack, batch), labels, 3, 5, 0.002);

        AEStack scratch = stack;
        std::vector<double> theta = pack_trainable(stack);
        std::vector<double> grad(theta.size());
        stack_objective(scratch, theta, batch, labels, 0.002, grad);
        for (std::size_t i = 0; i < theta.size(); ++i) {
            std::vector<double> dummy(theta.size());
            const double keep = theta[i];
            theta[i] = keep + 1e-5;
            const double fp = stack_objective(scratch, theta, batch, labels, 0.002, dummy);
            theta[i] = keep - 1e-5;
            const double fm = stack_objective(scratch, theta, batch, labels, 0.002, dummy);
            theta[i] = keep;
            CHECK(rel_err(grad[i], (fp - fm) / 2e-5) <= 1e-6);
        }
    }
}

TEST_CASE("fine-tuning improves training accuracy on a separable toy and is monotone") {
    const auto [X, y] = separable_toy(40, 6, 3);
    AETrainConfig cfg;
    cfg.hidden_size = 5;
    cfg.iterations = 30;
    AEStack stack = pretrain_stack(X, {cfg}, 11);
    stack.head = train_softmax_head(encode_stack(stack, X), y, 3, 3, 0.002);

    AEStack zero_iters = stack;
    CHECK(fine_tune(zero_iters, X, y, 0, 0.002).empty());
    CHECK(zero_iters.head.W.values() == stack.head.W.values());
    CHECK(zero_iters.layers[0].W_enc.values() == stack.layers[0].W_enc.values());

    const RunHistory hist = fine_tune(stack, X, y, 60, 0.002);
    REQUIRE(!hist.empty());
    for (std::size_t i = 0; i < hist.size(); ++i) {
        CHECK(hist[i].epoch == static_cast<int>(i + 1));
        if (i) CHECK(hist[i].loss <= hist[i - 1].loss);
    }
    const auto [labels, probs] = predict_ae(stack, X);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == y[i]) ++correct;
    CHECK(correct == 40);

    AEStack headless;
    headless.layers = stack.layers;
    CHECK_THROWS_AS(fine_tune(headless, X, y, 5, 0.002), std::invalid_argument);
    CHECK_THROWS_AS(predict_ae(stack, random_tensor({2, 5})), std::invalid_argument);
}

TEST_CASE("decoders are untouched by fine-tuning") {
    const auto [X, y] = separable_toy(30, 6, 3);
    AETrainConfig cfg;
    cfg.hidden_size = 4;
    cfg.iterations = 10;
    AEStack stack = pretrain_stack(X, {cfg}, 13);
    stack.head = train_softmax_head(encode_stack(stack, X), y, 3, 5, 0.002);
    const std::vector<double> dec_before = stack.layers[0].W_dec.values();
    fine_tune(stack, X, y, 20, 0.002);
    CHECK(stack.layers[0].W_dec.values() == dec_before);
}

TEST_CASE("ae presets carry the documented schedules") {
    const AePreset two = ae_preset(2);
    REQUIRE(two.layers.size() == 2);
    CHECK(two.layers[0].hidden_size == 100);
    CHECK(two.layers[0].iterations == 350);
    CHECK(two.layers[0].learning_rate == 0.15);
    CHECK(two.layers[0].l2_weight == 0.004);
    CHECK(two.layers[0].sparsity_target == 0.15);
    CHECK(two.layers[0].sparsity_weight == 4.0);
    CHECK(two.layers[1].hidden_size == 50);
    CHECK(two.layers[1].iterations == 300);
    CHECK(two.layers[1].learning_rate == 0.1);
    CHECK(two.layers[1].l2_weight == 0.002);
    CHECK(two.layers[1].sparsity_target == 0.1);

    const AePreset three = ae_preset(3);
    REQUIRE(three.layers.size() == 3);
    CHECK(three.layers[1].hidden_size == 100);
    CHECK(three.layers[1].iterations == 300);
    CHECK(three.layers[2].hidden_size == 50);
    CHECK(three.layers[2].iterations == 350);
    CHECK(three.layers[2].learning_rate == 0.1);

    CHECK_THROWS_AS(ae_preset(4), std::invalid_argument);
}

TEST_CASE("gd optimizer variant trains the same structures") {
    const auto [X, y] = separable_toy(30, 6, 3);
    AETrainConfig cfg;
    cfg.hidden_size = 4;
    cfg.iterations = 25;
    cfg.learning_rate = 0.15;
    AEStack stack = pretrain_stack(X, {cfg}, 19, Optimizer::kGd);
    stack.head = train_softmax_head(encode_stack(stack, X), y, 3, 60, 0.0, Optimizer::kGd, 0.5);
    const RunHistory hist = fine_tune(stack, X, y, 30, 0.0, Optimizer::kGd, 0.5);
    REQUIRE(!hist.empty());
    for (std::size_t i = 1; i < hist.size(); ++i) CHECK(hist[i].loss <= hist[i - 1].loss);
}
