#include "glyphlab/baselines.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "glyphlab/ops.hpp"
#include "glyphlab/util.hpp"

namespace glyphlab {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MMap = Eigen::Map<RowMat>;
using CMMap = Eigen::Map<const RowMat>;

Eigen::Index idx(std::size_t v) { return static_cast<Eigen::Index>(v); }

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

void check_labels(const std::vector<int>& labels, std::size_t n, std::size_t num_classes) {
    if (labels.size() != n) throw std::invalid_argument("baseline: labels length mismatch");
    for (int y : labels)
        if (y < 0 || static_cast<std::size_t>(y) >= num_classes)
            throw std::invalid_argument("baseline: label out of range");
}

std::size_t distinct_classes(const std::vector<int>& labels, std::size_t num_classes) {
    std::vector<char> seen(num_classes, 0);
    std::size_t n = 0;
    for (int y : labels)
        if (!seen[static_cast<std::size_t>(y)]) {
            seen[static_cast<std::size_t>(y)] = 1;
            ++n;
        }
    return n;
}

int argmax_lowest(const double* v, std::size_t k) {
    int best = 0;
    for (std::size_t j = 1; j < k; ++j)
        if (v[j] > v[static_cast<std::size_t>(best)]) best = static_cast<int>(j);
    return best;
}

void train_logreg(BaselineModel& m, const Tensor& X, const std::vector<int>& y,
                  const BaselineOptions& opts) {
    const std::size_t n = X.rows(), d = X.cols(), k = m.num_classes;
    if (distinct_classes(y, k) < 2)
        throw std::invalid_argument("logistic_regression: training set has a single class");
    m.W = Tensor({k, d});
    m.b = Tensor({k});
    const double inv_n = 1.0 / static_cast<double>(n);

    Tensor scores({n, k});
    MMap s(scores.data(), idx(n), idx(k));
    CMMap x(X.data(), idx(n), idx(d));
    for (int epoch = 0; epoch < opts.logreg_epochs; ++epoch) {
        s.noalias() = x * CMMap(m.W.data(), idx(k), idx(d)).transpose();
        s.rowwise() += Eigen::Map<const Eigen::VectorXd>(m.b.data(), idx(k)).transpose();
        softmax_rows_inplace(scores.data(), n, k);
        for (std::size_t i = 0; i < n; ++i)
            scores.at(i, static_cast<std::size_t>(y[i])) -= 1.0;
        // W -= lr * (1/N) (P - Y)^T X ; b likewise.
        MMap(m.W.data(), idx(k), idx(d)).noalias() -=
            (opts.logreg_lr * inv_n) * (s.transpose() * x);
        Eigen::Map<Eigen::VectorXd>(m.b.data(), idx(k)).noalias() -=
            (opts.logreg_lr * inv_n) * s.colwise().sum().transpose();
    }
}

void train_gnb(BaselineModel& m, const Tensor& X, const std::vector<int>& y,
               const BaselineOptions& opts) {
    const std::size_t n = X.rows(), d = X.cols(), k = m.num_classes;
    m.nb_mean = Tensor({k, d});
    m.nb_var = Tensor({k, d});
    m.nb_log_prior.assign(k, -std::numeric_limits<double>::infinity());
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = static_cast<std::size_t>(y[i]);
        ++count[c];
        for (std::size_t j = 0; j < d; ++j) m.nb_mean.at(c, j) += X.at(i, j);
    }
    for (std::size_t c = 0; c < k; ++c)
        if (count[c]) {
            for (std::size_t j = 0; j < d; ++j)
                m.nb_mean.at(c, j) /= static_cast<double>(count[c]);
            m.nb_log_prior[c] =
                std::log(static_cast<double>(count[c]) / static_cast<double>(n));
        }
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = static_cast<std::size_t>(y[i]);
        for (std::size_t j = 0; j < d; ++j) {
            const double dev = X.at(i, j) - m.nb_mean.at(c, j);
            m.nb_var.at(c, j) += dev * dev;
        }
    }
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t j = 0; j < d; ++j)
            m.nb_var.at(c, j) = count[c] ? std::max(m.nb_var.at(c, j) /
                                                        static_cast<double>(count[c]),
                                                    opts.nb_var_floor)
                                         : opts.nb_var_floor;
}

// Incremental-Gini CART. Node impurity uses sum of squared class counts;
// the scan over a feature keeps those sums updated in O(1) per step.
struct TreeBuilder {
    const Tensor& X;
    const std::vector<int>& y;
    std::size_t num_classes;
    int max_depth;
    std::vector<TreeNode>& nodes;

    int build(std::vector<std::size_t> items, int depth) {
        std::vector<std::size_t> count(num_classes, 0);
        for (std::size_t i : items) ++count[static_cast<std::size_t>(y[i])];
        int majority = 0;
        for (std::size_t c = 1; c < num_classes; ++c)
            if (count[c] > count[static_cast<std::size_t>(majority)])
                majority = static_cast<int>(c);

        const std::size_t n = items.size();
        TreeNode leaf;
        leaf.label = majority;
        const bool pure = count[static_cast<std::size_t>(majority)] == n;
        if (pure || depth >= max_depth || n < 2) {
            nodes.push_back(leaf);
            return static_cast<int>(nodes.size() - 1);
        }

        // Weighted-Gini minimization == maximizing sum_side (sum_c n_c^2)/n_side.
        double best_score = -1.0;
        int best_feature = -1;
        double best_threshold = 0.0;
        const std::size_t d = X.cols();
        std::vector<std::size_t> order(n);
        std::vector<std::size_t> left_cnt(num_classes);
        for (std::size_t f = 0; f < d; ++f) {
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                const double va = X.at(items[a], f), vb = X.at(items[b], f);
                return va < vb || (va == vb && items[a] < items[b]);
            });
            std::fill(left_cnt.begin(), left_cnt.end(), 0);
            double left_sq = 0.0, right_sq = 0.0;
            for (std::size_t c = 0; c < num_classes; ++c)
                right_sq += static_cast<double>(count[c]) * static_cast<double>(count[c]);
            for (std::size_t pos = 0; pos + 1 < n; ++pos) {
                const std::size_t i = items[order[pos]];
                const std::size_t c = static_cast<std::size_t>(y[i]);
                left_sq += 2.0 * static_cast<double>(left_cnt[c]) + 1.0;
                const std::size_t rc = count[c] - left_cnt[c];
                right_sq -= 2.0 * static_cast<double>(rc) - 1.0;
                ++left_cnt[c];
                const double v = X.at(i, f);
                const double v_next = X.at(items[order[pos + 1]], f);
                if (v == v_next) continue;  // no threshold separates equal values
                const double score = left_sq / static_cast<double>(pos + 1) +
                                     right_sq / static_cast<double>(n - pos - 1);
                if (score > best_score) {
                    best_score = score;
                    best_feature = static_cast<int>(f);
                    best_threshold = v + 0.5 * (v_next - v);
                }
            }
        }
        // No split can improve on (or even form under) constant features.
        double node_sq = 0.0;
        for (std::size_t c = 0; c < num_classes; ++c)
            node_sq += static_cast<double>(count[c]) * static_cast<double>(count[c]);
        if (best_feature < 0 || best_score <= node_sq / static_cast<double>(n)) {
            nodes.push_back(leaf);
            return static_cast<int>(nodes.size() - 1);
        }

        std::vector<std::size_t> left_items, right_items;
        for (std::size_t i : items)
            (X.at(i, static_cast<std::size_t>(best_feature)) <= best_threshold ? left_items
                                                                               : right_items)
                .push_back(i);
        items.clear();
        items.shrink_to_fit();

        const int self = static_cast<int>(nodes.size());
        TreeNode inner;
        inner.feature = best_feature;
        inner.threshold = best_threshold;
        inner.label = majority;
        nodes.push_back(inner);
        const int l = build(std::move(left_items), depth + 1);
        const int r = build(std::move(right_items), depth + 1);
        nodes[static_cast<std::size_t>(self)].left = l;
        nodes[static_cast<std::size_t>(self)].right = r;
        return self;
    }
};

void train_svm(BaselineModel& m, const Tensor& X, const std::vector<int>& y,
               const BaselineOptions& opts) {
    const std::size_t n = X.rows(), d = X.cols(), k = m.num_classes;
    if (distinct_classes(y, k) < 2)
        throw std::invalid_argument("linear_svm: training set has a single class");
    m.W = Tensor({k, d});
    m.b = Tensor({k});

    // One-vs-rest hinge, per-sample subgradient steps over a seeded shuffle;
    // classes are independent, so parallelizing over them is safe.
    parallel_for(k, [&](std::size_t c) {
        double* w = m.W.data() + c * d;
        double& bias = m.b.values()[c];
        std::vector<std::size_t> perm(n);
        for (int epoch = 0; epoch < opts.svm_epochs; ++epoch) {
            std::iota(perm.begin(), perm.end(), 0);
            std::mt19937_64 rng(mix_seed(opts.seed, c, static_cast<std::uint64_t>(epoch)));
            seeded_shuffle(perm, rng);
            for (std::size_t i : perm) {
                const double target = y[i] == static_cast<int>(c) ? 1.0 : -1.0;
                const double* xi = X.data() + i * d;
                double margin = bias;
                for (std::size_t j = 0; j < d; ++j) margin += w[j] * xi[j];
                margin *= target;
                const double shrink = 1.0 - 2.0 * opts.svm_lr * opts.svm_lambda;
                if (margin < 1.0) {
                    for (std::size_t j = 0; j < d; ++j)
                        w[j] = shrink * w[j] + opts.svm_lr * target * xi[j];
                    bias += opts.svm_lr * target;
                } else {
                    for (std::size_t j = 0; j < d; ++j) w[j] *= shrink;
                }
            }
        }
    });
}

void train_mlp(BaselineModel& m, const Tensor& X, const std::vector<int>& y,
               const BaselineOptions& opts) {
    const std::size_t n = X.rows(), d = X.cols(), k = m.num_classes;
    const std::size_t h = static_cast<std::size_t>(opts.mlp_hidden);
    if (opts.mlp_hidden < 1) throw std::invalid_argument("mlp: hidden size must be >= 1");
    m.mlp_w1 = Tensor({h, d});
    m.mlp_b1 = Tensor({h});
    m.mlp_w2 = Tensor({k, h});
    m.mlp_b2 = Tensor({k});
    std::mt19937_64 rng(mix_seed(opts.seed, 0x4D4C50ULL));
    const double lim1 = std::sqrt(6.0 / static_cast<double>(d + h));
    for (double& v : m.mlp_w1.values()) v = uniform(rng, -lim1, lim1);
    const double lim2 = std::sqrt(6.0 / static_cast<double>(h + k));
    for (double& v : m.mlp_w2.values()) v = uniform(rng, -lim2, lim2);

    const double inv_n = 1.0 / static_cast<double>(n);
    CMMap x(X.data(), idx(n), idx(d));
    Tensor z1t({n, h}), probs({n, k});
    MMap z1(z1t.data(), idx(n), idx(h));
    MMap p(probs.data(), idx(n), idx(k));
    for (int epoch = 0; epoch < opts.mlp_epochs; ++epoch) {
        z1.noalias() = x * CMMap(m.mlp_w1.data(), idx(h), idx(d)).transpose();
        z1.rowwise() += Eigen::Map<const Eigen::VectorXd>(m.mlp_b1.data(), idx(h)).transpose();
        Tensor a1t = relu(z1t);
        MMap a1(a1t.data(), idx(n), idx(h));
        p.noalias() = a1 * CMMap(m.mlp_w2.data(), idx(k), idx(h)).transpose();
        p.rowwise() += Eigen::Map<const Eigen::VectorXd>(m.mlp_b2.data(), idx(k)).transpose();
        softmax_rows_inplace(probs.data(), n, k);
        for (std::size_t i = 0; i < n; ++i)
            probs.at(i, static_cast<std::size_t>(y[i])) -= 1.0;
        p *= inv_n;  // now (1/N)(P - Y)

        Tensor d1t({n, h});
        MMap d1(d1t.data(), idx(n), idx(h));
        d1.noalias() = p * CMMap(m.mlp_w2.data(), idx(k), idx(h));
        {
            double* dp = d1t.data();
            const double* zp = z1t.data();
            for (std::size_t i = 0; i < n * h; ++i)
                if (zp[i] <= 0.0) dp[i] = 0.0;
        }
        MMap(m.mlp_w2.data(), idx(k), idx(h)).noalias() -=
            opts.mlp_lr * (p.transpose() * a1);
        Eigen::Map<Eigen::VectorXd>(m.mlp_b2.data(), idx(k)).noalias() -=
            opts.mlp_lr * p.colwise().sum().transpose();
        MMap(m.mlp_w1.data(), idx(h), idx(d)).noalias() -=
            opts.mlp_lr * (d1.transpose() * x);
        Eigen::Map<Eigen::VectorXd>(m.mlp_b1.data(), idx(h)).noalias() -=
            opts.mlp_lr * d1.colwise().sum().transpose();
    }
}

std::vector<int> predict_knn(const BaselineModel& m, const Tensor& X) {
    const std::size_t nq = X.rows(), nt = m.knn_train.rows(), d = X.cols();
    const std::size_t kk = static_cast<std::size_t>(m.knn_k);
    std::vector<int> out(nq);
    parallel_for(nq, [&](std::size_t q) {
        std::vector<std::pair<double, std::size_t>> dist(nt);
        const double* xq = X.data() + q * d;
        for (std::size_t t = 0; t < nt; ++t) {
            const double* xt = m.knn_train.data() + t * d;
            double s = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                const double diff = xq[j] - xt[j];
                s += diff * diff;
            }
            dist[t] = {s, t};
        }
        const std::size_t take = std::min(kk, nt);
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(take),
                          dist.end());
        std::vector<std::size_t> votes(m.num_classes, 0);
        for (std::size_t i = 0; i < take; ++i)
            ++votes[static_cast<std::size_t>(m.knn_labels[dist[i].second])];
        int best = 0;
        for (std::size_t c = 1; c < m.num_classes; ++c)
            if (votes[c] > votes[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
        out[q] = best;
    });
    return out;
}

std::vector<int> predict_linear(const BaselineModel& m, const Tensor& X) {
    const std::size_t n = X.rows(), d = X.cols(), k = m.num_classes;
    Tensor scores({n, k});
    MMap s(scores.data(), idx(n), idx(k));
    s.noalias() = CMMap(X.data(), idx(n), idx(d)) *
                  CMMap(m.W.data(), idx(k), idx(d)).transpose();
    s.rowwise() += Eigen::Map<const Eigen::VectorXd>(m.b.data(), idx(k)).transpose();
    std::vector<int> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = argmax_lowest(scores.data() + i * k, k);
    return out;
}

std::vector<int> predict_gnb(const BaselineModel& m, const Tensor& X) {
    const std::size_t n = X.rows(), d = X.cols(), k = m.num_classes;
    std::vector<int> out(n);
    constexpr double kLog2Pi = 1.8378770664093453;
    parallel_for(n, [&](std::size_t i) {
        std::vector<double> post(k);
        const double* xi = X.data() + i * d;
        for (std::size_t c = 0; c < k; ++c) {
            double s = m.nb_log_prior[c];
            if (std::isfinite(s)) {
                for (std::size_t j = 0; j < d; ++j) {
                    const double var = m.nb_var.at(c, j);
                    const double dev = xi[j] - m.nb_mean.at(c, j);
                    s -= 0.5 * (kLog2Pi + std::log(var) + dev * dev / var);
                }
            }
            post[c] = s;
        }
        out[i] = argmax_lowest(post.data(), k);
    });
    return out;
}

std::vector<int> predict_tree(const BaselineModel& m, const Tensor& X) {
    const std::size_t n = X.rows();
    std::vector<int> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t node = 0;
        while (m.tree[node].feature >= 0) {
            const double v = X.at(i, static_cast<std::size_t>(m.tree[node].feature));
            node = static_cast<std::size_t>(v <= m.tree[node].threshold ? m.tree[node].left
                                                                        : m.tree[node].right);
        }
        out[i] = m.tree[node].label;
    }
    return out;
}

std::vector<int> predict_mlp(const BaselineModel& m, const Tensor& X) {
    const std::size_t n = X.rows(), d = X.cols(), h = m.mlp_w1.rows(), k = m.num_classes;
    Tensor z1t({n, h});
    MMap z1(z1t.data(), idx(n), idx(h));
    z1.noalias() = CMMap(X.data(), idx(n), idx(d)) *
                   CMMap(m.mlp_w1.data(), idx(h), idx(d)).transpose();
    z1.rowwise() += Eigen::Map<const Eigen::VectorXd>(m.mlp_b1.data(), idx(h)).transpose();
    for (double& v : z1t.values()) v = v > 0.0 ? v : 0.0;
    Tensor scores({n, k});
    MMap s(scores.data(), idx(n), idx(k));
    s.noalias() = z1 * CMMap(m.mlp_w2.data(), idx(k), idx(h)).transpose();
    s.rowwise() += Eigen::Map<const Eigen::VectorXd>(m.mlp_b2.data(), idx(k)).transpose();
    std::vector<int> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = argmax_lowest(scores.data() + i * k, k);
    return out;
}

}  // namespace

BaselineKind parse_baseline(const std::string& name) {
    if (name == "logreg" || name == "logistic_regression") return BaselineKind::kLogisticRegression;
    if (name == "knn") return BaselineKind::kKnn;
    if (name == "gnb" || name == "gaussian_nb") return BaselineKind::kGaussianNb;
    if (name == "tree" || name == "decision_tree") return BaselineKind::kDecisionTree;
    if (name == "svm" || name == "linear_svm") return BaselineKind::kLinearSvm;
    if (name == "mlp") return BaselineKind::kMlp;
    throw std::invalid_argument("unknown baseline: " + name);
}

std::string baseline_name(BaselineKind kind) {
    switch (kind) {
        case BaselineKind::kLogisticRegression: return "logistic_regression";
        case BaselineKind::kKnn: return "knn";
        case BaselineKind::kGaussianNb: return "gaussian_nb";
        case BaselineKind::kDecisionTree: return "decision_tree";
        case BaselineKind::kLinearSvm: return "linear_svm";
        case BaselineKind::kMlp: return "mlp";
    }
    throw std::invalid_argument("unknown baseline kind");
}

BaselineModel train_baseline(BaselineKind kind, const Tensor& X, const std::vector<int>& labels,
                             std::size_t num_classes, const BaselineOptions& opts) {
    if (num_classes < 1) throw std::invalid_argument("baseline: num_classes must be >= 1");
    check_labels(labels, X.rows(), num_classes);

    BaselineModel m;
    m.kind = kind;
    m.num_classes = num_classes;
    m.input_dim = X.cols();
    switch (kind) {
        case BaselineKind::kLogisticRegression:
            train_logreg(m, X, labels, opts);
            break;
        case BaselineKind::kKnn:
            if (opts.knn_k < 1) throw std::invalid_argument("knn: k must be >= 1");
            m.knn_train = X;
            m.knn_labels = labels;
            m.knn_k = opts.knn_k;
            break;
        case BaselineKind::kGaussianNb:
            train_gnb(m, X, labels, opts);
            break;
        case BaselineKind::kDecisionTree: {
            if (opts.tree_max_depth < 1)
                throw std::invalid_argument("decision_tree: max_depth must be >= 1");
            std::vector<std::size_t> all(X.rows());
            std::iota(all.begin(), all.end(), 0);
            TreeBuilder builder{X, labels, num_classes, opts.tree_max_depth, m.tree};
            builder.build(std::move(all), 0);
            break;
        }
        case BaselineKind::kLinearSvm:
            train_svm(m, X, labels, opts);
            break;
        case BaselineKind::kMlp:
            train_mlp(m, X, labels, opts);
            break;
    }
    return m;
}

std::vector<int> predict_baseline(const BaselineModel& model, const Tensor& X) {
    if (X.rank() != 2 || X.cols() != model.input_dim)
        throw std::invalid_argument("predict_baseline: input width mismatch");
    switch (model.kind) {
        case BaselineKind::kLogisticRegression:
        case BaselineKind::kLinearSvm:
            return predict_linear(model, X);
        case BaselineKind::kKnn:
            return predict_knn(model, X);
        case BaselineKind::kGaussianNb:
            return predict_gnb(model, X);
        case BaselineKind::kDecisionTree:
            return predict_tree(model, X);
        case BaselineKind::kMlp:
            return predict_mlp(model, X);
    }
    throw std::invalid_argument("predict_baseline: unknown model kind");
}

}  // namespace glyphlab
