#include "glyphlab/cnn.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "glyphlab/ops.hpp"
#include "glyphlab/util.hpp"

namespace glyphlab {

namespace {

constexpr std::size_t kInputSide = 28;

struct BlockDims {
    std::size_t in_ch, in_h, in_w;  // input to the conv
    std::size_t out_h, out_w;       // after the conv
    std::size_t pool_h, pool_w;     // after the optional pool
    std::size_t param_off;          // kernels, then biases
};

struct FcDims {
    std::size_t in, out;
    std::size_t param_off;  // W row-major, then b
    double decay;
};

struct Plan {
    std::vector<BlockDims> blocks;
    std::vector<FcDims> fcs;  // hidden layers, then the classifier
    std::size_t flat = 0;
    std::size_t total = 0;
};

Plan make_plan(const CnnSpec& spec) {
    if (spec.blocks.empty()) throw std::invalid_argument("cnn: at least one block required");
    if (spec.num_classes < 1) throw std::invalid_argument("cnn: num_classes must be >= 1");
    if (!spec.fc_decays.empty() && spec.fc_decays.size() != spec.fc_sizes.size())
        throw std::invalid_argument("cnn: fc_decays must match fc_sizes");
    if (spec.weight_decay < 0) throw std::invalid_argument("cnn: negative weight_decay");

    Plan plan;
    std::size_t ch = 1, h = kInputSide, w = kInputSide, off = 0;
    for (const CnnBlockSpec& b : spec.blocks) {
        if (b.filters < 1 || b.kernel < 1)
            throw std::invalid_argument("cnn: filters and kernel must be >= 1");
        const std::size_t k = static_cast<std::size_t>(b.kernel);
        if (k > h || k > w)
            throw std::invalid_argument("cnn: kernel " + std::to_string(k) +
                                        " exceeds feature map " + std::to_string(h) + "x" +
                                        std::to_string(w));
        BlockDims d;
        d.in_ch = ch;
        d.in_h = h;
        d.in_w = w;
        d.out_h = h - k + 1;
        d.out_w = w - k + 1;
        d.pool_h = b.pool ? d.out_h / 2 : d.out_h;
        d.pool_w = b.pool ? d.out_w / 2 : d.out_w;
        if (d.pool_h < 1 || d.pool_w < 1)
            throw std::invalid_argument("cnn: pooling drives a spatial dimension below 1");
        d.param_off = off;
        off += static_cast<std::size_t>(b.filters) * ch * k * k +
               static_cast<std::size_t>(b.filters);
        plan.blocks.push_back(d);
        ch = static_cast<std::size_t>(b.filters);
        h = d.pool_h;
        w = d.pool_w;
    }
    plan.flat = ch * h * w;

    std::size_t in = plan.flat;
    for (std::size_t l = 0; l < spec.fc_sizes.size(); ++l) {
        if (spec.fc_sizes[l] < 1) throw std::invalid_argument("cnn: fc size must be >= 1");
        const std::size_t out = static_cast<std::size_t>(spec.fc_sizes[l]);
        const double decay = spec.fc_decays.empty() ? spec.weight_decay : spec.fc_decays[l];
        plan.fcs.push_back({in, out, off, decay});
        off += out * in + out;
        in = out;
    }
    const double final_decay =
        spec.fc_decays.empty() ? spec.weight_decay : spec.fc_decays.back();
    plan.fcs.push_back({in, static_cast<std::size_t>(spec.num_classes), off, final_decay});
    off += static_cast<std::size_t>(spec.num_classes) * in +
           static_cast<std::size_t>(spec.num_classes);
    plan.total = off;
    return plan;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

// Kernel of filter f, channel c within block b's parameter slab.
const double* kernel_at(const std::vector<double>& params, const BlockDims& d, std::size_t k,
                        std::size_t f, std::size_t c) {
    return params.data() + d.param_off + (f * d.in_ch + c) * k * k;
}

struct BlockCache {
    std::vector<Tensor> in_maps;
    std::vector<Tensor> z_maps;  // pre-ReLU
    std::vector<Tensor> a_maps;  // post-ReLU, pre-pool
    std::vector<PoolResult> pooled;
};

struct SampleCache {
    std::vector<BlockCache> blocks;
    std::vector<std::vector<double>> fc_in;  // input to each FC layer
    std::vector<std::vector<double>> fc_z;   // its pre-activation
    std::vector<double> probs;
};

void forward_sample(const CnnSpec& spec, const Plan& plan, const std::vector<double>& params,
                    const double* pixels, SampleCache& cache) {
    std::vector<Tensor> maps;
    maps.emplace_back(std::vector<std::size_t>{kInputSide, kInputSide},
                      std::vector<double>(pixels, pixels + kInputSide * kInputSide));

    cache.blocks.clear();
    cache.blocks.reserve(spec.blocks.size());
    for (std::size_t b = 0; b < spec.blocks.size(); ++b) {
        const BlockDims& d = plan.blocks[b];
        const std::size_t k = static_cast<std::size_t>(spec.blocks[b].kernel);
        const std::size_t filters = static_cast<std::size_t>(spec.blocks[b].filters);
        const double* biases = params.data() + d.param_off + filters * d.in_ch * k * k;

        BlockCache bc;
        bc.in_maps = std::move(maps);
        maps.clear();
        for (std::size_t f = 0; f < filters; ++f) {
            Tensor z({d.out_h, d.out_w});
            for (double& v : z.values()) v = biases[f];
            for (std::size_t c = 0; c < d.in_ch; ++c) {
                const Tensor kern({k, k},
                                  std::vector<double>(kernel_at(params, d, k, f, c),
                                                      kernel_at(params, d, k, f, c) + k * k));
                const Tensor part = conv2d_valid(bc.in_maps[c], kern, 0.0);
                for (std::size_t i = 0; i < z.numel(); ++i) z[i] += part[i];
            }
            Tensor a = relu(z);
            if (spec.blocks[b].pool) {
                PoolResult pr = maxpool_2x2(a);
                maps.push_back(pr.output);
                bc.pooled.push_back(std::move(pr));
            } else {
                maps.push_back(a);
            }
            bc.z_maps.push_back(std::move(z));
            bc.a_maps.push_back(std::move(a));
        }
        cache.blocks.push_back(std::move(bc));
    }

    std::vector<double> cur;
    cur.reserve(plan.flat);
    for (const Tensor& m : maps)
        cur.insert(cur.end(), m.values().begin(), m.values().end());

    cache.fc_in.clear();
    cache.fc_z.clear();
    for (std::size_t l = 0; l < plan.fcs.size(); ++l) {
        const FcDims& fd = plan.fcs[l];
        const double* w = params.data() + fd.param_off;
        const double* bias = w + fd.out * fd.in;
        std::vector<double> z(fd.out);
        for (std::size_t o = 0; o < fd.out; ++o) {
            double s = bias[o];
            const double* row = w + o * fd.in;
            for (std::size_t i = 0; i < fd.in; ++i) s += row[i] * cur[i];
            z[o] = s;
        }
        cache.fc_in.push_back(std::move(cur));
        cache.fc_z.push_back(z);
        if (l + 1 < plan.fcs.size())
            for (double& v : z) v = v > 0.0 ? v : 0.0;  // ReLU between FC layers
        cur = std::move(z);
    }
    cache.probs = softmax_row(cur);
}

// Adds this sample's gradient contribution (already scaled by inv_n) into g.
void backward_sample(const CnnSpec& spec, const Plan& plan, const std::vector<double>& params,
                     const SampleCache& cache, int label, double inv_n,
                     std::vector<double>& g) {
    const std::size_t n_fc = plan.fcs.size();
    std::vector<double> dz = cache.probs;
    dz[static_cast<std::size_t>(label)] -= 1.0;
    for (double& v : dz) v *= inv_n;

    for (std::size_t l = n_fc; l-- > 0;) {
        const FcDims& fd = plan.fcs[l];
        const double* w = params.data() + fd.param_off;
        double* gw = g.data() + fd.param_off;
        double* gb = gw + fd.out * fd.in;
        const std::vector<double>& in = cache.fc_in[l];
        std::vector<double> din(fd.in, 0.0);
        for (std::size_t o = 0; o < fd.out; ++o) {
            const double d = dz[o];
            gb[o] += d;
            double* grow = gw + o * fd.in;
            const double* wrow = w + o * fd.in;
            for (std::size_t i = 0; i < fd.in; ++i) {
                grow[i] += d * in[i];
                din[i] += d * wrow[i];
            }
        }
        if (l > 0) {
            const std::vector<double>& z_below = cache.fc_z[l - 1];
            for (std::size_t i = 0; i < fd.in; ++i)
                if (z_below[i] <= 0.0) din[i] = 0.0;
        }
        dz = std::move(din);
    }

    // Unflatten into per-filter gradient maps of the last block's output.
    std::vector<Tensor> dmaps;
    {
        const BlockDims& last = plan.blocks.back();
        const std::size_t fcount = static_cast<std::size_t>(spec.blocks.back().filters);
        const std::size_t map_sz = last.pool_h * last.pool_w;
        dmaps.reserve(fcount);
        for (std::size_t f = 0; f < fcount; ++f)
            dmaps.emplace_back(
                std::vector<std::size_t>{last.pool_h, last.pool_w},
                std::vector<double>(dz.begin() + static_cast<std::ptrdiff_t>(f * map_sz),
                                    dz.begin() + static_cast<std::ptrdiff_t>((f + 1) * map_sz)));
    }

    for (std::size_t b = spec.blocks.size(); b-- > 0;) {
        const BlockDims& d = plan.blocks[b];
        const BlockCache& bc = cache.blocks[b];
        const std::size_t k = static_cast<std::size_t>(spec.blocks[b].kernel);
        const std::size_t filters = static_cast<std::size_t>(spec.blocks[b].filters);
        double* gk = g.data() + d.param_off;
        double* gb = gk + filters * d.in_ch * k * k;

        std::vector<Tensor> din_maps;
        if (b > 0) {
            din_maps.reserve(d.in_ch);
            for (std::size_t c = 0; c < d.in_ch; ++c)
                din_maps.emplace_back(std::vector<std::size_t>{d.in_h, d.in_w});
        }
        for (std::size_t f = 0; f < filters; ++f) {
            Tensor da = spec.blocks[b].pool
                            ? maxpool_2x2_backward(bc.pooled[f], dmaps[f], d.out_h, d.out_w)
                            : std::move(dmaps[f]);
            const Tensor dzc = relu_backward(bc.z_maps[f], da);
            double bias_sum = 0.0;
            for (double v : dzc.values()) bias_sum += v;
            gb[f] += bias_sum;
            for (std::size_t c = 0; c < d.in_ch; ++c) {
                const Tensor gkern = conv2d_grad_kernel(bc.in_maps[c], dzc, k);
                double* slot = gk + (f * d.in_ch + c) * k * k;
                for (std::size_t i = 0; i < k * k; ++i) slot[i] += gkern[i];
                if (b > 0) {
                    const Tensor kern(
                        {k, k}, std::vector<double>(kernel_at(params, d, k, f, c),
                                                    kernel_at(params, d, k, f, c) + k * k));
                    const Tensor dimg = conv2d_grad_image(kern, dzc, d.in_h, d.in_w);
                    for (std::size_t i = 0; i < dimg.numel(); ++i) din_maps[c][i] += dimg[i];
                }
            }
        }
        dmaps = std::move(din_maps);
    }
}

void check_batch(const Tensor& batch) {
    if (batch.rank() != 2 || batch.cols() != kInputSide * kInputSide)
        throw std::invalid_argument("cnn: batch rows must be flattened 28x28 images");
}

// L2 terms: conv kernels under spec.weight_decay, FC weights under their
// per-layer coefficients; biases are never decayed.
double add_decay(const CnnSpec& spec, const Plan& plan, const std::vector<double>& params,
                 std::vector<double>* grad) {
    double loss = 0.0;
    for (std::size_t b = 0; b < plan.blocks.size(); ++b) {
        const BlockDims& d = plan.blocks[b];
        const std::size_t k = static_cast<std::size_t>(spec.blocks[b].kernel);
        const std::size_t nw = static_cast<std::size_t>(spec.blocks[b].filters) * d.in_ch * k * k;
        for (std::size_t i = 0; i < nw; ++i) {
            const double w = params[d.param_off + i];
            loss += spec.weight_decay * w * w;
            if (grad) (*grad)[d.param_off + i] += 2.0 * spec.weight_decay * w;
        }
    }
    for (const FcDims& fd : plan.fcs) {
        for (std::size_t i = 0; i < fd.out * fd.in; ++i) {
            const double w = params[fd.param_off + i];
            loss += fd.decay * w * w;
            if (grad) (*grad)[fd.param_off + i] += 2.0 * fd.decay * w;
        }
    }
    return loss;
}

}  // namespace

void validate_cnn_spec(const CnnSpec& spec) { make_plan(spec); }

std::size_t cnn_param_count(const CnnSpec& spec) { return make_plan(spec).total; }

std::vector<double> cnn_init_params(const CnnSpec& spec, std::uint64_t seed) {
    const Plan plan = make_plan(spec);
    std::vector<double> params(plan.total, 0.0);
    std::mt19937_64 rng(mix_seed(seed, 0xC44));
    for (std::size_t b = 0; b < plan.blocks.size(); ++b) {
        const BlockDims& d = plan.blocks[b];
        const std::size_t k = static_cast<std::size_t>(spec.blocks[b].kernel);
        const std::size_t filters = static_cast<std::size_t>(spec.blocks[b].filters);
        const double limit =
            std::sqrt(6.0 / (static_cast<double>(d.in_ch * k * k) +
                             static_cast<double>(filters * k * k)));
        for (std::size_t i = 0; i < filters * d.in_ch * k * k; ++i)
            params[d.param_off + i] = uniform(rng, -limit, limit);
    }
    for (const FcDims& fd : plan.fcs) {
        const double limit =
            std::sqrt(6.0 / (static_cast<double>(fd.in) + static_cast<double>(fd.out)));
        for (std::size_t i = 0; i < fd.out * fd.in; ++i)
            params[fd.param_off + i] = uniform(rng, -limit, limit);
    }
    return params;
}

Tensor cnn_forward(const CnnSpec& spec, const std::vector<double>& params,
                   const Tensor& batch) {
    const Plan plan = make_plan(spec);
    check_batch(batch);
    if (params.size() != plan.total)
        throw std::invalid_argument("cnn_forward: parameter count mismatch");
    const std::size_t n = batch.rows(), k = static_cast<std::size_t>(spec.num_classes);
    Tensor probs({n, k});
    parallel_for(n, [&](std::size_t i) {
        SampleCache cache;
        forward_sample(spec, plan, params, batch.data() + i * batch.cols(), cache);
        std::copy(cache.probs.begin(), cache.probs.end(), probs.data() + i * k);
    });
    return probs;
}

double cnn_loss_grad(const CnnSpec& spec, const std::vector<double>& params,
                     const Tensor& batch, const std::vector<int>& labels,
                     std::vector<double>& grad) {
    const Plan plan = make_plan(spec);
    check_batch(batch);
    if (params.size() != plan.total)
        throw std::invalid_argument("cnn_loss_grad: parameter count mismatch");
    const std::size_t n = batch.rows();
    if (labels.size() != n)
        throw std::invalid_argument("cnn_loss_grad: labels length mismatch");
    for (int y : labels)
        if (y < 0 || y >= spec.num_classes)
            throw std::invalid_argument("cnn_loss_grad: label out of range");
    const double inv_n = 1.0 / static_cast<double>(n);

    // Per-sample slots, reduced in index order afterwards, so the result is
    // identical for any worker count.
    std::vector<std::vector<double>> slot_grad(n);
    std::vector<double> slot_loss(n, 0.0);
    parallel_for(n, [&](std::size_t i) {
        SampleCache cache;
        forward_sample(spec, plan, params, batch.data() + i * batch.cols(), cache);
        slot_loss[i] =
            -std::log(std::max(cache.probs[static_cast<std::size_t>(labels[i])], kProbClamp));
        slot_grad[i].assign(plan.total, 0.0);
        backward_sample(spec, plan, params, cache, labels[i], inv_n, slot_grad[i]);
    });

    grad.assign(plan.total, 0.0);
    double ce = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ce += slot_loss[i];
        for (std::size_t p = 0; p < plan.total; ++p) grad[p] += slot_grad[i][p];
    }
    ce *= inv_n;
    return ce + add_decay(spec, plan, params, &grad);
}

std::vector<int> cnn_predict(const CnnSpec& spec, const std::vector<double>& params,
                             const Tensor& batch) {
    const Tensor probs = cnn_forward(spec, params, batch);
    const std::size_t n = probs.rows(), k = probs.cols();
    std::vector<int> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = probs.data() + i * k;
        int best = 0;
        for (std::size_t j = 1; j < k; ++j)
            if (row[j] > row[static_cast<std::size_t>(best)]) best = static_cast<int>(j);
        out[i] = best;
    }
    return out;
}

void rmsprop_step(RmsPropState& state, std::vector<double>& params,
                  const std::vector<double>& grad) {
    if (state.cache.size() != params.size() || grad.size() != params.size())
        throw std::invalid_argument("rmsprop_step: dimension mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.cache[i] = state.decay * state.cache[i] + (1.0 - state.decay) * grad[i] * grad[i];
        params[i] -= state.learning_rate * grad[i] / std::sqrt(state.cache[i] + state.epsilon);
    }
}

std::pair<std::vector<double>, RunHistory> train_cnn(const CnnSpec& spec, const Tensor& train,
                                                     const std::vector<int>& train_labels,
                                                     const Tensor* valid,
                                                     const std::vector<int>* valid_labels,
                                                     const CnnTrainOptions& opts) {
    const Plan plan = make_plan(spec);
    check_batch(train);
    const std::size_t n = train.rows();
    if (train_labels.size() != n)
        throw std::invalid_argument("train_cnn: labels length mismatch");
    if (opts.batch_size < 1)
        throw std::invalid_argument("train_cnn: batch size must be >= 1");
    if (static_cast<std::size_t>(opts.batch_size) > n)
        throw std::invalid_argument("train_cnn: batch size " + std::to_string(opts.batch_size) +
                                    " exceeds sample count " + std::to_string(n));

    std::vector<double> params = cnn_init_params(spec, opts.seed);
    RmsPropState state(params.size());
    state.learning_rate = opts.learning_rate;

    const std::size_t bs = static_cast<std::size_t>(opts.batch_size);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<double> grad;
    RunHistory history;

    for (int epoch = 1; epoch <= opts.epochs; ++epoch) {
        std::mt19937_64 rng(mix_seed(opts.seed, static_cast<std::uint64_t>(epoch), 0xE90C4));
        seeded_shuffle(perm, rng);

        double loss_sum = 0.0;
        for (std::size_t start = 0; start < n; start += bs) {
            const std::size_t nb = std::min(bs, n - start);
            Tensor bt({nb, train.cols()});
            std::vector<int> bl(nb);
            for (std::size_t i = 0; i < nb; ++i) {
                const std::size_t src = perm[start + i];
                std::copy_n(train.data() + src * train.cols(), train.cols(),
                            bt.data() + i * train.cols());
                bl[i] = train_labels[src];
            }
            const double loss = cnn_loss_grad(spec, params, bt, bl, grad);
            rmsprop_step(state, params, grad);
            loss_sum += loss * static_cast<double>(nb);
        }

        const bool has_valid = valid && valid->rank() == 2 && valid_labels;
        const Tensor& eval_x = has_valid ? *valid : train;
        const std::vector<int>& eval_y = has_valid ? *valid_labels : train_labels;
        const std::vector<int> preds = cnn_predict(spec, params, eval_x);
        std::size_t wrong = 0;
        for (std::size_t i = 0; i < preds.size(); ++i)
            if (preds[i] != eval_y[i]) ++wrong;
        history.push_back({epoch, loss_sum / static_cast<double>(n),
                           100.0 * static_cast<double>(wrong) /
                               static_cast<double>(preds.size())});
    }
    return {std::move(params), std::move(history)};
}

}  // namespace glyphlab
