#include "glyphlab/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>

#include "glyphlab/error.hpp"

namespace glyphlab {

namespace {

constexpr char kMagic[4] = {'G', 'L', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

void put_bytes(std::ostream& os, const void* p, std::size_t n) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void get_bytes(std::istream& is, void* p, std::size_t n) {
    if (!is.read(static_cast<char*>(p), static_cast<std::streamsize>(n)))
        throw DataError("checkpoint: truncated file");
}

void put_u32(std::ostream& os, std::uint32_t v) { put_bytes(os, &v, 4); }
void put_u64(std::ostream& os, std::uint64_t v) { put_bytes(os, &v, 8); }
void put_f64(std::ostream& os, double v) { put_bytes(os, &v, 8); }

std::uint32_t get_u32(std::istream& is) {
    std::uint32_t v;
    get_bytes(is, &v, 4);
    return v;
}
std::uint64_t get_u64(std::istream& is) {
    std::uint64_t v;
    get_bytes(is, &v, 8);
    return v;
}
double get_f64(std::istream& is) {
    double v;
    get_bytes(is, &v, 8);
    return v;
}

void put_string(std::ostream& os, const std::string& s) {
    put_u64(os, s.size());
    put_bytes(os, s.data(), s.size());
}

std::string get_string(std::istream& is) {
    const std::uint64_t n = get_u64(is);
    if (n > (1ULL << 32)) throw DataError("checkpoint: implausible string length");
    std::string s(n, '\0');
    get_bytes(is, s.data(), n);
    return s;
}

// Rank 0 encodes a default-constructed (absent) tensor.
void put_tensor(std::ostream& os, const Tensor& t) {
    put_u64(os, t.rank());
    for (std::size_t a = 0; a < t.rank(); ++a) put_u64(os, t.extent(a));
    for (std::size_t i = 0; i < t.numel(); ++i) put_f64(os, t[i]);
}

Tensor get_tensor(std::istream& is) {
    const std::uint64_t rank = get_u64(is);
    if (rank == 0) return Tensor();
    if (rank > 8) throw DataError("checkpoint: implausible tensor rank");
    std::vector<std::size_t> shape(rank);
    for (auto& e : shape) e = get_u64(is);
    Tensor t(shape);
    for (std::size_t i = 0; i < t.numel(); ++i) t[i] = get_f64(is);
    return t;
}

void put_ae(std::ostream& os, const AEStack& ae) {
    put_u64(os, ae.layers.size());
    for (const AELayer& l : ae.layers) {
        put_tensor(os, l.W_enc);
        put_tensor(os, l.b_enc);
        put_tensor(os, l.W_dec);
        put_tensor(os, l.b_dec);
    }
    put_tensor(os, ae.head.W);
    put_tensor(os, ae.head.b);
}

AEStack get_ae(std::istream& is) {
    AEStack ae;
    const std::uint64_t n = get_u64(is);
    if (n > 64) throw DataError("checkpoint: implausible layer count");
    ae.layers.resize(n);
    for (AELayer& l : ae.layers) {
        l.W_enc = get_tensor(is);
        l.b_enc = get_tensor(is);
        l.W_dec = get_tensor(is);
        l.b_dec = get_tensor(is);
    }
    ae.head.W = get_tensor(is);
    ae.head.b = get_tensor(is);
    return ae;
}

void put_cnn(std::ostream& os, const CnnSpec& spec, const std::vector<double>& params) {
    put_u64(os, spec.blocks.size());
    for (const CnnBlockSpec& b : spec.blocks) {
        put_u64(os, static_cast<std::uint64_t>(b.filters));
        put_u64(os, static_cast<std::uint64_t>(b.kernel));
        put_u32(os, b.pool ? 1 : 0);
    }
    put_u64(os, spec.fc_sizes.size());
    for (int s : spec.fc_sizes) put_u64(os, static_cast<std::uint64_t>(s));
    put_u64(os, static_cast<std::uint64_t>(spec.num_classes));
    put_f64(os, spec.weight_decay);
    put_u64(os, spec.fc_decays.size());
    for (double d : spec.fc_decays) put_f64(os, d);
    put_u64(os, params.size());
    for (double v : params) put_f64(os, v);
}

void get_cnn(std::istream& is, CnnSpec& spec, std::vector<double>& params) {
    spec.blocks.resize(get_u64(is));
    for (CnnBlockSpec& b : spec.blocks) {
        b.filters = static_cast<int>(get_u64(is));
        b.kernel = static_cast<int>(get_u64(is));
        b.pool = get_u32(is) != 0;
    }
    spec.fc_sizes.resize(get_u64(is));
    for (int& s : spec.fc_sizes) s = static_cast<int>(get_u64(is));
    spec.num_classes = static_cast<int>(get_u64(is));
    spec.weight_decay = get_f64(is);
    spec.fc_decays.resize(get_u64(is));
    for (double& d : spec.fc_decays) d = get_f64(is);
    params.resize(get_u64(is));
    for (double& v : params) v = get_f64(is);
}

void put_baseline(std::ostream& os, const BaselineModel& m) {
    put_u32(os, static_cast<std::uint32_t>(m.kind));
    put_u64(os, m.num_classes);
    put_u64(os, m.input_dim);
    put_tensor(os, m.W);
    put_tensor(os, m.b);
    put_tensor(os, m.mlp_w1);
    put_tensor(os, m.mlp_b1);
    put_tensor(os, m.mlp_w2);
    put_tensor(os, m.mlp_b2);
    put_tensor(os, m.knn_train);
    put_u64(os, m.knn_labels.size());
    for (int y : m.knn_labels) put_u64(os, static_cast<std::uint64_t>(y));
    put_u64(os, static_cast<std::uint64_t>(m.knn_k));
    put_tensor(os, m.nb_mean);
    put_tensor(os, m.nb_var);
    put_u64(os, m.nb_log_prior.size());
    for (double v : m.nb_log_prior) put_f64(os, v);
    put_u64(os, m.tree.size());
    for (const TreeNode& nd : m.tree) {
        put_u64(os, static_cast<std::uint64_t>(static_cast<std::int64_t>(nd.feature)));
        put_f64(os, nd.threshold);
        put_u64(os, static_cast<std::uint64_t>(static_cast<std::int64_t>(nd.left)));
        put_u64(os, static_cast<std::uint64_t>(static_cast<std::int64_t>(nd.right)));
        put_u64(os, static_cast<std::uint64_t>(static_cast<std::int64_t>(nd.label)));
    }
}

BaselineModel get_baseline(std::istream& is) {
    BaselineModel m;
    m.kind = static_cast<BaselineKind>(get_u32(is));
    m.num_classes = get_u64(is);
    m.input_dim = get_u64(is);
    m.W = get_tensor(is);
    m.b = get_tensor(is);
    m.mlp_w1 = get_tensor(is);
    m.mlp_b1 = get_tensor(is);
    m.mlp_w2 = get_tensor(is);
    m.mlp_b2 = get_tensor(is);
    m.knn_train = get_tensor(is);
    m.knn_labels.resize(get_u64(is));
    for (int& y : m.knn_labels) y = static_cast<int>(static_cast<std::int64_t>(get_u64(is)));
    m.knn_k = static_cast<int>(get_u64(is));
    m.nb_mean = get_tensor(is);
    m.nb_var = get_tensor(is);
    m.nb_log_prior.resize(get_u64(is));
    for (double& v : m.nb_log_prior) v = get_f64(is);
    m.tree.resize(get_u64(is));
    for (TreeNode& nd : m.tree) {
        nd.feature = static_cast<int>(static_cast<std::int64_t>(get_u64(is)));
        nd.threshold = get_f64(is);
        nd.left = static_cast<int>(static_cast<std::int64_t>(get_u64(is)));
        nd.right = static_cast<int>(static_cast<std::int64_t>(get_u64(is)));
        nd.label = static_cast<int>(static_cast<std::int64_t>(get_u64(is)));
    }
    return m;
}

}  // namespace

std::size_t Checkpoint::num_classes() const {
    switch (kind) {
        case CheckpointKind::kAutoencoder: return ae.head.W.rank() ? ae.head.W.rows() : 0;
        case CheckpointKind::kCnn: return static_cast<std::size_t>(cnn_spec.num_classes);
        case CheckpointKind::kBaseline: return baseline.num_classes;
    }
    return 0;
}

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("checkpoint: cannot open " + path.string() + " for writing");

    put_bytes(os, kMagic, 4);
    put_u32(os, kVersion);
    put_u32(os, static_cast<std::uint32_t>(ck.kind));

    const nlohmann::json meta = {{"model", ck.model},
                                 {"task", ck.task},
                                 {"seed", ck.seed},
                                 {"split_fraction", ck.split_fraction},
                                 {"optimizer", ck.optimizer}};
    put_string(os, meta.dump());

    switch (ck.kind) {
        case CheckpointKind::kAutoencoder: put_ae(os, ck.ae); break;
        case CheckpointKind::kCnn: put_cnn(os, ck.cnn_spec, ck.cnn_params); break;
        case CheckpointKind::kBaseline: put_baseline(os, ck.baseline); break;
    }

    put_u64(os, ck.history.size());
    for (const EpochStat& e : ck.history) {
        put_u64(os, static_cast<std::uint64_t>(static_cast<std::int64_t>(e.epoch)));
        put_f64(os, e.loss);
        put_f64(os, e.error_pct);
    }
    if (!os) throw DataError("checkpoint: write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("checkpoint: cannot open " + path.string());

    char magic[4];
    get_bytes(is, magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0) throw DataError("checkpoint: bad magic");
    const std::uint32_t version = get_u32(is);
    if (version != kVersion)
        throw DataError("checkpoint: unsupported version " + std::to_string(version));

    Checkpoint ck;
    ck.kind = static_cast<CheckpointKind>(get_u32(is));

    const nlohmann::json meta = nlohmann::json::parse(get_string(is), nullptr, false);
    if (meta.is_discarded()) throw DataError("checkpoint: malformed metadata");
    ck.model = meta.value("model", "");
    ck.task = meta.value("task", "combined");
    ck.seed = meta.value("seed", std::uint64_t{0});
    ck.split_fraction = meta.value("split_fraction", 0.85);
    ck.optimizer = meta.value("optimizer", "scg");

    switch (ck.kind) {
        case CheckpointKind::kAutoencoder: ck.ae = get_ae(is); break;
        case CheckpointKind::kCnn: get_cnn(is, ck.cnn_spec, ck.cnn_params); break;
        case CheckpointKind::kBaseline: ck.baseline = get_baseline(is); break;
        default: throw DataError("checkpoint: unknown model kind tag");
    }

    const std::uint64_t n_hist = get_u64(is);
    if (n_hist > (1ULL << 24)) throw DataError("checkpoint: implausible history length");
    ck.history.resize(n_hist);
    for (EpochStat& e : ck.history) {
        e.epoch = static_cast<int>(static_cast<std::int64_t>(get_u64(is)));
        e.loss = get_f64(is);
        e.error_pct = get_f64(is);
    }
    return ck;
}

std::vector<int> checkpoint_predict(const Checkpoint& ck, const Tensor& batch) {
    switch (ck.kind) {
        case CheckpointKind::kAutoencoder: return predict_ae(ck.ae, batch).first;
        case CheckpointKind::kCnn: return cnn_predict(ck.cnn_spec, ck.cnn_params, batch);
        case CheckpointKind::kBaseline: return predict_baseline(ck.baseline, batch);
    }
    throw DataError("checkpoint: unknown model kind tag");
}

}  // namespace glyphlab

