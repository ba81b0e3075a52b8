#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "glyphlab/autoencoder.hpp"
#include "glyphlab/baselines.hpp"
#include "glyphlab/cnn.hpp"
#include "glyphlab/report.hpp"

namespace glyphlab {

enum class CheckpointKind : std::uint32_t { kAutoencoder = 1, kCnn = 2, kBaseline = 3 };

// Everything needed to re-evaluate a trained model: the parameters, the
// task/split recipe that produced them, and the training history.
struct Checkpoint {
    CheckpointKind kind = CheckpointKind::kAutoencoder;
    std::string model;      // preset name, e.g. "ae2", "cnn3", "baseline:knn"
    std::string task;       // "digits" | "characters" | "combined"
    std::uint64_t seed = 0;
    double split_fraction = 0.85;
    std::string optimizer;  // "scg" | "gd" (autoencoders only)

    AEStack ae;                      // kind == kAutoencoder
    CnnSpec cnn_spec;                // kind == kCnn
    std::vector<double> cnn_params;  //
    BaselineModel baseline;          // kind == kBaseline

    RunHistory history;

    std::size_t num_classes() const;
};

// Versioned binary container: magic, format version, kind tag, a JSON
// metadata block, then the parameter blocks in declared order as 64-bit
// little-endian reals. save/load round-trips bit-exactly.
void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path);

// Throws DataError on a bad magic, unsupported version, or truncation.
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Labels for a batch of flattened 28x28 rows, dispatched on the checkpoint
// kind. Propagates the underlying model's input-width errors.
std::vector<int> checkpoint_predict(const Checkpoint& ck, const Tensor& batch);

}  // namespace glyphlab
