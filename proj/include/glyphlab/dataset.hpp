#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "glyphlab/tensor.hpp"

namespace glyphlab {

inline constexpr std::size_t kNumClasses = 50;
inline constexpr std::size_t kNumDigits = 10;
inline constexpr std::size_t kImageDim = 28 * 28;

// Canonical class order: the ten digits 0..9 first, then the forty
// characters in alphabet order, matching the form's reading order (rows
// top-to-bottom, right-to-left within a row).
const std::array<std::string, kNumClasses>& class_names();

struct Sample {
    Tensor image;  // 28x28, values in [0,1], ink = 1
    int label = 0;
    int writer_id = 0;
};

struct LabeledDataset {
    std::vector<Sample> samples;
    std::vector<std::string> class_names;  // size kNumClasses

    std::size_t size() const { return samples.size(); }
};

// Throws std::invalid_argument when a label, image shape, or value range is
// out of contract.
void validate_dataset(const LabeledDataset& ds);

struct SplitSpec {
    double train_fraction = 0.85;
    std::uint64_t seed = 0;
};

// Partitions *writers* (not samples) so the train and test writer sets are
// disjoint; floor(train_fraction * n_writers) writers go to train, clamped
// so both sides stay nonempty. Deterministic given the seed. Throws
// std::invalid_argument with fewer than 2 distinct writers.
std::pair<LabeledDataset, LabeledDataset> split_subject_independent(const LabeledDataset& ds,
                                                                    const SplitSpec& spec);

enum class Task { kDigits, kCharacters, kCombined };

Task parse_task(const std::string& name);
std::string task_name(Task task);

// Keeps the task's label range and re-bases labels to 0..K-1 (characters:
// 10..49 -> 0..39). Returns the filtered dataset plus its class-name list.
LabeledDataset filter_task(const LabeledDataset& ds, Task task);
std::size_t task_num_classes(Task task);
std::vector<std::string> task_class_names(Task task);

// Flattens images into an N x 784 row-major matrix.
Tensor to_matrix(const LabeledDataset& ds);
std::vector<int> labels_of(const LabeledDataset& ds);

}  // namespace glyphlab
