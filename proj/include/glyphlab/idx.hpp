#pragma once

#include <filesystem>

#include "glyphlab/dataset.hpp"

namespace glyphlab {

// MNIST-style persistence: images.idx (magic 0x00000803, big-endian dims
// count x 28 x 28, one byte per pixel = round(255 * value)), labels.idx
// (magic 0x00000801), and manifest.csv carrying writer ids and class names
// (header `index,writer_id,label,class_name`, UTF-8, LF).
//
// load_dataset(store_dataset(ds)) reproduces labels and writer ids exactly
// and pixels within 1/255 quantization. Throws DataError on bad magic,
// truncation, or a count mismatch between the three files.
void store_dataset(const LabeledDataset& ds, const std::filesystem::path& dir);
LabeledDataset load_dataset(const std::filesystem::path& dir);

}  // namespace glyphlab
