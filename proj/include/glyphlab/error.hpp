#pragma once

#include <stdexcept>
#include <string>

namespace glyphlab {

// Malformed or missing input data (files, datasets, checkpoints).
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Optimizer or objective produced a non-finite value.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace glyphlab
