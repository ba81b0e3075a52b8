#pragma once

#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace glyphlab {

// Dense row-major tensor of doubles. Extents must be >= 1 and the flat data
// length always equals the product of the extents.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shape)
        : shape_(std::move(shape)), data_(checked_numel(shape_), 0.0) {}

    Tensor(std::vector<std::size_t> shape, std::vector<double> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (data_.size() != checked_numel(shape_))
            throw std::invalid_argument("Tensor: data length does not match shape");
    }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
    std::size_t numel() const { return data_.size(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    // 2-D accessors (row, col), row-major.
    double& at(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }

    std::size_t rows() const { return shape_.at(0); }
    std::size_t cols() const { return shape_.at(1); }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    static std::size_t checked_numel(const std::vector<std::size_t>& shape) {
        if (shape.empty()) throw std::invalid_argument("Tensor: rank must be >= 1");
        std::size_t n = 1;
        for (std::size_t e : shape) {
            if (e < 1) throw std::invalid_argument("Tensor: empty extent");
            n *= e;
        }
        return n;
    }

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

}  // namespace glyphlab
