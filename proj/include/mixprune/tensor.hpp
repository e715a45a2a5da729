#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace mixprune {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);

// Dense row-major fp32 tensor. The element count always equals the product
// of the shape.
class Tensor {
  public:
    Tensor() = default;
    explicit Tensor(Shape shape, float fill = 0.0f);
    Tensor(Shape shape, std::vector<float> data);

    const Shape& shape() const noexcept { return shape_; }
    std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::span<float> values() noexcept { return data_; }
    std::span<const float> values() const noexcept { return data_; }
    float* data() noexcept { return data_.data(); }
    const float* data() const noexcept { return data_.data(); }

    float& operator[](std::size_t i) noexcept { return data_[i]; }
    float operator[](std::size_t i) const noexcept { return data_[i]; }

    // Same data, new shape. Throws ShapeError if the element count differs.
    Tensor reshaped(Shape shape) const;

    bool all_finite() const noexcept;

    // Bitwise equality of shape and payload; distinguishes -0.0 from 0.0.
    bool bit_equal(const Tensor& other) const noexcept;

  private:
    Shape shape_;
    std::vector<float> data_;
};

}  // namespace mixprune
