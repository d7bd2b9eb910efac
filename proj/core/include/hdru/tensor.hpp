/**
 * tensor.hpp - dense NCHW float tensor
 */
#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace hdru::nn {

struct Shape4 {
    int n = 0;
    int c = 0;
    int h = 0;
    int w = 0;

    std::size_t plane() const noexcept { return static_cast<std::size_t>(h) * w; }
    std::size_t numel() const noexcept { return static_cast<std::size_t>(n) * c * plane(); }
    std::string str() const;

    friend bool operator==(const Shape4&, const Shape4&) = default;
};

class Tensor4 {
public:
    Tensor4() = default;
    explicit Tensor4(Shape4 shape, float fill = 0.0f);
    Tensor4(Shape4 shape, std::vector<float> data);

    const Shape4& shape() const noexcept { return shape_; }
    std::size_t numel() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    float* plane(int n, int c) { return data_.data() + (static_cast<std::size_t>(n) * shape_.c + c) * shape_.plane(); }
    const float* plane(int n, int c) const {
        return data_.data() + (static_cast<std::size_t>(n) * shape_.c + c) * shape_.plane();
    }
    float& at(int n, int c, int y, int x) { return plane(n, c)[static_cast<std::size_t>(y) * shape_.w + x]; }
    float at(int n, int c, int y, int x) const { return plane(n, c)[static_cast<std::size_t>(y) * shape_.w + x]; }

    std::span<float> values() noexcept { return data_; }
    std::span<const float> values() const noexcept { return data_; }
    std::vector<float>& storage() noexcept { return data_; }
    const std::vector<float>& storage() const noexcept { return data_; }

    /// True when every element is finite.
    bool all_finite() const;

    friend bool operator==(const Tensor4&, const Tensor4&) = default;

private:
    Shape4 shape_;
    std::vector<float> data_;
};

using TensorMap = std::map<std::string, Tensor4>;

}  // namespace hdru::nn
