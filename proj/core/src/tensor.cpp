#include "hdru/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hdru::nn {

std::string Shape4::str() const {
    return "[" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," + std::to_string(w) + "]";
}

Tensor4::Tensor4(Shape4 shape, float fill) : shape_(shape) {
    if (shape.n < 0 || shape.c < 0 || shape.h < 0 || shape.w < 0)
        throw std::invalid_argument("Tensor4: negative dimension " + shape.str());
    data_.assign(shape.numel(), fill);
}

Tensor4::Tensor4(Shape4 shape, std::vector<float> data) : shape_(shape), data_(std::move(data)) {
    if (data_.size() != shape.numel())
        throw std::invalid_argument("Tensor4: data length " + std::to_string(data_.size()) + " does not match " +
                                    shape.str());
}

bool Tensor4::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

}  // namespace hdru::nn
