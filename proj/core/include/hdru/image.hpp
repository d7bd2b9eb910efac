/**
 * image.hpp - grayscale image container and Burt-Adelson pyramids
 */
#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace hdru {

/// Single-channel float image, row-major. Nominal range [0,1].
class GrayImage {
public:
    GrayImage() = default;
    GrayImage(int width, int height, float fill = 0.0f);
    GrayImage(int width, int height, std::vector<float> data);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    float& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
    float at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }

    /// Replicate-boundary access.
    float clamped(int x, int y) const;

    float* row(int y) { return data_.data() + static_cast<std::size_t>(y) * width_; }
    const float* row(int y) const { return data_.data() + static_cast<std::size_t>(y) * width_; }

    std::span<float> pixels() noexcept { return data_; }
    std::span<const float> pixels() const noexcept { return data_; }
    const std::vector<float>& data() const noexcept { return data_; }

    bool same_shape(const GrayImage& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_;
    }

    friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<float> data_;
};

/// Three co-registered exposures, one per camera, in camera order.
using Burst = std::vector<GrayImage>;

enum class PyramidKind { gaussian, laplacian };

struct Pyramid {
    PyramidKind kind = PyramidKind::gaussian;
    std::vector<GrayImage> levels;
};

/// Clamp every pixel into [lo, hi].
GrayImage clamp(GrayImage img, float lo = 0.0f, float hi = 1.0f);

/// Blur with [1,4,6,4,1]/16 (replicate boundary) and keep even rows/columns.
GrayImage downsample(const GrayImage& img);

/// Expand to target size: zero-insertion on the replicate-extended coarse
/// lattice followed by a [1,4,6,4,1]/8 blur per axis. Target dims must be
/// 2n-1 or 2n of the input dims.
GrayImage upsample(const GrayImage& img, int target_w, int target_h);

Pyramid gaussian_pyramid(const GrayImage& img, int levels);
Pyramid laplacian_pyramid(const GrayImage& img, int levels);

/// Collapse a Laplacian pyramid. The result is not clamped.
GrayImage reconstruct(const Pyramid& pyr);

/// Largest pyramid depth for which every level has at least one pixel per axis
/// without a level repeating the previous 1x1 plane.
int max_pyramid_levels(int width, int height);

}  // namespace hdru
