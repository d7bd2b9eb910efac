/**
 * fusion.hpp - grayscale Mertens exposure fusion
 *
 * Quality is contrast (absolute 4-neighbour Laplacian) times well-exposedness
 * (Gaussian around mid-gray). Normalized qualities weight a per-level blend of
 * Laplacian pyramids.
 */
#pragma once

#include <vector>

#include "hdru/image.hpp"

namespace hdru {

/// Per-pixel nonnegative weights with the dimensions of the source image.
using WeightMap = GrayImage;

inline constexpr float kDefaultSigma = 0.2f;
inline constexpr int kDefaultPyramidLevels = 8;
inline constexpr float kWeightEpsilon = 1e-12f;

WeightMap contrast_map(const GrayImage& img);
WeightMap exposedness_map(const GrayImage& img, float sigma = kDefaultSigma);

/// Normalized qualities (Q_k + eps) / sum_j (Q_j + eps); they sum to 1 per pixel.
std::vector<WeightMap> quality_maps(const Burst& burst, float sigma = kDefaultSigma);

GrayImage mertens_fuse(const Burst& burst, float sigma = kDefaultSigma, int levels = kDefaultPyramidLevels);

/// Throws unless the burst is non-empty and all images share one shape.
void check_burst(const Burst& burst, const char* who);

}  // namespace hdru
