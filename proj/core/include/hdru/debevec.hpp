/**
 * debevec.hpp - radiance merge baseline and Durand tone mapping
 *
 * The sensor response is taken as linear; each exposure contributes R_k / t_k
 * under a hat weight, with near-clipped samples excluded.
 */
#pragma once

#include <vector>

#include "hdru/image.hpp"

namespace hdru {

/// Per-pixel relative radiance, >= 0 and unbounded above.
using RadianceImage = GrayImage;

/// Relative exposure multiplier t_k per burst image (transmittance x time).
struct ExposureSpec {
    std::vector<double> t;
};

inline constexpr float kClipLow = 0.005f;
inline constexpr float kClipHigh = 0.995f;

RadianceImage debevec_merge(const Burst& burst, const ExposureSpec& exposures);

struct DurandParams {
    double sigma_spatial_fraction = 0.02;  ///< of the smaller image dimension
    double sigma_range = 0.4;              ///< log10 units
    double target_range = 2.5;             ///< log10 units of base contrast
};

/// Intermediate log10 layers, exposed for inspection and testing.
struct DurandLayers {
    GrayImage log_lum;
    GrayImage base;
    GrayImage detail;
    GrayImage compressed_base;
};

DurandLayers durand_decompose(const RadianceImage& radiance, const DurandParams& params = {});

/// Tone map to [0,1]. A constant result maps to 0.5; all-zero radiance maps to 0.
GrayImage durand_tonemap(const RadianceImage& radiance, const DurandParams& params = {});

/// Brute-force bilateral filter with replicate boundary and a 2-sigma window.
GrayImage bilateral_filter(const GrayImage& img, double sigma_spatial, double sigma_range);

}  // namespace hdru
