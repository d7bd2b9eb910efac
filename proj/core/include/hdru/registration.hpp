/**
 * registration.hpp - Kaiser-windowed phase correlation for fine alignment
 *
 * The correlation surface is weighted by a separable Kaiser window centered
 * on zero displacement, so that among comparable peaks the smaller shift wins.
 * Shift convention: moving(x, y) = reference(x - dx, y - dy).
 */
#pragma once

#include <stdexcept>
#include <vector>

#include "hdru/image.hpp"

namespace hdru {

struct Shift {
    int dx = 0;
    int dy = 0;
    double confidence = 0.0;

    Shift operator-() const { return {-dx, -dy, confidence}; }
    friend bool operator==(const Shift& a, const Shift& b) { return a.dx == b.dx && a.dy == b.dy; }
};

class DegenerateInputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kDefaultKaiserBeta = 4.0;

/// Kaiser taper evaluated at signed displacement d for a surface of length n:
/// I0(beta * sqrt(1 - (2d/n)^2)) / I0(beta). Equals 1 at d = 0 and for beta = 0.
double kaiser_weight(int d, int n, double beta);

/// Row-major correlation surface in FFT order: index 0 is zero displacement,
/// index i > n/2 wraps to i - n.
struct CorrelationSurface {
    int width = 0;
    int height = 0;
    std::vector<double> values;
};

/// Unwindowed phase-correlation surface of two equally sized images.
CorrelationSurface correlation_surface(const GrayImage& reference, const GrayImage& moving);

/// Weight the surface by the Kaiser window and return the signed argmax.
/// Ties resolve to the first index in row-major FFT order.
Shift select_peak(const CorrelationSurface& surface, double beta);

/// Estimate the integer translation of moving relative to reference.
Shift phase_correlate(const GrayImage& reference, const GrayImage& moving, double beta = kDefaultKaiserBeta);

/// Translate content by s; vacated pixels replicate the nearest edge sample.
GrayImage apply_shift(const GrayImage& img, const Shift& s);

/// Circular translation by s (wraps around).
GrayImage circular_shift(const GrayImage& img, const Shift& s);

/// size x size window centered on the image; odd slack goes to the bottom-right.
GrayImage center_crop(const GrayImage& img, int size);

}  // namespace hdru
