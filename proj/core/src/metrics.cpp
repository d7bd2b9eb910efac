#include "hdru/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace hdru {

namespace {

void check(const GrayImage& a, const GrayImage& b, const char* who) {
    if (a.empty() || !a.same_shape(b)) throw std::invalid_argument(std::string(who) + ": images differ in shape");
}

// Separable Gaussian-weighted local mean of a double plane.
std::vector<double> local_mean(const std::vector<double>& v, int w, int h, const std::vector<double>& k) {
    const int r = static_cast<int>(k.size() / 2);
    std::vector<double> tmp(v.size()), out(v.size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i) acc += k[i + r] * v[static_cast<std::size_t>(y) * w + std::clamp(x + i, 0, w - 1)];
            tmp[static_cast<std::size_t>(y) * w + x] = acc;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i) acc += k[i + r] * tmp[static_cast<std::size_t>(std::clamp(y + i, 0, h - 1)) * w + x];
            out[static_cast<std::size_t>(y) * w + x] = acc;
        }
    return out;
}

}  // namespace

double psnr(const GrayImage& a, const GrayImage& b) {
    check(a, b, "psnr");
    double se = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a.pixels()[i]) - b.pixels()[i];
        se += d * d;
    }
    if (se == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(static_cast<double>(a.size()) / se);
}

double ssim(const GrayImage& a, const GrayImage& b) {
    check(a, b, "ssim");
    const int w = a.width(), h = a.height();
    std::vector<double> k(11);
    double total = 0.0;
    for (int i = -5; i <= 5; ++i) total += k[i + 5] = std::exp(-0.5 * i * i / (1.5 * 1.5));
    for (double& v : k) v /= total;
    const std::size_t n = a.size();
    std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = a.pixels()[i];
        y[i] = b.pixels()[i];
        xx[i] = x[i] * x[i];
        yy[i] = y[i] * y[i];
        xy[i] = x[i] * y[i];
    }
    const auto mx = local_mean(x, w, h, k), my = local_mean(y, w, h, k);
    const auto sxx = local_mean(xx, w, h, k), syy = local_mean(yy, w, h, k), sxy = local_mean(xy, w, h, k);
    const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double vx = sxx[i] - mx[i] * mx[i], vy = syy[i] - my[i] * my[i], cxy = sxy[i] - mx[i] * my[i];
        sum += ((2 * mx[i] * my[i] + c1) * (2 * cxy + c2)) / ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
    }
    return sum / static_cast<double>(n);
}

double max_abs_diff(const GrayImage& a, const GrayImage& b) {
    check(a, b, "max_abs_diff");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(static_cast<double>(a.pixels()[i]) - b.pixels()[i]));
    return m;
}

double mean_abs_diff(const GrayImage& a, const GrayImage& b) {
    check(a, b, "mean_abs_diff");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(static_cast<double>(a.pixels()[i]) - b.pixels()[i]);
    return s / static_cast<double>(a.size());
}

}  // namespace hdru
