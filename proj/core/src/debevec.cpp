/**
 * debevec.cpp - linear-response radiance merge and bilateral tone mapping
 */

#include "hdru/debevec.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hdru/fusion.hpp"

namespace hdru {

namespace {

constexpr double kLogEps = 1e-6;

float hat_weight(float r) {
    if (r <= kClipLow || r >= kClipHigh) return 0.0f;
    return std::min(r, 1.0f - r);
}

}  // namespace

RadianceImage debevec_merge(const Burst& burst, const ExposureSpec& exposures) {
    check_burst(burst, "debevec_merge");
    if (exposures.t.size() != burst.size())
        throw std::invalid_argument("debevec_merge: one exposure per burst image is required");
    for (double t : exposures.t)
        if (!(t > 0.0)) throw std::invalid_argument("debevec_merge: exposures must be positive");

    const std::size_t least = static_cast<std::size_t>(
        std::min_element(exposures.t.begin(), exposures.t.end()) - exposures.t.begin());

    RadianceImage out(burst.front().width(), burst.front().height());
    auto o = out.pixels();
    for (std::size_t i = 0; i < o.size(); ++i) {
        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < burst.size(); ++k) {
            const float r = burst[k].pixels()[i];
            const double w = hat_weight(r);
            num += w * r / exposures.t[k];
            den += w;
        }
        o[i] = den > 0.0 ? static_cast<float>(num / den)
                         : static_cast<float>(burst[least].pixels()[i] / exposures.t[least]);
    }
    return out;
}

GrayImage bilateral_filter(const GrayImage& img, double sigma_spatial, double sigma_range) {
    if (!(sigma_spatial > 0.0) || !(sigma_range > 0.0))
        throw std::invalid_argument("bilateral_filter: sigmas must be positive");
    const int radius = std::max(1, static_cast<int>(std::ceil(2.0 * sigma_spatial)));
    std::vector<double> spatial(static_cast<std::size_t>(2 * radius + 1) * (2 * radius + 1));
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx)
            spatial[(dy + radius) * (2 * radius + 1) + dx + radius] =
                std::exp(-(dx * dx + dy * dy) / (2.0 * sigma_spatial * sigma_spatial));
    const double inv_range = 1.0 / (2.0 * sigma_range * sigma_range);

    GrayImage out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const double center = img.at(x, y);
            double num = 0.0, den = 0.0;
            for (int dy = -radius; dy <= radius; ++dy) {
                for (int dx = -radius; dx <= radius; ++dx) {
                    const double v = img.clamped(x + dx, y + dy);
                    const double d = v - center;
                    const double w = spatial[(dy + radius) * (2 * radius + 1) + dx + radius] * std::exp(-d * d * inv_range);
                    num += w * v;
                    den += w;
                }
            }
            out.at(x, y) = static_cast<float>(num / den);
        }
    }
    return out;
}

DurandLayers durand_decompose(const RadianceImage& radiance, const DurandParams& params) {
    if (radiance.empty()) throw std::invalid_argument("durand: empty radiance");
    DurandLayers layers;
    layers.log_lum = GrayImage(radiance.width(), radiance.height());
    auto lp = layers.log_lum.pixels();
    auto rp = radiance.pixels();
    for (std::size_t i = 0; i < rp.size(); ++i) {
        if (rp[i] < 0.0f) throw std::invalid_argument("durand: radiance must be nonnegative");
        lp[i] = static_cast<float>(std::log10(static_cast<double>(rp[i]) + kLogEps));
    }

    const double sigma_s = params.sigma_spatial_fraction * std::min(radiance.width(), radiance.height());
    layers.base = bilateral_filter(layers.log_lum, std::max(sigma_s, 0.5), params.sigma_range);
    layers.detail = layers.log_lum;
    auto dp = layers.detail.pixels();
    auto bp = layers.base.pixels();
    for (std::size_t i = 0; i < dp.size(); ++i) dp[i] -= bp[i];

    const auto [mn, mx] = std::minmax_element(bp.begin(), bp.end());
    const double range = static_cast<double>(*mx) - static_cast<double>(*mn);
    const double factor = range > 0.0 ? params.target_range / range : 1.0;
    layers.compressed_base = layers.base;
    for (float& v : layers.compressed_base.pixels()) v = static_cast<float>((v - *mx) * factor);
    return layers;
}

GrayImage durand_tonemap(const RadianceImage& radiance, const DurandParams& params) {
    const auto rp = radiance.pixels();
    if (!rp.empty() && std::all_of(rp.begin(), rp.end(), [](float v) { return v <= kLogEps; })) {
        return GrayImage(radiance.width(), radiance.height(), 0.0f);
    }
    const DurandLayers layers = durand_decompose(radiance, params);
    GrayImage out(radiance.width(), radiance.height());
    auto o = out.pixels();
    auto cb = layers.compressed_base.pixels();
    auto dt = layers.detail.pixels();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = static_cast<float>(std::pow(10.0, cb[i] + dt[i]));

    const auto [mn, mx] = std::minmax_element(o.begin(), o.end());
    const float lo = *mn, hi = *mx;
    if (!(hi - lo > 1e-7f * hi)) return GrayImage(radiance.width(), radiance.height(), 0.5f);
    for (float& v : o) v = std::clamp((v - lo) / (hi - lo), 0.0f, 1.0f);
    return out;
}

}  // namespace hdru
