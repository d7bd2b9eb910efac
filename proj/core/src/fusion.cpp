/**
 * fusion.cpp - Mertens exposure fusion (grayscale, no saturation term)
 */

#include "hdru/fusion.hpp"

#include <cmath>
#include <string>

namespace hdru {

void check_burst(const Burst& burst, const char* who) {
    if (burst.empty()) throw std::invalid_argument(std::string(who) + ": empty burst");
    for (const auto& img : burst) {
        if (img.empty()) throw std::invalid_argument(std::string(who) + ": empty image in burst");
        if (!img.same_shape(burst.front()))
            throw std::invalid_argument(std::string(who) + ": burst images differ in dimensions");
    }
}

WeightMap contrast_map(const GrayImage& img) {
    const int w = img.width(), h = img.height();
    WeightMap c(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const float lap = img.clamped(x - 1, y) + img.clamped(x + 1, y) + img.clamped(x, y - 1) +
                              img.clamped(x, y + 1) - 4.0f * img.at(x, y);
            c.at(x, y) = std::fabs(lap);
        }
    }
    return c;
}

WeightMap exposedness_map(const GrayImage& img, float sigma) {
    if (!(sigma > 0.0f)) throw std::invalid_argument("exposedness_map: sigma must be positive");
    WeightMap x(img.width(), img.height());
    auto in = img.pixels();
    auto out = x.pixels();
    for (std::size_t i = 0; i < in.size(); ++i) {
        const float t = (in[i] - 0.5f) / sigma;
        out[i] = std::exp(-0.5f * t * t);
    }
    return x;
}

std::vector<WeightMap> quality_maps(const Burst& burst, float sigma) {
    check_burst(burst, "quality_maps");
    std::vector<WeightMap> maps;
    maps.reserve(burst.size());
    for (const auto& img : burst) {
        WeightMap q = contrast_map(img);
        const WeightMap x = exposedness_map(img, sigma);
        auto qp = q.pixels();
        auto xp = x.pixels();
        for (std::size_t i = 0; i < qp.size(); ++i) qp[i] = qp[i] * xp[i] + kWeightEpsilon;
        maps.push_back(std::move(q));
    }
    const std::size_t n = maps.front().size();
    for (std::size_t i = 0; i < n; ++i) {
        float total = 0.0f;
        for (const auto& m : maps) total += m.pixels()[i];
        for (auto& m : maps) m.pixels()[i] /= total;
    }
    return maps;
}

GrayImage mertens_fuse(const Burst& burst, float sigma, int levels) {
    const auto weights = quality_maps(burst, sigma);
    Pyramid blended{PyramidKind::laplacian, {}};
    for (std::size_t k = 0; k < burst.size(); ++k) {
        const Pyramid lap = laplacian_pyramid(burst[k], levels);
        const Pyramid gw = gaussian_pyramid(weights[k], levels);
        if (blended.levels.empty()) {
            for (const auto& level : lap.levels) blended.levels.emplace_back(level.width(), level.height(), 0.0f);
        }
        for (int l = 0; l < levels; ++l) {
            auto acc = blended.levels[l].pixels();
            auto d = lap.levels[l].pixels();
            auto g = gw.levels[l].pixels();
            for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += g[i] * d[i];
        }
    }
    return clamp(reconstruct(blended));
}

}  // namespace hdru
