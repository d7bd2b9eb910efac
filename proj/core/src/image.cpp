/**
 * image.cpp - GrayImage and Burt-Adelson pyramid construction
 */

#include "hdru/image.hpp"

#include <algorithm>
#include <string>

namespace hdru {

namespace {

// Burt-Adelson 5-tap analysis kernel.
constexpr float kAnalysis[5] = {1.0f / 16, 4.0f / 16, 6.0f / 16, 4.0f / 16, 1.0f / 16};

int clampi(int v, int lo, int hi) { return std::min(std::max(v, lo), hi); }

// Separable blur with replicate boundary.
GrayImage blur5(const GrayImage& src) {
    const int w = src.width(), h = src.height();
    GrayImage tmp(w, h), dst(w, h);
    for (int y = 0; y < h; ++y) {
        const float* in = src.row(y);
        float* out = tmp.row(y);
        for (int x = 0; x < w; ++x) {
            float acc = 0.0f;
            for (int k = -2; k <= 2; ++k) acc += kAnalysis[k + 2] * in[clampi(x + k, 0, w - 1)];
            out[x] = acc;
        }
    }
    for (int y = 0; y < h; ++y) {
        float* out = dst.row(y);
        for (int x = 0; x < w; ++x) {
            float acc = 0.0f;
            for (int k = -2; k <= 2; ++k) acc += kAnalysis[k + 2] * tmp.at(x, clampi(y + k, 0, h - 1));
            out[x] = acc;
        }
    }
    return dst;
}

// 1-D expand weights: out[o] = sum_j 2*k[o - 2j] * in[clamp(j)].
// Even o: taps j = o/2-1, o/2, o/2+1 with 1/8, 6/8, 1/8.
// Odd o:  taps j = (o-1)/2, (o+1)/2 with 4/8 each.
void expand_row(const float* in, int n, float* out, int m) {
    for (int o = 0; o < m; ++o) {
        if (o % 2 == 0) {
            const int j = o / 2;
            out[o] = 0.125f * in[clampi(j - 1, 0, n - 1)] + 0.75f * in[clampi(j, 0, n - 1)] +
                     0.125f * in[clampi(j + 1, 0, n - 1)];
        } else {
            const int j = (o - 1) / 2;
            out[o] = 0.5f * in[clampi(j, 0, n - 1)] + 0.5f * in[clampi(j + 1, 0, n - 1)];
        }
    }
}

void check_expand_dim(int in, int target, const char* axis) {
    if (target != 2 * in && target != 2 * in - 1) {
        throw std::invalid_argument(std::string("upsample: target ") + axis + " " + std::to_string(target) +
                                    " must be 2n or 2n-1 of input " + std::to_string(in));
    }
}

}  // namespace

GrayImage::GrayImage(int width, int height, float fill)
    : width_(width), height_(height) {
    if (width < 0 || height < 0) throw std::invalid_argument("GrayImage: negative dimensions");
    data_.assign(static_cast<std::size_t>(width) * height, fill);
}

GrayImage::GrayImage(int width, int height, std::vector<float> data)
    : width_(width), height_(height), data_(std::move(data)) {
    if (width < 0 || height < 0) throw std::invalid_argument("GrayImage: negative dimensions");
    if (data_.size() != static_cast<std::size_t>(width) * height)
        throw std::invalid_argument("GrayImage: data length does not match width*height");
}

float GrayImage::clamped(int x, int y) const {
    return at(clampi(x, 0, width_ - 1), clampi(y, 0, height_ - 1));
}

GrayImage clamp(GrayImage img, float lo, float hi) {
    for (float& v : img.pixels()) v = std::clamp(v, lo, hi);
    return img;
}

GrayImage downsample(const GrayImage& img) {
    if (img.empty()) throw std::invalid_argument("downsample: empty image");
    if (img.width() < 2 && img.height() < 2) throw std::invalid_argument("downsample: image is already 1x1");
    const GrayImage blurred = blur5(img);
    const int ow = (img.width() + 1) / 2, oh = (img.height() + 1) / 2;
    GrayImage out(ow, oh);
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) out.at(x, y) = blurred.at(2 * x, 2 * y);
    return out;
}

GrayImage upsample(const GrayImage& img, int target_w, int target_h) {
    if (img.empty()) throw std::invalid_argument("upsample: empty image");
    check_expand_dim(img.width(), target_w, "width");
    check_expand_dim(img.height(), target_h, "height");

    const int w = img.width(), h = img.height();
    GrayImage horiz(target_w, h);
    for (int y = 0; y < h; ++y) expand_row(img.row(y), w, horiz.row(y), target_w);

    GrayImage out(target_w, target_h);
    std::vector<float> col_in(h), col_out(target_h);
    for (int x = 0; x < target_w; ++x) {
        for (int y = 0; y < h; ++y) col_in[y] = horiz.at(x, y);
        expand_row(col_in.data(), h, col_out.data(), target_h);
        for (int y = 0; y < target_h; ++y) out.at(x, y) = col_out[y];
    }
    return out;
}

int max_pyramid_levels(int width, int height) {
    int levels = 1;
    while (width > 1 || height > 1) {
        width = (width + 1) / 2;
        height = (height + 1) / 2;
        ++levels;
    }
    return levels;
}

Pyramid gaussian_pyramid(const GrayImage& img, int levels) {
    if (levels < 1) throw std::invalid_argument("pyramid: levels must be >= 1");
    if (img.empty()) throw std::invalid_argument("pyramid: empty image");
    if (levels > max_pyramid_levels(img.width(), img.height())) {
        throw std::invalid_argument("pyramid: " + std::to_string(levels) + " levels is too many for a " +
                                    std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                                    " image");
    }
    Pyramid pyr{PyramidKind::gaussian, {}};
    pyr.levels.reserve(levels);
    pyr.levels.push_back(img);
    for (int l = 1; l < levels; ++l) pyr.levels.push_back(downsample(pyr.levels.back()));
    return pyr;
}

Pyramid laplacian_pyramid(const GrayImage& img, int levels) {
    Pyramid gauss = gaussian_pyramid(img, levels);
    Pyramid lap{PyramidKind::laplacian, {}};
    lap.levels.reserve(levels);
    for (int l = 0; l + 1 < levels; ++l) {
        const GrayImage& fine = gauss.levels[l];
        GrayImage detail = fine;
        const GrayImage up = upsample(gauss.levels[l + 1], fine.width(), fine.height());
        auto d = detail.pixels();
        auto u = up.pixels();
        for (std::size_t i = 0; i < d.size(); ++i) d[i] -= u[i];
        lap.levels.push_back(std::move(detail));
    }
    lap.levels.push_back(std::move(gauss.levels.back()));
    return lap;
}

GrayImage reconstruct(const Pyramid& pyr) {
    if (pyr.kind != PyramidKind::laplacian) throw std::invalid_argument("reconstruct: pyramid is not Laplacian");
    if (pyr.levels.empty()) throw std::invalid_argument("reconstruct: empty pyramid");
    GrayImage acc = pyr.levels.back();
    for (int l = static_cast<int>(pyr.levels.size()) - 2; l >= 0; --l) {
        const GrayImage& detail = pyr.levels[l];
        GrayImage up = upsample(acc, detail.width(), detail.height());
        auto u = up.pixels();
        auto d = detail.pixels();
        for (std::size_t i = 0; i < u.size(); ++i) u[i] += d[i];
        acc = std::move(up);
    }
    return acc;
}

}  // namespace hdru
