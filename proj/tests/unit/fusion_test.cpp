/** fusion_test.cpp - quality maps and Mertens fusion against a longhand oracle */

#include <gtest/gtest.h>

#include <cmath>

#include "hdru/fusion.hpp"
#include "hdru/metrics.hpp"
#include "hdru/rng.hpp"
#include "hdru/synth.hpp"
#include "naive_mertens.hpp"

using namespace hdru;

namespace {

GrayImage random_image(int w, int h, Rng& rng, float lo = 0.0f, float hi = 1.0f) {
    GrayImage img(w, h);
    for (float& v : img.pixels()) v = static_cast<float>(rng.uniform(lo, hi));
    return img;
}

double max_diff(const ref::Plane& a, const GrayImage& b) {
    double worst = 0.0;
    for (int y = 0; y < a.h; ++y)
        for (int x = 0; x < a.w; ++x) worst = std::max(worst, std::fabs(a.at(x, y) - b.at(x, y)));
    return worst;
}

}  // namespace

TEST(ContrastMap, ConstantIsZero) {
    for (const auto out = contrast_map(GrayImage(9, 9, 0.4f)); float v : out.pixels()) EXPECT_EQ(v, 0.0f);
}

TEST(ContrastMap, ImpulseResponse) {
    GrayImage img(7, 7, 0.0f);
    img.at(3, 3) = 1.0f;
    const WeightMap c = contrast_map(img);
    EXPECT_FLOAT_EQ(c.at(3, 3), 4.0f);
    EXPECT_FLOAT_EQ(c.at(2, 3), 1.0f);
    EXPECT_FLOAT_EQ(c.at(4, 3), 1.0f);
    EXPECT_FLOAT_EQ(c.at(3, 2), 1.0f);
    EXPECT_FLOAT_EQ(c.at(3, 4), 1.0f);
    EXPECT_FLOAT_EQ(c.at(2, 2), 0.0f);
}

TEST(ExposednessMap, GaussianValues) {
    GrayImage img(3, 1, {0.5f, 0.3f, 0.9f});
    const WeightMap x = exposedness_map(img, 0.2f);
    EXPECT_FLOAT_EQ(x.at(0, 0), 1.0f);
    EXPECT_NEAR(x.at(1, 0), 0.60653, 1e-5);
    EXPECT_NEAR(x.at(2, 0), 0.13534, 1e-5);
    EXPECT_THROW(exposedness_map(img, 0.0f), std::invalid_argument);
}

TEST(QualityMaps, IdenticalImagesShareEqually) {
    Rng rng(1);
    const GrayImage img = random_image(16, 16, rng);
    for (const auto& m : quality_maps({img, img, img}))
        for (float v : m.pixels()) EXPECT_NEAR(v, 1.0f / 3.0f, 1e-6);
}

TEST(QualityMaps, ConstantImagesFallBackToEpsilon) {
    const Burst b{GrayImage(8, 8, 0.1f), GrayImage(8, 8, 0.5f), GrayImage(8, 8, 0.9f)};
    for (const auto& m : quality_maps(b))
        for (float v : m.pixels()) EXPECT_NEAR(v, 1.0f / 3.0f, 1e-6);
}

TEST(QualityMaps, TexturedMidGrayBeatsSaturated) {
    GrayImage textured(16, 16);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) textured.at(x, y) = ((x + y) % 2) ? 0.55f : 0.45f;
    const auto maps = quality_maps({textured, GrayImage(16, 16, 1.0f), GrayImage(16, 16, 1.0f)});
    for (float v : maps[0].pixels()) EXPECT_GT(v, 0.99f);
}

TEST(QualityMaps, SumToOne) {
    Rng rng(2);
    const Burst b{random_image(12, 10, rng), random_image(12, 10, rng), random_image(12, 10, rng)};
    const auto maps = quality_maps(b);
    for (std::size_t i = 0; i < maps[0].size(); ++i)
        EXPECT_NEAR(maps[0].pixels()[i] + maps[1].pixels()[i] + maps[2].pixels()[i], 1.0f, 1e-6);
}

TEST(QualityMaps, RejectsBadBursts) {
    EXPECT_THROW(quality_maps({}), std::invalid_argument);
    EXPECT_THROW(quality_maps({GrayImage(4, 4), GrayImage(4, 5)}), std::invalid_argument);
}

TEST(MertensFuse, IdenticalBurstIsIdentity) {
    Rng rng(3);
    const GrayImage img = random_image(64, 64, rng);
    EXPECT_LE(max_abs_diff(mertens_fuse({img, img, img}, 0.2f, 7), img), 1e-4);
}

TEST(MertensFuse, OutputInUnitRange) {
    Rng rng(4);
    const Burst b{random_image(40, 40, rng, -0.5f, 1.5f), random_image(40, 40, rng), random_image(40, 40, rng)};
    for (const auto out = mertens_fuse(b, 0.2f, 6); float v : out.pixels()) {
        EXPECT_GE(v, 0.0f);
        EXPECT_LE(v, 1.0f);
    }
}

TEST(MertensFuse, MatchesLonghandOracleOnRandomBursts) {
    Rng rng(5);
    for (int trial = 0; trial < 5; ++trial) {
        Burst b;
        std::vector<ref::Plane> planes;
        for (int k = 0; k < 3; ++k) {
            b.push_back(random_image(64, 64, rng));
            planes.push_back(ref::from_image(b.back()));
        }
        EXPECT_LE(max_diff(ref::mertens(planes, 0.2, 7), mertens_fuse(b, 0.2f, 7)), 1e-4);
    }
}

TEST(MertensFuse, HalfWellExposedBracketMatchesOracle) {
    // Left half is well exposed in image 0, right half in image 1; image 2 is saturated.
    Rng rng(6);
    const int n = 64;
    GrayImage a(n, n), b(n, n), c(n, n, 1.0f);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            const float s = 0.5f + 0.05f * static_cast<float>(rng.uniform(-1.0, 1.0));
            a.at(x, y) = x < n / 2 ? s : 0.02f;
            b.at(x, y) = x < n / 2 ? 0.98f : s;
        }
    std::vector<ref::Plane> planes{ref::from_image(a), ref::from_image(b), ref::from_image(c)};
    EXPECT_LE(max_diff(ref::mertens(planes, 0.2, 7), mertens_fuse({a, b, c}, 0.2f, 7)), 1e-4);
}

TEST(MertensFuse, BeatsBestSingleCameraOnClearSamples) {
    SimParams params;
    params.glare_probability = 0.0;
    double fused_total = 0.0, best_single_total = 0.0;
    const int count = 50;
    for (int i = 0; i < count; ++i) {
        const SynthSample s = make_sample(params, sample_seed(11, i));
        Burst tiles;
        for (int k = 0; k < 3; ++k) tiles.push_back(center_crop(apply_shift(s.burst[k], -s.shifts[k]), 256));
        fused_total += psnr(mertens_fuse(tiles), s.scene);
        double best = 0.0;
        for (const auto& t : tiles) best = std::max(best, psnr(t, s.scene));
        best_single_total += best;
    }
    EXPECT_GT(fused_total / count, best_single_total / count);
}
