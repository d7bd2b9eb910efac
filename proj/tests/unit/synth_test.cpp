/** synth_test.cpp - scene generator, burst forward model and corpus layout */

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "hdru/metrics.hpp"
#include "hdru/synth.hpp"
#include "temp_dir.hpp"

using namespace hdru;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

SimParams ideal_params() {
    SimParams p;
    p.glare_probability = 0.0;
    p.noise_sigma = 0.0;
    p.base_exposure = 1.0;
    p.gamma = 1.0;
    return p;
}

}  // namespace

TEST(Scene, DeterministicAndInRange) {
    const GrayImage a = generate_scene(5);
    EXPECT_EQ(a, generate_scene(5));
    EXPECT_EQ(a.width(), 256);
    EXPECT_EQ(a.height(), 256);
    const auto [mn, mx] = std::minmax_element(a.pixels().begin(), a.pixels().end());
    EXPECT_GE(*mn, 0.05f - 1e-6f);
    EXPECT_LE(*mx, 0.95f + 1e-6f);
}

TEST(Scene, SeedsDiffer) {
    const GrayImage first = generate_scene(0);
    for (std::uint64_t s = 1; s < 100; ++s) EXPECT_GT(max_abs_diff(first, generate_scene(s)), 0.1) << s;
}

TEST(Scene, EmbedKeepsCentre) {
    const GrayImage scene = generate_scene(3);
    const GrayImage ctx = embed_scene(scene);
    EXPECT_EQ(ctx.width(), kContextSize);
    EXPECT_EQ(center_crop(ctx, 256), scene);
}

TEST(Burst, IdealCameraThreeIsShiftedScene) {
    const GrayImage scene = generate_scene(8);
    const SynthSample s = render_burst(scene, ideal_params(), 9);
    EXPECT_EQ(s.burst[2], clamp(apply_shift(embed_scene(scene), s.shifts[2])));
    EXPECT_FALSE(s.glare);
}

TEST(Burst, NdFiltersScaleUnclippedPixels) {
    const GrayImage scene = generate_scene(10);
    const SynthSample s = render_burst(scene, ideal_params(), 11);
    const GrayImage c1 = apply_shift(s.burst[0], -s.shifts[0]);
    const GrayImage c3 = apply_shift(s.burst[2], -s.shifts[2]);
    const GrayImage a = center_crop(c1, 256), b = center_crop(c3, 256);
    for (std::size_t i = 0; i < a.size(); ++i)
        if (b.pixels()[i] < 1.0f) {
            EXPECT_NEAR(a.pixels()[i], b.pixels()[i] * std::pow(10.0, -0.9), 1e-6);
        }
}

TEST(Burst, ReferenceCameraIsUnshiftedAndOthersInRange) {
    const SimParams p;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const SynthSample s = make_sample(p, seed);
        EXPECT_EQ(s.shifts[kReferenceCamera], Shift{});
        EXPECT_EQ(center_crop(s.burst[kReferenceCamera], 256).width(), 256);
        for (int k : {0, 2})
            for (int v : {s.shifts[k].dx, s.shifts[k].dy}) {
                EXPECT_GE(std::abs(v), p.min_shift);
                EXPECT_LE(std::abs(v), p.max_shift);
            }
        for (const auto& f : s.burst)
            for (float v : f.pixels()) ASSERT_TRUE(v >= 0.0f && v <= 1.0f);
    }
}

TEST(Burst, GlareProbabilityExtremes) {
    SimParams p;
    p.glare_probability = 1.0;
    EXPECT_TRUE(make_sample(p, 1).glare);
    p.glare_probability = 0.0;
    const SynthSample s = make_sample(p, 1);
    EXPECT_FALSE(s.glare);
    for (const auto& m : s.glare_masks)
        for (float v : m.pixels()) ASSERT_EQ(v, 0.0f);
}

TEST(Burst, RejectsBadParameters) {
    const GrayImage scene = generate_scene(1);
    SimParams p;
    p.nd_transmittances[0] = 0.0;
    EXPECT_THROW(render_burst(scene, p, 1), std::invalid_argument);
    p = SimParams{};
    p.glare_probability = 1.5;
    EXPECT_THROW(render_burst(scene, p, 1), std::invalid_argument);
    p = SimParams{};
    p.max_shift = p.min_shift - 1;
    EXPECT_THROW(render_burst(scene, p, 1), std::invalid_argument);
}

TEST(Split, EveryTenthIsValidation) {
    std::size_t val = 0;
    for (std::size_t i = 0; i < 100; ++i) val += split_for(i) == Split::val;
    EXPECT_EQ(val, 10u);
    EXPECT_EQ(split_for(9), Split::val);
    EXPECT_EQ(split_for(10), Split::train);
}

TEST(Corpus, RegenerationIsByteIdentical) {
    TempDir dir;
    const Manifest a = generate_corpus(12, SimParams{}, 4, dir / "a");
    generate_corpus(12, SimParams{}, 4, dir / "b");
    EXPECT_EQ(a.entries.size(), 12u);
    EXPECT_EQ(slurp(dir / "a" / "manifest.txt"), slurp(dir / "b" / "manifest.txt"));
    for (const auto& e : a.entries)
        for (const char* f : {"cam1.pgm", "cam2.pgm", "cam3.pgm", "scene.pgm", "meta.txt"})
            EXPECT_EQ(slurp(dir / "a" / e.dir / f), slurp(dir / "b" / e.dir / f)) << e.dir << "/" << f;

    const Manifest back = read_manifest(dir / "a");
    ASSERT_EQ(back.entries.size(), 12u);
    EXPECT_EQ(back.seed, 4u);
    std::size_t val = 0;
    for (std::size_t i = 0; i < back.entries.size(); ++i) {
        EXPECT_EQ(back.entries[i].seed, a.entries[i].seed);
        EXPECT_EQ(back.entries[i].shifts, a.entries[i].shifts);
        val += back.entries[i].split == Split::val;
    }
    EXPECT_EQ(val, 1u);
}

TEST(Corpus, LoadedSampleMatchesRenderWithinQuantization) {
    TempDir dir;
    const Manifest m = generate_corpus(2, SimParams{}, 6, dir.path());
    const LoadedSample l = load_sample(dir.path(), m, 1);
    const SynthSample s = make_sample(SimParams{}, m.entries[1].seed);
    EXPECT_LE(max_abs_diff(l.scene, s.scene), 0.5 / 65535 + 1e-7);
    for (int k = 0; k < 3; ++k) EXPECT_LE(max_abs_diff(l.frames[k], s.burst[k]), 0.5 / 65535 + 1e-7);
    EXPECT_EQ(l.exposures.t, s.exposures.t);
}

TEST(Corpus, EmptyCorpusHasEmptyManifest) {
    TempDir dir;
    generate_corpus(0, SimParams{}, 1, dir.path());
    EXPECT_TRUE(read_manifest(dir.path()).entries.empty());
}
