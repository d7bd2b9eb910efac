/** networks_test.cpp - generator and discriminator structure, initialization and gradients */

#include <gtest/gtest.h>

#include <cmath>

#include "grad_cases.hpp"
#include "gradcheck.hpp"
#include "hdru/fusion.hpp"
#include "hdru/metrics.hpp"
#include "hdru/munet.hpp"
#include "hdru/nunet.hpp"
#include "hdru/pipeline.hpp"
#include "hdru/rng.hpp"
#include "hdru/synth.hpp"

using namespace hdru;
using namespace hdru::nn;

namespace {

Burst random_burst(int size, Rng& rng) {
    Burst b;
    for (int k = 0; k < kBurstSize; ++k) {
        GrayImage img(size, size);
        for (float& v : img.pixels()) v = static_cast<float>(rng.uniform());
        b.push_back(img);
    }
    return b;
}

const Tensor4& node_value(const Graph& g, const Tape& tape, const std::string& name) {
    for (std::size_t i = 0; i < g.nodes().size(); ++i)
        if (g.nodes()[i].name == name) return tape.values[i];
    throw std::invalid_argument("no node " + name);
}

}  // namespace

TEST(MuNet, ParameterBudget) {
    const MuNet net = build_munet();
    EXPECT_LT(param_count(net), 45000u);
    EXPECT_EQ(param_count(net), 15754u);
}

TEST(MuNet, CountIsIndependentOfValues) {
    MuNet a = build_munet();
    MuNet b = build_munet();
    init_mertens(b);
    EXPECT_EQ(param_count(a), param_count(b));
}

TEST(MuNet, ShapesAtTileSize) {
    const MuNet net = build_munet();
    Tape tape;
    const TensorMap out = net.graph.forward({{"burst", Tensor4({1, 3, 256, 256}, 0.5f)}}, &tape);
    EXPECT_EQ(out.at("fused").shape(), (Shape4{1, 1, 256, 256}));
    EXPECT_EQ(node_value(net.graph, tape, "pblock.img_down7").shape(), (Shape4{1, 3, 1, 1}));
    EXPECT_EQ(node_value(net.graph, tape, "pblock.wgt_down7").shape(), (Shape4{1, 3, 1, 1}));
    EXPECT_EQ(node_value(net.graph, tape, "pblock.img_down6").shape(), (Shape4{1, 3, 2, 2}));
}

TEST(MuNet, ExposureFitPeaksAtMidGray) {
    const ExposureFit fit = fit_exposure_block(0.2);
    EXPECT_GE(fit.response_at_half, 0.98);
    EXPECT_LE(fit.response_at_half, 1.0);
    EXPECT_LE(fit.max_abs_error, kExposureFitTolerance);
}

TEST(MuNet, InitializedNetworkIsIdempotentOnIdenticalConstantBursts) {
    MuNet net = build_munet();
    init_mertens(net);
    for (float v : {0.1f, 0.5f, 0.83f}) {
        const GrayImage img(256, 256, v);
        for (const auto out = munet_fuse(net, {img, img, img}); float o : out.pixels()) ASSERT_NEAR(o, v, 1e-2);
    }
}

TEST(MuNet, InitializedNetworkTracksMertens) {
    MuNet net = build_munet();
    init_mertens(net);
    SimParams params;
    for (int i = 0; i < 3; ++i) {
        const SynthSample s = make_sample(params, sample_seed(21, i));
        const RegisteredBurst reg = register_burst(s.burst);
        const GrayImage classical = mertens_fuse(reg.tiles);
        const GrayImage unrolled = munet_fuse(net, reg.tiles);
        EXPECT_LE(max_abs_diff(unrolled, classical), 0.03);
        EXPECT_GE(psnr(unrolled, classical), 35.0);
    }
}

TEST(MuNet, RandomWeightsStayInUnitRangeAndAreDeterministic) {
    MuNet net = build_munet();
    Rng rng(1);
    for (auto& p : net.graph.params().params())
        for (float& v : p.values) v = static_cast<float>(rng.uniform(-0.3, 0.3));
    const Burst burst = random_burst(256, rng);
    const GrayImage a = munet_fuse(net, burst);
    for (float v : a.pixels()) {
        ASSERT_GE(v, 0.0f);
        ASSERT_LE(v, 1.0f);
    }
    EXPECT_EQ(a, munet_fuse(net, burst));
}

TEST(MuNet, RejectsWrongBurst) {
    MuNet net = build_munet();
    EXPECT_THROW(munet_fuse(net, {GrayImage(256, 256), GrayImage(256, 256)}), std::invalid_argument);
}

TEST(MuNet, GradientsMatchFiniteDifferences) {
    MuNet net = build_munet();
    init_mertens(net);
    Rng rng(2);
    const auto checks = ref::check_gradients(net.graph, {{"burst", ref::kink_free_burst(1, 64, rng)}}, "fused", 3);
    for (const auto& c : checks) EXPECT_LE(c.rel, 1e-3) << c.name << " analytic " << c.analytic << " numeric " << c.numeric;
}

TEST(NuNet, ParameterBudget) {
    const NuNet d = build_nunet(1);
    EXPECT_LT(param_count(d), kNuNetParamBudget);
    EXPECT_LT(d.graph.params().trainable_count(), param_count(d));
}

TEST(NuNet, DeepestLevelIsSixteenthResolution) {
    const NuNet d = build_nunet(1);
    Tape tape;
    d.graph.forward({{"candidate", Tensor4({1, 1, 256, 256}, 0.5f)}}, &tape);
    EXPECT_EQ(node_value(d.graph, tape, "nunet.down4").shape(), (Shape4{1, 32, 16, 16}));
}

TEST(NuNet, ScoreIsOpenUnitIntervalAndDeterministic) {
    const NuNet d = build_nunet(2);
    Rng rng(3);
    const GrayImage img = random_burst(256, rng)[0];
    const double s = discriminate(d, img);
    EXPECT_GT(s, 0.0);
    EXPECT_LT(s, 1.0);
    EXPECT_EQ(s, discriminate(d, img));
    EXPECT_EQ(discriminate(build_nunet(2), img), s);
}

TEST(NuNet, SeedChangesWeights) {
    EXPECT_NE(build_nunet(1).graph.params().at("nunet.down1.kernel").values,
              build_nunet(2).graph.params().at("nunet.down1.kernel").values);
    EXPECT_FALSE(build_nunet(1).graph.params().at("nunet.cblock.conv1.kernel").trainable);
}

TEST(NuNet, GradientsMatchFiniteDifferences) {
    const NuNet d = build_nunet(4);
    Rng rng(5);
    Tensor4 x = ref::kink_free_burst(1, 64, rng);
    Tensor4 candidate({1, 1, 64, 64});
    std::copy(x.plane(0, 1), x.plane(0, 1) + 64 * 64, candidate.plane(0, 0));
    const auto checks = ref::check_gradients(d.graph, {{"candidate", candidate}}, "logit", 6);
    for (const auto& c : checks) EXPECT_LE(c.rel, 1e-3) << c.name << " analytic " << c.analytic << " numeric " << c.numeric;
}

TEST(NuNet, BceWithLogits) {
    Tensor4 logits({2, 1, 1, 1});
    logits.at(0, 0, 0, 0) = 0.0f;
    logits.at(1, 0, 0, 0) = 2.0f;
    Tensor4 grad;
    const double loss = bce_with_logits(logits, 1.0f, &grad);
    EXPECT_NEAR(loss, 0.5 * (std::log(2.0) + std::log1p(std::exp(-2.0))), 1e-6);
    EXPECT_NEAR(grad.at(0, 0, 0, 0), 0.5 * (0.5 - 1.0), 1e-6);
    EXPECT_NEAR(bce_with_logits(logits, 0.0f), 0.5 * (std::log(2.0) + 2.0 + std::log1p(std::exp(-2.0))), 1e-6);
}
