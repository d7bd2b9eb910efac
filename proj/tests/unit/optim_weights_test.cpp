/** optim_weights_test.cpp - penalty, clipping, ADAM and the weights container */

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "hdru/image_io.hpp"
#include "hdru/munet.hpp"
#include "hdru/optim.hpp"
#include "hdru/weights_io.hpp"
#include "temp_dir.hpp"

using namespace hdru;
using namespace hdru::nn;

namespace {

ParamStore single(float w) {
    ParamStore s;
    s.add("w.kernel", {1}).values[0] = w;
    return s;
}

// Minimizes (w - 3)^2 from w = 0 and returns the final weight.
double adam_quadratic(double lr, int steps) {
    ParamStore s = single(0.0f);
    AdamState st;
    st.lr = lr;
    for (int i = 0; i < steps; ++i) {
        const float w = s.at("w.kernel").values[0];
        adam_step(s, {{"w.kernel", {2.0f * (w - 3.0f)}}}, st);
    }
    return s.at("w.kernel").values[0];
}

}  // namespace

TEST(L1Penalty, ZeroWeights) {
    const PenaltyResult r = l1_penalty(single(0.0f), 1e-3);
    EXPECT_EQ(r.loss, 0.0);
    EXPECT_EQ(r.grads.at("w.kernel")[0], 0.0f);
}

TEST(L1Penalty, SingleWeight) {
    const PenaltyResult r = l1_penalty(single(2.0f), 1e-3);
    EXPECT_NEAR(r.loss, 0.002, 1e-12);
    EXPECT_NEAR(r.grads.at("w.kernel")[0], 0.001f, 1e-9);
}

TEST(L1Penalty, SignFlipInvariantAndBiasExempt) {
    ParamStore a, b;
    a.add("c.kernel", {3}).values = {0.5f, -1.0f, 2.0f};
    a.add("c.bias", {1}).values = {7.0f};
    b.add("c.kernel", {3}).values = {-0.5f, 1.0f, -2.0f};
    b.add("c.bias", {1}).values = {-7.0f};
    EXPECT_DOUBLE_EQ(l1_penalty(a, 1e-3).loss, l1_penalty(b, 1e-3).loss);
    EXPECT_NEAR(l1_penalty(a, 1e-3).loss, 3.5e-3, 1e-12);
    EXPECT_EQ(l1_penalty(a, 1e-3).grads.count("c.bias"), 0u);
}

TEST(ClipGradients, UnderThresholdUnchanged) {
    const GradientSet g{{"a", {0.03f, 0.04f}}};
    EXPECT_EQ(clip_gradients(g, 0.1), g);
}

TEST(ClipGradients, ScalesToNorm) {
    const GradientSet out = clip_gradients({{"a", {0.3f, 0.4f}}}, 0.1);
    EXPECT_NEAR(out.at("a")[0], 0.06f, 1e-7);
    EXPECT_NEAR(out.at("a")[1], 0.08f, 1e-7);
}

TEST(ClipGradients, PostConditionHoldsPerTensor) {
    GradientSet g;
    for (int t = 0; t < 20; ++t) {
        std::vector<float> v(100 + t);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<float>(std::sin(0.7 * i + t) * (t + 1));
        g["t" + std::to_string(t)] = v;
    }
    for (const auto& [name, v] : clip_gradients(g, 0.1)) EXPECT_LE(gradient_norm(v), 0.1) << name;
}

TEST(Adam, ZeroGradientLeavesParameters) {
    ParamStore s = single(1.5f);
    AdamState st;
    adam_step(s, {{"w.kernel", {0.0f}}}, st);
    EXPECT_EQ(s.at("w.kernel").values[0], 1.5f);
    EXPECT_EQ(st.step, 1u);
    adam_step(s, {}, st);
    EXPECT_EQ(st.step, 2u);
}

TEST(Adam, ConvergesOnQuadratic) {
    for (double lr : {0.005, 0.01, 0.05}) EXPECT_LT(std::fabs(adam_quadratic(lr, 4000) - 3.0), 0.05) << lr;
}

TEST(Adam, ConstantGradientStepHasClosedForm) {
    // With g constant, m = g(1 - b1^t) and v = g^2(1 - b2^t), so the step is
    // lr * g / (g + eps / sqrt(1 - b2^t)).
    ParamStore s = single(0.0f);
    AdamState st;
    st.lr_decay = 0.0;
    double w = 0.0;
    for (int t = 1; t <= 50; ++t) {
        adam_step(s, {{"w.kernel", {0.5f}}}, st);
        w -= st.lr * 0.5 / (0.5 + st.epsilon / std::sqrt(1.0 - std::pow(st.beta2, t)));
        EXPECT_NEAR(s.at("w.kernel").values[0], w, 1e-6) << t;
    }
}

TEST(Adam, StepScaleMultipliesUpdate) {
    ParamStore a = single(0.0f), b = single(0.0f);
    AdamState sa, sb;
    sb.step_scale["w.kernel"] = 0.25;
    adam_step(a, {{"w.kernel", {1.0f}}}, sa);
    adam_step(b, {{"w.kernel", {1.0f}}}, sb);
    EXPECT_NEAR(b.at("w.kernel").values[0], 0.25f * a.at("w.kernel").values[0], 1e-9);
}

TEST(Adam, RelativeStepScales) {
    ParamStore s;
    s.add("a.kernel", {4}).values = {3.0f, -3.0f, 3.0f, -3.0f};
    s.add("a.bias", {2});
    s.add("f.kernel", {1}, false).values = {5.0f};
    const auto sc = relative_step_scales(s, 1e-3);
    EXPECT_DOUBLE_EQ(sc.at("a.kernel"), 3.0);
    EXPECT_DOUBLE_EQ(sc.at("a.bias"), 1e-3);
    EXPECT_EQ(sc.count("f.kernel"), 0u);
    EXPECT_THROW(relative_step_scales(s, 0.0), std::invalid_argument);
}

TEST(Adam, DecayedLearningRate) {
    AdamState st;
    st.step = 1000000;
    EXPECT_DOUBLE_EQ(st.current_lr(), 0.005 / 2.0);
}

TEST(Adam, FrozenParametersAreSkipped) {
    ParamStore s = single(1.0f);
    s.set_trainable("w", false);
    AdamState st;
    adam_step(s, {{"w.kernel", {1.0f}}}, st);
    EXPECT_EQ(s.at("w.kernel").values[0], 1.0f);
}

TEST(Weights, RoundTripIsBitwise) {
    TempDir dir;
    MuNet net = build_munet();
    init_mertens(net);
    save_weights(net.graph.params(), dir / "w.munw");
    const ParamStore back = load_weights(dir / "w.munw");
    ASSERT_EQ(back.params().size(), net.graph.params().params().size());
    for (const auto& p : net.graph.params().params()) {
        EXPECT_EQ(back.at(p.name).dims, p.dims);
        EXPECT_EQ(0, std::memcmp(back.at(p.name).values.data(), p.values.data(), p.values.size() * sizeof(float)));
    }
    MuNet other = build_munet();
    load_weights_into(other.graph.params(), dir / "w.munw");
    for (const auto& p : net.graph.params().params()) EXPECT_EQ(other.graph.params().at(p.name).values, p.values);
}

TEST(Weights, SerializationIsDeterministic) {
    MuNet a = build_munet(), b = build_munet();
    init_mertens(a);
    init_mertens(b);
    EXPECT_EQ(serialize_weights(a.graph.params()), serialize_weights(b.graph.params()));
}

TEST(Weights, RejectsMalformedFiles) {
    const std::string good = serialize_weights(single(1.0f));
    std::string bad_magic = good;
    bad_magic[0] = 'X';
    EXPECT_THROW(deserialize_weights(bad_magic), WeightsFormatError);
    EXPECT_THROW(deserialize_weights(good.substr(0, good.size() - 1)), WeightsFormatError);
    EXPECT_THROW(deserialize_weights(good + "x"), WeightsFormatError);
    std::string bad_version = good;
    bad_version[4] = 9;
    EXPECT_THROW(deserialize_weights(bad_version), WeightsFormatError);
}

TEST(Weights, MissingParameterIsNamed) {
    TempDir dir;
    ParamStore partial;
    partial.add("cblock.conv1.kernel", {6, 3, 7, 7});
    save_weights(partial, dir / "p.munw");
    MuNet net = build_munet();
    try {
        load_weights_into(net.graph.params(), dir / "p.munw");
        FAIL() << "expected a throw";
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("cblock.conv1.bias"), std::string::npos) << e.what();
    }
}

TEST(Weights, MissingFileIsIoError) {
    TempDir dir;
    EXPECT_THROW(load_weights(dir / "none.munw"), IoError);
}
