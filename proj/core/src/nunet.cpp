/**
 * nunet.cpp - discriminator graph
 */

#include "hdru/nunet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hdru/munet.hpp"
#include "hdru/rng.hpp"

namespace hdru {

namespace {

using nn::Activation;
using nn::ConvMode;
using nn::ConvSpec;

ConvSpec spec(int in, int out, int k, int stride = 1, ConvMode mode = ConvMode::downsample) {
    return ConvSpec{in, out, k, k, stride, mode};
}

void glorot(nn::Param& p, Rng& rng) {
    const double fan_in = static_cast<double>(p.dims[1]) * p.dims[2] * p.dims[3];
    const double fan_out = static_cast<double>(p.dims[0]) * p.dims[2] * p.dims[3];
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (float& v : p.values) v = static_cast<float>(rng.uniform(-limit, limit));
}

}  // namespace

NuNet build_nunet(std::uint64_t seed, float sigma) {
    NuNet net;
    nn::Graph& g = net.graph;
    const int cand = g.input("candidate", 1);

    int c = g.activation(g.conv("nunet.cblock.conv1", cand, spec(1, 2, 7)), Activation::relu);
    c = g.activation(g.conv("nunet.cblock.conv2", c, spec(2, 1, 7)), Activation::tanh);
    int x = g.activation(g.conv("nunet.xblock.conv1", cand, spec(1, 2, 3)), Activation::tanh);
    x = g.mul(x, x);
    x = g.conv("nunet.xblock.conv2", x, spec(2, 1, 3));
    for (Activation a : {Activation::elu, Activation::negate, Activation::exp, Activation::tanh}) x = g.activation(x, a);
    const int features = g.concat({cand, c, x});

    const int d1 = g.activation(g.conv("nunet.down1", features, spec(3, 4, 7, 2)), Activation::elu);
    const int d2 = g.activation(g.conv("nunet.down2", d1, spec(4, 8, 7, 2)), Activation::elu);
    const int d3 = g.activation(g.conv("nunet.down3", d2, spec(8, 16, 7, 2)), Activation::elu);
    const int d4 = g.activation(g.conv("nunet.down4", d3, spec(16, 32, 4, 2)), Activation::elu);

    const int u1 = g.activation(g.conv("nunet.up1", d4, spec(32, 16, 3, 2, ConvMode::upsample), d3), Activation::elu);
    const int m1 = g.add(u1, d3);
    const int u2 = g.activation(g.conv("nunet.up2", m1, spec(16, 16, 7, 2, ConvMode::upsample), d2), Activation::elu);
    const int m2 = g.concat({u2, d2});

    const int r1 = g.activation(g.conv("nunet.right1", m1, spec(16, 8, 5)), Activation::elu);
    const int r2 = g.activation(g.conv("nunet.right2", m2, spec(24, 8, 5)), Activation::elu);
    const int pooled = g.concat({g.global_max_pool(r1), g.global_max_pool(r2)});
    const int logit = g.conv("nunet.classifier", pooled, spec(16, 1, 1));
    g.mark_output("logit", logit);
    g.mark_output("score", g.activation(logit, Activation::sigmoid));

    auto& ps = g.params();
    const float s = kDefaultLinearScale;
    init_contrast_block(ps.at("nunet.cblock.conv1.kernel"), ps.at("nunet.cblock.conv1.bias"),
                        ps.at("nunet.cblock.conv2.kernel"), ps.at("nunet.cblock.conv2.bias"), 1, s);
    init_exposure_block(ps.at("nunet.xblock.conv1.kernel"), ps.at("nunet.xblock.conv1.bias"),
                        ps.at("nunet.xblock.conv2.kernel"), ps.at("nunet.xblock.conv2.bias"), 1,
                        fit_exposure_block(sigma));
    ps.set_trainable("nunet.cblock.", false);
    ps.set_trainable("nunet.xblock.", false);

    Rng rng(seed);
    for (auto& p : ps.params())
        if (p.trainable && p.dims.size() == 4) glorot(p, rng);
    return net;
}

double discriminate(const NuNet& net, const GrayImage& candidate) {
    if (candidate.width() != kTileSize || candidate.height() != kTileSize)
        throw std::invalid_argument("discriminate: candidate must be " + std::to_string(kTileSize) + "x" +
                                    std::to_string(kTileSize));
    nn::Tensor4 t(nn::Shape4{1, 1, kTileSize, kTileSize}, candidate.data());
    const auto out = net.graph.forward({{"candidate", t}});
    const double z = out.at("logit").values()[0];
    const double score = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    return std::clamp(score, std::numeric_limits<double>::min(), 1.0 - std::numeric_limits<double>::epsilon());
}

std::size_t param_count(const NuNet& net) { return net.graph.params().scalar_count(); }

double bce_with_logits(const nn::Tensor4& logits, float label, nn::Tensor4* grad) {
    const auto z = logits.values();
    if (z.empty()) throw std::invalid_argument("bce_with_logits: empty batch");
    if (grad) *grad = nn::Tensor4(logits.shape());
    double total = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double v = z[i];
        // log(1 + exp(-|v|)) keeps both branches finite
        total += std::max(v, 0.0) - v * label + std::log1p(std::exp(-std::fabs(v)));
        if (grad) {
            const double sig = v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
            grad->values()[i] = static_cast<float>((sig - label) / static_cast<double>(z.size()));
        }
    }
    return total / static_cast<double>(z.size());
}

}  // namespace hdru
