/**
 * munet.cpp - generator graph and its Mertens initialization
 */

#include "hdru/munet.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

#include "hdru/fusion.hpp"

namespace hdru {

namespace {

using nn::Activation;
using nn::ConvMode;
using nn::ConvSpec;
using nn::Param;

constexpr double kBurtAdelson[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};

ConvSpec spec(int in, int out, int k, int stride = 1, ConvMode mode = ConvMode::downsample) {
    return ConvSpec{in, out, k, k, stride, mode};
}

float& tap(Param& p, int oc, int ic, int y, int x) {
    const std::size_t in = p.dims[1], kh = p.dims[2], kw = p.dims[3];
    return p.values[((static_cast<std::size_t>(oc) * in + ic) * kh + y) * kw + x];
}

void zero(Param& p) { std::fill(p.values.begin(), p.values.end(), 0.0f); }

/// Separable 5x5 Burt-Adelson kernel times `gain`, centred in the kernel window.
void set_burt_adelson(Param& p, int oc, int ic, double gain) {
    const int k = static_cast<int>(p.dims[2]);
    const int off = (k - 5) / 2;
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 5; ++x)
            tap(p, oc, ic, off + y, off + x) = static_cast<float>(gain * kBurtAdelson[y] * kBurtAdelson[x]);
}

void set_center(Param& p, int oc, int ic, float v) {
    tap(p, oc, ic, static_cast<int>(p.dims[2]) / 2, static_cast<int>(p.dims[3]) / 2) = v;
}

Param& kernel(MuNet& net, const std::string& layer) { return net.graph.params().at(layer + ".kernel"); }
Param& bias(MuNet& net, const std::string& layer) { return net.graph.params().at(layer + ".bias"); }

double gaussian(double r, double sigma) {
    const double t = (r - 0.5) / sigma;
    return std::exp(-0.5 * t * t);
}

double model(const std::array<double, 5>& p, double r) {
    const double h1 = std::tanh(p[0] * (r - 0.5));
    const double h2 = std::tanh(p[1] * (r - 0.5));
    const double z = p[2] * h1 * h1 + p[3] * h2 * h2 + p[4];
    const double e = z > 0.0 ? z : std::expm1(z);
    return std::tanh(std::exp(-e));
}

}  // namespace

double ExposureFit::evaluate(double r) const { return model(params, r); }

ExposureFit fit_exposure_block(double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("fit_exposure_block: sigma must be positive");
    const int n = kExposureFitSamples;
    std::vector<double> r(n), target(n), weight(n);
    for (int i = 0; i < n; ++i) {
        r[i] = static_cast<double>(i) / (n - 1);
        target[i] = gaussian(r[i], sigma);
        // relative weighting keeps the tails of the Gaussian from being ignored
        weight[i] = 1.0 / std::sqrt(target[i]);
    }
    using Vec5 = Eigen::Matrix<double, 5, 1>;
    using Mat5 = Eigen::Matrix<double, 5, 5>;
    auto residuals = [&](const std::array<double, 5>& p) {
        Eigen::VectorXd res(n);
        for (int i = 0; i < n; ++i) res[i] = weight[i] * (model(p, r[i]) - target[i]);
        return res;
    };

    // Scaled to sigma so the same start serves any width of the bell.
    const double k = 0.2 / sigma;
    std::array<double, 5> p{15.0 * k, -1.0 * k, 2.0, 15.0, -2.0};
    Eigen::VectorXd res = residuals(p);
    double cost = res.squaredNorm();
    double mu = 1e-3;
    for (int iter = 0; iter < 400; ++iter) {
        Eigen::MatrixXd jac(n, 5);
        for (int j = 0; j < 5; ++j) {
            const double h = 1e-6 * std::max(1.0, std::fabs(p[j]));
            auto hi = p, lo = p;
            hi[j] += h;
            lo[j] -= h;
            jac.col(j) = (residuals(hi) - residuals(lo)) / (2.0 * h);
        }
        const Mat5 jtj = jac.transpose() * jac;
        const Vec5 jtr = jac.transpose() * res;
        bool improved = false;
        for (int tries = 0; tries < 20 && !improved; ++tries) {
            Mat5 a = jtj;
            for (int j = 0; j < 5; ++j) a(j, j) += mu * jtj(j, j);
            const Vec5 step = a.ldlt().solve(-jtr);
            auto trial = p;
            for (int j = 0; j < 5; ++j) trial[j] += step[j];
            const Eigen::VectorXd tres = residuals(trial);
            const double tcost = tres.squaredNorm();
            if (tcost < cost) {
                const double gain = cost - tcost;
                p = trial;
                res = tres;
                cost = tcost;
                mu = std::max(mu / 3.0, 1e-12);
                improved = true;
                if (gain < 1e-14 * cost) iter = 400;
            } else {
                mu *= 4.0;
            }
        }
        if (!improved) break;
    }

    ExposureFit fit;
    fit.params = p;
    for (int i = 0; i < n; ++i) fit.max_abs_error = std::max(fit.max_abs_error, std::fabs(model(p, r[i]) - target[i]));
    fit.response_at_half = model(p, 0.5);
    if (!(fit.max_abs_error <= kExposureFitTolerance))
        throw std::runtime_error("exposure block fit error " + std::to_string(fit.max_abs_error) +
                                 " exceeds tolerance " + std::to_string(kExposureFitTolerance));
    return fit;
}

MuNet build_munet(const MuNetOptions& options) {
    if (!(options.linear_scale > 0.0f && options.linear_scale <= 1.0f))
        throw std::invalid_argument("build_munet: linear_scale must lie in (0,1]");
    MuNet net;
    net.options = options;
    nn::Graph& g = net.graph;
    const int burst = g.input("burst", kBurstSize);
    net.input = burst;

    const float ls = options.linear_scale;
    // tanh(s*z)/s: a tanh layer that is near-identity at init while the weights keep their natural scale
    auto soft = [&](int z) { return g.scale(g.activation(g.scale(z, ls), Activation::tanh), 1.0f / ls); };

    int c = g.activation(g.conv("cblock.conv1", burst, spec(3, 6, 7)), Activation::relu);
    c = soft(g.conv("cblock.conv2", c, spec(6, 3, 7)));
    net.contrast = c;

    int x = g.activation(g.conv("xblock.conv1", burst, spec(3, 6, 3)), Activation::tanh);
    x = g.mul(x, x);
    x = g.conv("xblock.conv2", x, spec(6, 3, 3));
    for (Activation a : {Activation::elu, Activation::negate, Activation::exp, Activation::tanh}) x = g.activation(x, a);
    net.exposure = x;

    int q = g.mul(c, x);
    q = soft(g.conv("quality.conv", q, spec(3, 3, 3)));
    const int w = g.normalize(q, kWeightEpsilon);
    net.weights = w;

    std::vector<int> gi{burst}, gw{w};
    for (int l = 0; l < kPBlockLevels; ++l) {
        const std::string sl = std::to_string(l);
        gi.push_back(soft(g.conv("pblock.img_down" + sl, gi[l], spec(3, 3, 7, 2))));
        gw.push_back(soft(g.conv("pblock.wgt_down" + sl, gw[l], spec(3, 3, 7, 2))));
    }
    std::vector<int> blended;
    for (int l = 0; l < kPBlockLevels; ++l) {
        const std::string sl = std::to_string(l);
        const int eu = soft(g.conv("pblock.img_up" + sl, gi[l + 1], spec(3, 3, 7, 2, ConvMode::upsample), gi[l]));
        const int pq = g.concat({g.mul(gw[l], gi[l]), g.mul(gw[l], eu)});
        blended.push_back(soft(g.conv("pblock.blend" + sl, pq, spec(6, 1, 7))));
    }
    const int deepest = g.mul(gw[kPBlockLevels], gi[kPBlockLevels]);
    int s = soft(g.conv("pblock.blend8", deepest, spec(3, 1, 7)));
    for (int l = kPBlockLevels - 1; l >= 0; --l) {
        const int u = soft(g.conv("pblock.syn_up" + std::to_string(l), s, spec(1, 1, 7, 2, ConvMode::upsample), gi[l]));
        s = g.add(u, blended[l]);
    }
    g.mark_output("fused", s);
    return net;
}

void init_contrast_block(Param& conv1_kernel, Param& conv1_bias, Param& conv2_kernel, Param& conv2_bias, int images,
                         float scale) {
    zero(conv1_kernel);
    zero(conv1_bias);
    zero(conv2_kernel);
    zero(conv2_bias);
    const int c1 = static_cast<int>(conv1_kernel.dims[2]) / 2;
    const int c2 = static_cast<int>(conv2_kernel.dims[2]) / 2;
    for (int k = 0; k < images; ++k) {
        for (int sign = 0; sign < 2; ++sign) {
            const float v = sign == 0 ? scale : -scale;
            const int oc = 2 * k + sign;
            tap(conv1_kernel, oc, k, c1, c1) = -4.0f * v;
            tap(conv1_kernel, oc, k, c1 - 1, c1) = v;
            tap(conv1_kernel, oc, k, c1 + 1, c1) = v;
            tap(conv1_kernel, oc, k, c1, c1 - 1) = v;
            tap(conv1_kernel, oc, k, c1, c1 + 1) = v;
            tap(conv2_kernel, k, oc, c2, c2) = 1.0f;
        }
    }
}

void init_exposure_block(Param& conv1_kernel, Param& conv1_bias, Param& conv2_kernel, Param& conv2_bias, int images,
                         const ExposureFit& fit) {
    zero(conv1_kernel);
    zero(conv2_kernel);
    const auto& p = fit.params;
    for (int k = 0; k < images; ++k) {
        set_center(conv1_kernel, 2 * k, k, static_cast<float>(p[0]));
        set_center(conv1_kernel, 2 * k + 1, k, static_cast<float>(p[1]));
        conv1_bias.values[2 * k] = static_cast<float>(-0.5 * p[0]);
        conv1_bias.values[2 * k + 1] = static_cast<float>(-0.5 * p[1]);
        set_center(conv2_kernel, k, 2 * k, static_cast<float>(p[2]));
        set_center(conv2_kernel, k, 2 * k + 1, static_cast<float>(p[3]));
        conv2_bias.values[k] = static_cast<float>(p[4]);
    }
}

void init_mertens(MuNet& net, float sigma) {
    init_contrast_block(kernel(net, "cblock.conv1"), bias(net, "cblock.conv1"), kernel(net, "cblock.conv2"),
                        bias(net, "cblock.conv2"), kBurstSize, 1.0f);
    init_exposure_block(kernel(net, "xblock.conv1"), bias(net, "xblock.conv1"), kernel(net, "xblock.conv2"),
                        bias(net, "xblock.conv2"), kBurstSize, fit_exposure_block(sigma));

    zero(kernel(net, "quality.conv"));
    zero(bias(net, "quality.conv"));
    for (int k = 0; k < kBurstSize; ++k) set_center(kernel(net, "quality.conv"), k, k, 1.0f);

    for (int l = 0; l < kPBlockLevels; ++l) {
        const std::string sl = std::to_string(l);
        for (const char* name : {"pblock.img_down", "pblock.wgt_down", "pblock.img_up", "pblock.blend", "pblock.syn_up"}) {
            zero(kernel(net, name + sl));
            zero(bias(net, name + sl));
        }
        const bool last = l == kPBlockLevels - 1;
        for (int k = 0; k < kBurstSize; ++k) {
            set_burt_adelson(kernel(net, "pblock.img_down" + sl), k, k, 1.0);
            set_burt_adelson(kernel(net, "pblock.wgt_down" + sl), k, k, 1.0);
            // The coarsest blended level is a Gaussian, not a Laplacian level: no expansion to subtract.
            if (!last) set_burt_adelson(kernel(net, "pblock.img_up" + sl), k, k, 4.0);
            set_center(kernel(net, "pblock.blend" + sl), 0, k, 1.0f);
            set_center(kernel(net, "pblock.blend" + sl), 0, kBurstSize + k, -1.0f);
        }
        if (!last) set_burt_adelson(kernel(net, "pblock.syn_up" + sl), 0, 0, 4.0);
    }
    zero(kernel(net, "pblock.blend8"));
    zero(bias(net, "pblock.blend8"));
    for (int k = 0; k < kBurstSize; ++k) set_center(kernel(net, "pblock.blend8"), 0, k, 1.0f);
}

nn::Tensor4 stack_bursts(const std::vector<const Burst*>& bursts) {
    if (bursts.empty()) throw std::invalid_argument("stack_bursts: no bursts");
    const Burst& first = *bursts.front();
    if (first.size() != static_cast<std::size_t>(kBurstSize))
        throw std::invalid_argument("MU-Net expects exactly " + std::to_string(kBurstSize) + " images per burst");
    const int w = first.front().width(), h = first.front().height();
    nn::Tensor4 t(nn::Shape4{static_cast<int>(bursts.size()), kBurstSize, h, w});
    for (std::size_t n = 0; n < bursts.size(); ++n) {
        const Burst& b = *bursts[n];
        if (b.size() != static_cast<std::size_t>(kBurstSize))
            throw std::invalid_argument("MU-Net expects exactly " + std::to_string(kBurstSize) + " images per burst");
        for (int k = 0; k < kBurstSize; ++k) {
            if (b[k].width() != w || b[k].height() != h)
                throw std::invalid_argument("stack_bursts: burst images differ in dimensions");
            std::copy(b[k].data().begin(), b[k].data().end(), t.plane(static_cast<int>(n), k));
        }
    }
    return t;
}

GrayImage tensor_plane(const nn::Tensor4& t, int n, int c) {
    const auto& s = t.shape();
    return GrayImage(s.w, s.h, std::vector<float>(t.plane(n, c), t.plane(n, c) + s.plane()));
}

GrayImage munet_fuse(const MuNet& net, const Burst& burst) {
    if (burst.size() != static_cast<std::size_t>(kBurstSize))
        throw std::invalid_argument("munet_fuse: expected " + std::to_string(kBurstSize) + " images, got " +
                                    std::to_string(burst.size()));
    for (const auto& img : burst)
        if (img.width() != kTileSize || img.height() != kTileSize)
            throw std::invalid_argument("munet_fuse: images must be " + std::to_string(kTileSize) + "x" +
                                        std::to_string(kTileSize) + ", got " + std::to_string(img.width()) + "x" +
                                        std::to_string(img.height()));
    const auto out = net.graph.forward({{"burst", stack_bursts({&burst})}});
    return clamp(tensor_plane(out.at("fused"), 0));
}

std::size_t param_count(const MuNet& net) { return net.graph.params().scalar_count(); }

}  // namespace hdru
