/**
 * reference_nn.cpp - naive double-precision graph evaluation
 */

#include "reference_nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hdru::ref {

namespace {

int clampi(int v, int lo, int hi) { return std::min(std::max(v, lo), hi); }

int floor_div(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

}  // namespace

DTensor to_double(const nn::Tensor4& t) {
    DTensor d(t.shape());
    std::copy(t.values().begin(), t.values().end(), d.v.begin());
    return d;
}

DoubleParams widen(const nn::ParamStore& store) {
    DoubleParams out;
    for (const auto& p : store.params()) out[p.name] = std::vector<double>(p.values.begin(), p.values.end());
    return out;
}

DTensor conv(const DTensor& in, const std::vector<double>& kernel, const std::vector<double>& bias,
             const nn::ConvSpec& spec, int out_h, int out_w) {
    const nn::Shape4& is = in.shape;
    const int s = spec.stride, kh = spec.kh, kw = spec.kw;
    const int py = (kh - 1) / 2, px = (kw - 1) / 2;
    nn::Shape4 os{is.n, spec.out_ch, 0, 0};
    if (spec.mode == nn::ConvMode::downsample) {
        os.h = (is.h + s - 1) / s;
        os.w = (is.w + s - 1) / s;
    } else {
        os.h = out_h > 0 ? out_h : is.h * s;
        os.w = out_w > 0 ? out_w : is.w * s;
    }
    DTensor out(os);
    for (int n = 0; n < os.n; ++n)
        for (int oc = 0; oc < os.c; ++oc)
            for (int y = 0; y < os.h; ++y)
                for (int x = 0; x < os.w; ++x) {
                    double acc = bias[oc];
                    for (int ic = 0; ic < is.c; ++ic)
                        for (int ky = 0; ky < kh; ++ky)
                            for (int kx = 0; kx < kw; ++kx) {
                                const double k = kernel[((static_cast<std::size_t>(oc) * is.c + ic) * kh + ky) * kw + kx];
                                if (spec.mode == nn::ConvMode::downsample) {
                                    acc += k * in.at(n, ic, clampi(s * y + ky - py, 0, is.h - 1),
                                                     clampi(s * x + kx - px, 0, is.w - 1));
                                } else {
                                    // Zero-inserted lattice: sample m is nonzero only at multiples of s,
                                    // where it holds the replicate-extended input at m / s.
                                    const int my = y + ky - py, mx = x + kx - px;
                                    if (floor_div(my, s) * s != my || floor_div(mx, s) * s != mx) continue;
                                    acc += k * in.at(n, ic, clampi(floor_div(my, s), 0, is.h - 1),
                                                     clampi(floor_div(mx, s), 0, is.w - 1));
                                }
                            }
                    out.at(n, oc, y, x) = acc;
                }
    return out;
}

double activation(nn::Activation a, double x) {
    switch (a) {
        case nn::Activation::identity: return x;
        case nn::Activation::tanh: return std::tanh(x);
        case nn::Activation::relu: return x > 0.0 ? x : 0.0;
        case nn::Activation::elu: return x > 0.0 ? x : std::expm1(x);
        case nn::Activation::exp: return std::exp(x);
        case nn::Activation::negate: return -x;
        case nn::Activation::sigmoid: return 1.0 / (1.0 + std::exp(-x));
    }
    throw std::invalid_argument("unknown activation");
}

std::map<std::string, DTensor> forward(const nn::Graph& g, const DoubleInputs& inputs, const DoubleParams& params) {
    const auto& nodes = g.nodes();
    std::vector<DTensor> values(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const nn::Node& node = nodes[i];
        DTensor& out = values[i];
        switch (node.kind) {
            case nn::OpKind::input: out = inputs.at(node.name); break;
            case nn::OpKind::conv: {
                int oh = -1, ow = -1;
                if (node.like >= 0) {
                    oh = values[node.like].shape.h;
                    ow = values[node.like].shape.w;
                }
                out = conv(values[node.inputs[0]], params.at(node.name + ".kernel"), params.at(node.name + ".bias"),
                           node.conv, oh, ow);
                break;
            }
            case nn::OpKind::activation:
                out = values[node.inputs[0]];
                for (double& v : out.v) v = activation(node.act, v);
                break;
            case nn::OpKind::add:
            case nn::OpKind::mul: {
                out = values[node.inputs[0]];
                const DTensor& b = values[node.inputs[1]];
                for (std::size_t j = 0; j < out.v.size(); ++j)
                    out.v[j] = node.kind == nn::OpKind::add ? out.v[j] + b.v[j] : out.v[j] * b.v[j];
                break;
            }
            case nn::OpKind::concat: {
                nn::Shape4 s = values[node.inputs[0]].shape;
                s.c = 0;
                for (int in : node.inputs) s.c += values[in].shape.c;
                out = DTensor(s);
                for (int n = 0; n < s.n; ++n) {
                    int c0 = 0;
                    for (int in : node.inputs) {
                        const DTensor& t = values[in];
                        for (int c = 0; c < t.shape.c; ++c)
                            for (int y = 0; y < s.h; ++y)
                                for (int x = 0; x < s.w; ++x) out.at(n, c0 + c, y, x) = t.at(n, c, y, x);
                        c0 += t.shape.c;
                    }
                }
                break;
            }
            case nn::OpKind::normalize: {
                const DTensor& x = values[node.inputs[0]];
                out = DTensor(x.shape);
                const double eps = node.scalar;
                for (int n = 0; n < x.shape.n; ++n)
                    for (int y = 0; y < x.shape.h; ++y)
                        for (int xx = 0; xx < x.shape.w; ++xx) {
                            double total = 0.0;
                            for (int c = 0; c < x.shape.c; ++c) total += std::max(x.at(n, c, y, xx), 0.0) + eps;
                            for (int c = 0; c < x.shape.c; ++c)
                                out.at(n, c, y, xx) = (std::max(x.at(n, c, y, xx), 0.0) + eps) / total;
                        }
                break;
            }
            case nn::OpKind::scale:
                out = values[node.inputs[0]];
                for (double& v : out.v) v *= node.scalar;
                break;
            case nn::OpKind::global_max_pool: {
                const DTensor& x = values[node.inputs[0]];
                out = DTensor(nn::Shape4{x.shape.n, x.shape.c, 1, 1});
                for (int n = 0; n < x.shape.n; ++n)
                    for (int c = 0; c < x.shape.c; ++c) {
                        double m = x.at(n, c, 0, 0);
                        for (int y = 0; y < x.shape.h; ++y)
                            for (int xx = 0; xx < x.shape.w; ++xx) m = std::max(m, x.at(n, c, y, xx));
                        out.at(n, c, 0, 0) = m;
                    }
                break;
            }
        }
    }
    std::map<std::string, DTensor> result;
    for (const auto& [name, id] : g.outputs()) result[name] = values[id];
    return result;
}

}  // namespace hdru::ref
