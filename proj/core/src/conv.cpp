/**
 * conv.cpp - polyphase strided / transposed convolution and activations
 *
 * Both modes reduce to shifted multiply-accumulates over contiguous rows of a
 * replicate-padded plane, so inner loops vectorize and the summation order per
 * output element is fixed (input channel, then kernel row, then kernel column).
 */

#include "hdru/nn_ops.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>

namespace hdru::nn {

namespace {

int floor_div(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }
int ceil_div(int a, int b) { return (a + b - 1) / b; }

// Replicate-padded copy: padded index p maps to source index clamp(p - before).
struct Padded {
    int h = 0, w = 0;
    std::vector<float> data;
};

void pad_into(Padded& dst, const float* src, int sh, int sw, int top, int left) {
    dst.data.resize(static_cast<std::size_t>(dst.h) * dst.w);
    for (int y = 0; y < dst.h; ++y) {
        const float* srow = src + static_cast<std::size_t>(std::clamp(y - top, 0, sh - 1)) * sw;
        float* drow = dst.data.data() + static_cast<std::size_t>(y) * dst.w;
        for (int x = 0; x < dst.w; ++x) drow[x] = srow[std::clamp(x - left, 0, sw - 1)];
    }
}

void fold_into(float* dst, int sh, int sw, const Padded& grad, int top, int left) {
    for (int y = 0; y < grad.h; ++y) {
        float* drow = dst + static_cast<std::size_t>(std::clamp(y - top, 0, sh - 1)) * sw;
        const float* grow = grad.data.data() + static_cast<std::size_t>(y) * grad.w;
        for (int x = 0; x < grad.w; ++x) drow[std::clamp(x - left, 0, sw - 1)] += grow[x];
    }
}

// Polyphase split of a padded plane: phase (py,px) holds rows py, py+s, ...
struct Phases {
    int s = 1, h = 0, w = 0;
    std::vector<float> data;
    float* phase(int py, int px) { return data.data() + static_cast<std::size_t>(py * s + px) * h * w; }
    const float* phase(int py, int px) const {
        return data.data() + static_cast<std::size_t>(py * s + px) * h * w;
    }
};

void split_phases(Phases& ph, const Padded& p, int s) {
    ph.s = s;
    ph.h = p.h / s;
    ph.w = p.w / s;
    ph.data.assign(static_cast<std::size_t>(s) * s * ph.h * ph.w, 0.0f);
    for (int py = 0; py < s; ++py)
        for (int px = 0; px < s; ++px) {
            float* dst = ph.phase(py, px);
            for (int y = 0; y < ph.h; ++y)
                for (int x = 0; x < ph.w; ++x)
                    dst[static_cast<std::size_t>(y) * ph.w + x] =
                        p.data[static_cast<std::size_t>(y * s + py) * p.w + x * s + px];
        }
}

void merge_phases(Padded& p, const Phases& ph) {
    const int s = ph.s;
    for (int py = 0; py < s; ++py)
        for (int px = 0; px < s; ++px) {
            const float* src = ph.phase(py, px);
            for (int y = 0; y < ph.h; ++y)
                for (int x = 0; x < ph.w; ++x)
                    p.data[static_cast<std::size_t>(y * s + py) * p.w + x * s + px] +=
                        src[static_cast<std::size_t>(y) * ph.w + x];
        }
}

constexpr int kLanes = 16;

// Taps of an output plane: source pointers for row 0 and weights, applied in list
// order. Row y reads src[t] + y * stride.
struct TapList {
    std::vector<const float*> src;
    std::vector<float> k;
    std::ptrdiff_t stride = 0;
    void clear(std::ptrdiff_t row_stride) {
        src.clear();
        k.clear();
        stride = row_stride;
    }
    void push(const float* p, float w) {
        src.push_back(p);
        k.push_back(w);
    }
    int size() const { return static_cast<int>(src.size()); }
};

using Lanes = float __attribute__((vector_size(kLanes * sizeof(float))));

inline Lanes load_lanes(const float* p) {
    Lanes v;
    std::memcpy(&v, p, sizeof v);
    return v;
}

inline void store_lanes(float* p, Lanes v) { std::memcpy(p, &v, sizeof v); }

// dst[x] += sum_t k[t] * src[t][x], register-blocked over kLanes outputs.
void tap_sum_row(float* dst, int n, const TapList& taps, int row) {
    const int nt = taps.size();
    thread_local std::vector<const float*> rows;
    rows.resize(static_cast<std::size_t>(nt));
    for (int t = 0; t < nt; ++t) rows[t] = taps.src[t] + row * taps.stride;
    const float* const* src = rows.data();
    const float* k = taps.k.data();
    int x = 0;
    for (; x + 2 * kLanes <= n; x += 2 * kLanes) {
        Lanes r0 = load_lanes(dst + x), r1 = load_lanes(dst + x + kLanes);
        for (int t = 0; t < nt; ++t) {
            const float* sp = src[t] + x;
            r0 += k[t] * load_lanes(sp);
            r1 += k[t] * load_lanes(sp + kLanes);
        }
        store_lanes(dst + x, r0);
        store_lanes(dst + x + kLanes, r1);
    }
    for (; x + kLanes <= n; x += kLanes) {
        Lanes r = load_lanes(dst + x);
        for (int t = 0; t < nt; ++t) r += k[t] * load_lanes(src[t] + x);
        store_lanes(dst + x, r);
    }
    for (; x < n; ++x) {
        float r = dst[x];
        for (int t = 0; t < nt; ++t) r += k[t] * src[t][x];
        dst[x] = r;
    }
}

// Per-tap dot products of one gradient row with shifted source rows, kept as
// kLanes partial sums per tap plus a scalar tail; reduced by TapDots::total.
struct TapDots {
    int taps = 0;
    std::vector<float> lanes;
    std::vector<float> tail;
    void reset(int t) {
        taps = t;
        lanes.assign(static_cast<std::size_t>(t) * kLanes, 0.0f);
        tail.assign(static_cast<std::size_t>(t), 0.0f);
    }
    void add_row(const float* g, int n, const float* const* src) {
        const int body = n - n % kLanes;
        for (int t = 0; t < taps; ++t) {
            float* lt = lanes.data() + static_cast<std::size_t>(t) * kLanes;
            Lanes r = load_lanes(lt);
            const float* sp = src[t];
            for (int x = 0; x < body; x += kLanes) r += load_lanes(g + x) * load_lanes(sp + x);
            store_lanes(lt, r);
            for (int x = body; x < n; ++x) tail[t] += g[x] * sp[x];
        }
    }
    double total(int t) const {
        double sum = 0.0;
        for (int j = 0; j < kLanes; ++j) sum += lanes[static_cast<std::size_t>(t) * kLanes + j];
        return sum + tail[t];
    }
};

// Zero-margined copy of a plane so that shifted reads never leave the buffer.
struct Margined {
    int h = 0, w = 0, top = 0, left = 0;
    std::vector<float> data;
    void assign(const float* src, int sh, int sw, int margin_top, int margin_left, int height, int width) {
        h = height;
        w = width;
        top = margin_top;
        left = margin_left;
        data.assign(static_cast<std::size_t>(h) * w, 0.0f);
        for (int y = 0; y < sh; ++y)
            std::copy(src + static_cast<std::size_t>(y) * sw, src + static_cast<std::size_t>(y + 1) * sw,
                      data.data() + static_cast<std::size_t>(y + top) * w + left);
    }
    // Pointer p with p[x] = src[y][x - shift] (zero outside the plane).
    const float* at(int y, int shift) const {
        return data.data() + static_cast<std::ptrdiff_t>(y + top) * w + left - shift;
    }
};

void check_spec(const ConvSpec& spec) {
    if (spec.in_ch < 1 || spec.out_ch < 1 || spec.kh < 1 || spec.kw < 1 || spec.stride < 1)
        throw std::invalid_argument("conv2d: invalid layer geometry");
}

// Geometry for upsample mode along one axis.
struct UpAxis {
    int pad = 0;     // kernel centre offset
    int before = 0;  // replicate margin before the coarse samples
    int after = 0;
};

UpAxis up_axis(int k, int s) {
    UpAxis a;
    a.pad = (k - 1) / 2;
    a.before = -floor_div(-a.pad, s);
    a.after = std::max(0, floor_div(s - 1 + k - 1 - a.pad, s));
    return a;
}

}  // namespace

Shape4 conv_output_shape(const Shape4& in, const ConvSpec& spec, int out_h, int out_w) {
    check_spec(spec);
    if (in.c != spec.in_ch)
        throw std::invalid_argument("conv2d: input has " + std::to_string(in.c) + " channels, layer expects " +
                                    std::to_string(spec.in_ch));
    if (in.h < 1 || in.w < 1) throw std::invalid_argument("conv2d: empty input " + in.str());
    const int s = spec.stride;
    if (spec.mode == ConvMode::downsample) {
        if (out_h >= 0 || out_w >= 0) {
            if (out_h != ceil_div(in.h, s) || out_w != ceil_div(in.w, s))
                throw std::invalid_argument("conv2d: downsample output size is fixed by the input");
        }
        return {in.n, spec.out_ch, ceil_div(in.h, s), ceil_div(in.w, s)};
    }
    const int oh = out_h < 0 ? in.h * s : out_h;
    const int ow = out_w < 0 ? in.w * s : out_w;
    auto legal = [s](int n, int o) { return o >= s * (n - 1) + 1 && o <= s * n; };
    if (!legal(in.h, oh) || !legal(in.w, ow))
        throw std::invalid_argument("conv2d: upsample target " + std::to_string(oh) + "x" + std::to_string(ow) +
                                    " is not reachable from " + in.str());
    return {in.n, spec.out_ch, oh, ow};
}

Tensor4 conv2d_forward(const Tensor4& input, std::span<const float> kernel, std::span<const float> bias,
                       const ConvSpec& spec, int out_h, int out_w) {
    const Shape4 os = conv_output_shape(input.shape(), spec, out_h, out_w);
    if (kernel.size() != spec.kernel_size() || bias.size() != static_cast<std::size_t>(spec.out_ch))
        throw std::invalid_argument("conv2d: parameter sizes do not match the layer geometry");
    const Shape4& is = input.shape();
    const int s = spec.stride, kh = spec.kh, kw = spec.kw;
    Tensor4 out(os);
    TapList taps;

    if (spec.mode == ConvMode::downsample) {
        const int pt = (kh - 1) / 2, pl = (kw - 1) / 2;
        Padded p;
        p.h = s * ceil_div(s * (os.h - 1) + kh, s);
        p.w = s * ceil_div(s * (os.w - 1) + kw, s);
        std::vector<Phases> phases(static_cast<std::size_t>(is.c));
        for (int n = 0; n < is.n; ++n) {
            for (int c = 0; c < is.c; ++c) {
                pad_into(p, input.plane(n, c), is.h, is.w, pt, pl);
                split_phases(phases[c], p, s);
            }
            for (int oc = 0; oc < os.c; ++oc) {
                taps.clear(phases[0].w);
                for (int ic = 0; ic < is.c; ++ic) {
                    const float* kk = kernel.data() + (static_cast<std::size_t>(oc) * is.c + ic) * kh * kw;
                    const Phases& ph = phases[ic];
                    for (int ky = 0; ky < kh; ++ky)
                        for (int kx = 0; kx < kw; ++kx)
                            if (kk[ky * kw + kx] != 0.0f)
                                taps.push(ph.phase(ky % s, kx % s) + static_cast<std::size_t>(ky / s) * ph.w + kx / s,
                                          kk[ky * kw + kx]);
                }
                for (int y = 0; y < os.h; ++y) {
                    float* d = out.plane(n, oc) + static_cast<std::size_t>(y) * os.w;
                    std::fill(d, d + os.w, bias[oc]);
                    tap_sum_row(d, os.w, taps, y);
                }
            }
        }
        return out;
    }

    const UpAxis ay = up_axis(kh, s), ax = up_axis(kw, s);
    Padded cp;
    cp.h = is.h + ay.before + ay.after;
    cp.w = is.w + ax.before + ax.after;
    std::vector<Padded> coarse(static_cast<std::size_t>(is.c), cp);
    std::vector<float> phase_out(static_cast<std::size_t>(is.h) * is.w);
    for (int n = 0; n < is.n; ++n) {
        for (int c = 0; c < is.c; ++c) pad_into(coarse[c], input.plane(n, c), is.h, is.w, ay.before, ax.before);
        for (int oc = 0; oc < os.c; ++oc) {
            float* dst = out.plane(n, oc);
            for (int ry = 0; ry < s; ++ry)
                for (int rx = 0; rx < s; ++rx) {
                    std::fill(phase_out.begin(), phase_out.end(), bias[oc]);
                    taps.clear(cp.w);
                    for (int ic = 0; ic < is.c; ++ic) {
                        const float* kk = kernel.data() + (static_cast<std::size_t>(oc) * is.c + ic) * kh * kw;
                        for (int ky = 0; ky < kh; ++ky) {
                            if ((ry + ky - ay.pad) % s != 0) continue;
                            const int oy = floor_div(ry + ky - ay.pad, s) + ay.before;
                            for (int kx = 0; kx < kw; ++kx) {
                                if ((rx + kx - ax.pad) % s != 0 || kk[ky * kw + kx] == 0.0f) continue;
                                const int ox = floor_div(rx + kx - ax.pad, s) + ax.before;
                                taps.push(coarse[ic].data.data() + static_cast<std::size_t>(oy) * cp.w + ox, kk[ky * kw + kx]);
                            }
                        }
                    }
                    for (int y = 0; y < is.h; ++y)
                        tap_sum_row(phase_out.data() + static_cast<std::size_t>(y) * is.w, is.w, taps, y);
                    for (int q = 0; q * s + ry < os.h; ++q)
                        for (int r = 0; r * s + rx < os.w; ++r)
                            dst[static_cast<std::size_t>(q * s + ry) * os.w + r * s + rx] =
                                phase_out[static_cast<std::size_t>(q) * is.w + r];
                }
        }
    }
    return out;
}

void conv2d_backward(const Tensor4& input, std::span<const float> kernel, const ConvSpec& spec,
                     const Tensor4& grad_output, Tensor4* grad_input, std::span<float> grad_kernel,
                     std::span<float> grad_bias) {
    const Shape4& is = input.shape();
    const Shape4& os = grad_output.shape();
    if (conv_output_shape(is, spec, os.h, os.w) != os)
        throw std::invalid_argument("conv2d backward: gradient shape " + os.str() + " does not match the layer");
    if (kernel.size() != spec.kernel_size() || grad_kernel.size() != spec.kernel_size() ||
        grad_bias.size() != static_cast<std::size_t>(spec.out_ch))
        throw std::invalid_argument("conv2d backward: parameter sizes do not match the layer geometry");
    if (grad_input && grad_input->shape() != is)
        throw std::invalid_argument("conv2d backward: input gradient has the wrong shape");
    const int s = spec.stride, kh = spec.kh, kw = spec.kw;
    TapDots dots;
    TapList taps;
    std::vector<const float*> srcs;

    for (int n = 0; n < os.n; ++n)
        for (int oc = 0; oc < os.c; ++oc) {
            const float* g = grad_output.plane(n, oc);
            double total = 0.0;
            for (std::size_t i = 0; i < os.plane(); ++i) total += g[i];
            grad_bias[oc] += static_cast<float>(total);
        }

    if (spec.mode == ConvMode::downsample) {
        const int pt = (kh - 1) / 2, pl = (kw - 1) / 2;
        Padded p;
        p.h = s * ceil_div(s * (os.h - 1) + kh, s);
        p.w = s * ceil_div(s * (os.w - 1) + kw, s);
        Phases ph, gph;
        Padded gp;
        gp.h = p.h;
        gp.w = p.w;
        const int ph_w = p.w / s;
        const int margin_x = (kw - 1) / s, margin_y = (kh - 1) / s;
        std::vector<Margined> gm(static_cast<std::size_t>(os.c));
        for (int n = 0; n < is.n; ++n) {
            if (grad_input)
                for (int oc = 0; oc < os.c; ++oc)
                    gm[oc].assign(grad_output.plane(n, oc), os.h, os.w, margin_y, margin_x, p.h / s + margin_y,
                                  ph_w + margin_x);
            for (int ic = 0; ic < is.c; ++ic) {
                pad_into(p, input.plane(n, ic), is.h, is.w, pt, pl);
                split_phases(ph, p, s);
                for (int oc = 0; oc < os.c; ++oc) {
                    const float* g = grad_output.plane(n, oc);
                    const std::size_t base = (static_cast<std::size_t>(oc) * is.c + ic) * kh * kw;
                    dots.reset(kh * kw);
                    srcs.resize(static_cast<std::size_t>(kh) * kw);
                    for (int y = 0; y < os.h; ++y) {
                        for (int ky = 0; ky < kh; ++ky)
                            for (int kx = 0; kx < kw; ++kx)
                                srcs[ky * kw + kx] =
                                    ph.phase(ky % s, kx % s) + static_cast<std::size_t>(y + ky / s) * ph.w + kx / s;
                        dots.add_row(g + static_cast<std::size_t>(y) * os.w, os.w, srcs.data());
                    }
                    for (int t = 0; t < kh * kw; ++t) grad_kernel[base + t] += static_cast<float>(dots.total(t));
                }
                if (!grad_input) continue;
                gph = ph;
                std::fill(gph.data.begin(), gph.data.end(), 0.0f);
                // Gather form: each padded-gradient row collects its (oc, ky, kx) contributions in order.
                for (int py = 0; py < s; ++py)
                    for (int px = 0; px < s; ++px) {
                        taps.clear(gm[0].w);
                        for (int oc = 0; oc < os.c; ++oc) {
                            const std::size_t base = (static_cast<std::size_t>(oc) * is.c + ic) * kh * kw;
                            for (int ky = py; ky < kh; ky += s)
                                for (int kx = px; kx < kw; kx += s)
                                    if (kernel[base + ky * kw + kx] != 0.0f)
                                        taps.push(gm[oc].at(-(ky / s), kx / s), kernel[base + ky * kw + kx]);
                        }
                        for (int yy = 0; yy < gph.h; ++yy)
                            tap_sum_row(gph.phase(py, px) + static_cast<std::size_t>(yy) * gph.w, gph.w, taps, yy);
                    }
                gp.data.assign(static_cast<std::size_t>(gp.h) * gp.w, 0.0f);
                merge_phases(gp, gph);
                fold_into(grad_input->plane(n, ic), is.h, is.w, gp, pt, pl);
            }
        }
        return;
    }

    const UpAxis ay = up_axis(kh, s), ax = up_axis(kw, s);
    Padded cp, gcp;
    cp.h = gcp.h = is.h + ay.before + ay.after;
    cp.w = gcp.w = is.w + ax.before + ax.after;
    const int margin_x = ax.before + ax.after, margin_y = ay.before + ay.after;
    // Output gradients per phase on the coarse lattice, zero beyond the output.
    std::vector<float> gphase(static_cast<std::size_t>(is.h) * is.w);
    std::vector<Margined> gm(static_cast<std::size_t>(os.c) * s * s);
    auto gm_at = [&](int oc, int ry, int rx) -> Margined& {
        return gm[(static_cast<std::size_t>(oc) * s + ry) * s + rx];
    };
    for (int n = 0; n < is.n; ++n) {
        for (int oc = 0; oc < os.c; ++oc) {
            const float* g = grad_output.plane(n, oc);
            for (int ry = 0; ry < s; ++ry)
                for (int rx = 0; rx < s; ++rx) {
                    std::fill(gphase.begin(), gphase.end(), 0.0f);
                    for (int q = 0; q * s + ry < os.h; ++q)
                        for (int r = 0; r * s + rx < os.w; ++r)
                            gphase[static_cast<std::size_t>(q) * is.w + r] =
                                g[static_cast<std::size_t>(q * s + ry) * os.w + r * s + rx];
                    gm_at(oc, ry, rx).assign(gphase.data(), is.h, is.w, margin_y, margin_x, gcp.h + margin_y,
                                             gcp.w + margin_x);
                }
        }
        for (int ic = 0; ic < is.c; ++ic) {
            pad_into(cp, input.plane(n, ic), is.h, is.w, ay.before, ax.before);
            for (int oc = 0; oc < os.c; ++oc) {
                const std::size_t base = (static_cast<std::size_t>(oc) * is.c + ic) * kh * kw;
                for (int ry = 0; ry < s; ++ry)
                    for (int rx = 0; rx < s; ++rx) {
                        std::vector<int> tap_index;
                        for (int ky = 0; ky < kh; ++ky)
                            for (int kx = 0; kx < kw; ++kx)
                                if ((ry + ky - ay.pad) % s == 0 && (rx + kx - ax.pad) % s == 0)
                                    tap_index.push_back(ky * kw + kx);
                        const int nt = static_cast<int>(tap_index.size());
                        dots.reset(nt);
                        srcs.resize(static_cast<std::size_t>(nt));
                        const Margined& g = gm_at(oc, ry, rx);
                        for (int y = 0; y < is.h; ++y) {
                            for (int t = 0; t < nt; ++t) {
                                const int ky = tap_index[t] / kw, kx = tap_index[t] % kw;
                                const int oy = floor_div(ry + ky - ay.pad, s) + ay.before;
                                const int ox = floor_div(rx + kx - ax.pad, s) + ax.before;
                                srcs[t] = cp.data.data() + static_cast<std::size_t>(y + oy) * cp.w + ox;
                            }
                            dots.add_row(g.at(y, 0), is.w, srcs.data());
                        }
                        for (int t = 0; t < nt; ++t) grad_kernel[base + tap_index[t]] += static_cast<float>(dots.total(t));
                    }
            }
            if (!grad_input) continue;
            gcp.data.assign(static_cast<std::size_t>(gcp.h) * gcp.w, 0.0f);
            taps.clear(gm[0].w);
            for (int oc = 0; oc < os.c; ++oc) {
                const std::size_t base = (static_cast<std::size_t>(oc) * is.c + ic) * kh * kw;
                for (int ry = 0; ry < s; ++ry)
                    for (int rx = 0; rx < s; ++rx)
                        for (int ky = 0; ky < kh; ++ky) {
                            if ((ry + ky - ay.pad) % s != 0) continue;
                            const int oy = floor_div(ry + ky - ay.pad, s) + ay.before;
                            for (int kx = 0; kx < kw; ++kx) {
                                if ((rx + kx - ax.pad) % s != 0 || kernel[base + ky * kw + kx] == 0.0f) continue;
                                const int ox = floor_div(rx + kx - ax.pad, s) + ax.before;
                                taps.push(gm_at(oc, ry, rx).at(-oy, ox), kernel[base + ky * kw + kx]);
                            }
                        }
            }
            for (int yy = 0; yy < gcp.h; ++yy)
                tap_sum_row(gcp.data.data() + static_cast<std::size_t>(yy) * gcp.w, gcp.w, taps, yy);
            fold_into(grad_input->plane(n, ic), is.h, is.w, gcp, ay.before, ax.before);
        }
    }
}

const char* activation_name(Activation a) {
    switch (a) {
        case Activation::identity: return "identity";
        case Activation::tanh: return "tanh";
        case Activation::relu: return "relu";
        case Activation::elu: return "elu";
        case Activation::exp: return "exp";
        case Activation::negate: return "negate";
        case Activation::sigmoid: return "sigmoid";
    }
    return "unknown";
}

namespace {

using Block = Eigen::Array<float, kLanes, 1>;

// Applies a vectorized Eigen expression to whole kLanes blocks (the tail is zero-padded),
// so every element takes the same code path regardless of length or alignment.
template <typename F>
void map_blocks(std::span<const float> in, std::span<float> out, F f) {
    Block x, y;
    std::size_t i = 0;
    for (; i + kLanes <= in.size(); i += kLanes) {
        std::memcpy(x.data(), in.data() + i, sizeof(float) * kLanes);
        y = f(x);
        std::memcpy(out.data() + i, y.data(), sizeof(float) * kLanes);
    }
    if (i < in.size()) {
        const std::size_t rest = in.size() - i;
        x.setZero();
        std::memcpy(x.data(), in.data() + i, sizeof(float) * rest);
        y = f(x);
        std::memcpy(out.data() + i, y.data(), sizeof(float) * rest);
    }
}

void apply_activation(Activation a, std::span<const float> in, std::span<float> out) {
    switch (a) {
        case Activation::identity: std::copy(in.begin(), in.end(), out.begin()); break;
        case Activation::negate:
            for (std::size_t i = 0; i < in.size(); ++i) out[i] = -in[i];
            break;
        case Activation::relu:
            for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] > 0.0f ? in[i] : 0.0f;
            break;
        case Activation::tanh: map_blocks(in, out, [](const Block& x) -> Block { return x.tanh(); }); break;
        case Activation::exp: map_blocks(in, out, [](const Block& x) -> Block { return x.exp(); }); break;
        case Activation::elu:
            map_blocks(in, out, [](const Block& x) -> Block { return (x > 0.0f).select(x, x.expm1()); });
            break;
        case Activation::sigmoid: map_blocks(in, out, [](const Block& x) -> Block { return x.logistic(); }); break;
    }
}

}  // namespace

float activate_scalar(Activation a, float x) {
    float y = 0.0f;
    apply_activation(a, std::span<const float>(&x, 1), std::span<float>(&y, 1));
    return y;
}

Tensor4 activate(const Tensor4& input, Activation a) {
    Tensor4 out(input.shape());
    apply_activation(a, input.values(), out.values());
    return out;
}

Tensor4 activation_backward(const Tensor4& input, const Tensor4& output, const Tensor4& grad_output, Activation a) {
    if (input.shape() != grad_output.shape() || output.shape() != grad_output.shape())
        throw std::invalid_argument("activation backward: shape mismatch");
    Tensor4 gin(input.shape());
    auto x = input.values();
    auto y = output.values();
    auto g = grad_output.values();
    auto d = gin.values();
    for (std::size_t i = 0; i < g.size(); ++i) {
        float slope = 1.0f;
        switch (a) {
            case Activation::identity: slope = 1.0f; break;
            case Activation::tanh: slope = 1.0f - y[i] * y[i]; break;
            case Activation::relu: slope = x[i] > 0.0f ? 1.0f : 0.0f; break;
            case Activation::elu: slope = x[i] > 0.0f ? 1.0f : y[i] + 1.0f; break;
            case Activation::exp: slope = y[i]; break;
            case Activation::negate: slope = -1.0f; break;
            case Activation::sigmoid: slope = y[i] * (1.0f - y[i]); break;
        }
        d[i] = g[i] * slope;
    }
    return gin;
}

}  // namespace hdru::nn
