/**
 * registration.cpp - phase correlation via FFTW
 */

#include "hdru/registration.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <memory>
#include <mutex>
#include <string>

namespace hdru {

namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};

template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <typename T>
FftwBuffer<T> fftw_buffer(std::size_t n) {
    return FftwBuffer<T>(static_cast<T*>(fftw_malloc(sizeof(T) * n)));
}

class Plan {
public:
    explicit Plan(fftw_plan p) : plan_(p) {}
    ~Plan() {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(plan_);
    }
    Plan(const Plan&) = delete;
    Plan& operator=(const Plan&) = delete;
    void execute() const { fftw_execute(plan_); }

private:
    fftw_plan plan_;
};

int signed_index(int i, int n) { return i <= n / 2 ? i : i - n; }

}  // namespace

double kaiser_weight(int d, int n, double beta) {
    if (beta == 0.0) return 1.0;
    const double r = 2.0 * static_cast<double>(d) / static_cast<double>(n);
    const double arg = std::max(0.0, 1.0 - r * r);
    return std::cyl_bessel_i(0.0, beta * std::sqrt(arg)) / std::cyl_bessel_i(0.0, beta);
}

CorrelationSurface correlation_surface(const GrayImage& reference, const GrayImage& moving) {
    if (!reference.same_shape(moving)) {
        throw std::invalid_argument("phase_correlate: dimension mismatch (" + std::to_string(reference.width()) + "x" +
                                    std::to_string(reference.height()) + " vs " + std::to_string(moving.width()) +
                                    "x" + std::to_string(moving.height()) + ")");
    }
    const int w = reference.width(), h = reference.height();
    if (w < 8 || h < 8) throw std::invalid_argument("phase_correlate: images must be at least 8x8");

    const int wc = w / 2 + 1;
    const std::size_t nreal = static_cast<std::size_t>(w) * h;
    const std::size_t ncomplex = static_cast<std::size_t>(wc) * h;
    auto real_buf = fftw_buffer<double>(nreal);
    auto spec_a = fftw_buffer<fftw_complex>(ncomplex);
    auto spec_b = fftw_buffer<fftw_complex>(ncomplex);

    std::unique_ptr<Plan> fwd_a, fwd_b, inv;
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fwd_a = std::make_unique<Plan>(fftw_plan_dft_r2c_2d(h, w, real_buf.get(), spec_a.get(), FFTW_ESTIMATE));
        fwd_b = std::make_unique<Plan>(fftw_plan_dft_r2c_2d(h, w, real_buf.get(), spec_b.get(), FFTW_ESTIMATE));
        inv = std::make_unique<Plan>(fftw_plan_dft_c2r_2d(h, w, spec_a.get(), real_buf.get(), FFTW_ESTIMATE));
    }

    auto load = [&](const GrayImage& img) {
        const auto px = img.pixels();
        for (std::size_t i = 0; i < nreal; ++i) real_buf[i] = px[i];
    };
    load(reference);
    fwd_a->execute();
    load(moving);
    fwd_b->execute();

    double energy_a = 0.0, energy_b = 0.0;
    for (std::size_t i = 0; i < ncomplex; ++i) {
        energy_a += spec_a[i][0] * spec_a[i][0] + spec_a[i][1] * spec_a[i][1];
        energy_b += spec_b[i][0] * spec_b[i][0] + spec_b[i][1] * spec_b[i][1];
    }
    if (energy_a == 0.0 || energy_b == 0.0) throw DegenerateInputError("phase_correlate: input has no spectral energy");

    constexpr double kEps = 1e-12;
    for (std::size_t i = 0; i < ncomplex; ++i) {
        const std::complex<double> a(spec_a[i][0], spec_a[i][1]);
        const std::complex<double> b(spec_b[i][0], spec_b[i][1]);
        const std::complex<double> cross = b * std::conj(a);
        const std::complex<double> r = cross / (std::abs(cross) + kEps);
        spec_a[i][0] = r.real();
        spec_a[i][1] = r.imag();
    }
    inv->execute();

    CorrelationSurface surface{w, h, std::vector<double>(nreal)};
    const double norm = 1.0 / static_cast<double>(nreal);
    for (std::size_t i = 0; i < nreal; ++i) surface.values[i] = real_buf[i] * norm;
    return surface;
}

Shift select_peak(const CorrelationSurface& surface, double beta) {
    if (surface.values.size() != static_cast<std::size_t>(surface.width) * surface.height || surface.values.empty())
        throw std::invalid_argument("select_peak: malformed surface");
    std::vector<double> wx(surface.width), wy(surface.height);
    for (int x = 0; x < surface.width; ++x) wx[x] = kaiser_weight(signed_index(x, surface.width), surface.width, beta);
    for (int y = 0; y < surface.height; ++y)
        wy[y] = kaiser_weight(signed_index(y, surface.height), surface.height, beta);

    double best = -std::numeric_limits<double>::infinity();
    int bx = 0, by = 0;
    for (int y = 0; y < surface.height; ++y) {
        for (int x = 0; x < surface.width; ++x) {
            const double v = surface.values[static_cast<std::size_t>(y) * surface.width + x] * wx[x] * wy[y];
            if (v > best) {
                best = v;
                bx = x;
                by = y;
            }
        }
    }
    return Shift{signed_index(bx, surface.width), signed_index(by, surface.height), best};
}

Shift phase_correlate(const GrayImage& reference, const GrayImage& moving, double beta) {
    if (beta < 0.0) throw std::invalid_argument("phase_correlate: beta must be >= 0");
    return select_peak(correlation_surface(reference, moving), beta);
}

GrayImage apply_shift(const GrayImage& img, const Shift& s) {
    GrayImage out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) out.at(x, y) = img.clamped(x - s.dx, y - s.dy);
    return out;
}

GrayImage circular_shift(const GrayImage& img, const Shift& s) {
    const int w = img.width(), h = img.height();
    GrayImage out(w, h);
    for (int y = 0; y < h; ++y) {
        const int sy = ((y - s.dy) % h + h) % h;
        for (int x = 0; x < w; ++x) {
            const int sx = ((x - s.dx) % w + w) % w;
            out.at(x, y) = img.at(sx, sy);
        }
    }
    return out;
}

GrayImage center_crop(const GrayImage& img, int size) {
    if (size <= 0) throw std::invalid_argument("center_crop: size must be positive");
    if (img.width() < size || img.height() < size) {
        throw std::invalid_argument("center_crop: " + std::to_string(img.width()) + "x" +
                                    std::to_string(img.height()) + " image is smaller than crop " +
                                    std::to_string(size));
    }
    const int x0 = (img.width() - size) / 2, y0 = (img.height() - size) / 2;
    GrayImage out(size, size);
    for (int y = 0; y < size; ++y) std::copy_n(img.row(y0 + y) + x0, size, out.row(y));
    return out;
}

}  // namespace hdru
