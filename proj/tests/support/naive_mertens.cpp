/**
 * naive_mertens.cpp - exposure fusion written out longhand
 */

#include "naive_mertens.hpp"

#include <algorithm>
#include <cmath>

namespace hdru::ref {

namespace {

const double kBinomial[5] = {1.0, 4.0, 6.0, 4.0, 1.0};

int clampi(int v, int lo, int hi) { return std::min(std::max(v, lo), hi); }

}  // namespace

double Plane::clamped(int x, int y) const { return at(clampi(x, 0, w - 1), clampi(y, 0, h - 1)); }

Plane from_image(const GrayImage& img) {
    Plane p(img.width(), img.height());
    for (int y = 0; y < p.h; ++y)
        for (int x = 0; x < p.w; ++x) p.at(x, y) = img.at(x, y);
    return p;
}

Plane reduce(const Plane& p) {
    Plane out((p.w + 1) / 2, (p.h + 1) / 2);
    for (int y = 0; y < out.h; ++y)
        for (int x = 0; x < out.w; ++x) {
            double acc = 0.0;
            for (int j = -2; j <= 2; ++j)
                for (int i = -2; i <= 2; ++i)
                    acc += kBinomial[j + 2] * kBinomial[i + 2] / 256.0 * p.clamped(2 * x + i, 2 * y + j);
            out.at(x, y) = acc;
        }
    return out;
}

// Zero-insert the replicate-extended coarse plane, then blur with 4 * w(i) w(j).
Plane expand(const Plane& p, int w, int h) {
    Plane out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int j = -2; j <= 2; ++j)
                for (int i = -2; i <= 2; ++i) {
                    const int my = y + j, mx = x + i;
                    if (((my % 2) + 2) % 2 != 0 || ((mx % 2) + 2) % 2 != 0) continue;
                    const int cy = my >= 0 ? my / 2 : -((-my + 1) / 2);
                    const int cx = mx >= 0 ? mx / 2 : -((-mx + 1) / 2);
                    acc += 4.0 * kBinomial[j + 2] * kBinomial[i + 2] / 256.0 * p.clamped(cx, cy);
                }
            out.at(x, y) = acc;
        }
    return out;
}

std::vector<Plane> gaussian(const Plane& p, int levels) {
    std::vector<Plane> g{p};
    while (static_cast<int>(g.size()) < levels) g.push_back(reduce(g.back()));
    return g;
}

std::vector<Plane> laplacian(const Plane& p, int levels) {
    const auto g = gaussian(p, levels);
    std::vector<Plane> l;
    for (int k = 0; k + 1 < levels; ++k) {
        Plane d = g[k];
        const Plane up = expand(g[k + 1], d.w, d.h);
        for (std::size_t i = 0; i < d.v.size(); ++i) d.v[i] -= up.v[i];
        l.push_back(d);
    }
    l.push_back(g.back());
    return l;
}

Plane collapse(const std::vector<Plane>& lap) {
    Plane acc = lap.back();
    for (int k = static_cast<int>(lap.size()) - 2; k >= 0; --k) {
        Plane up = expand(acc, lap[k].w, lap[k].h);
        for (std::size_t i = 0; i < up.v.size(); ++i) up.v[i] += lap[k].v[i];
        acc = up;
    }
    return acc;
}

Plane mertens(const std::vector<Plane>& burst, double sigma, int levels) {
    const int w = burst[0].w, h = burst[0].h;
    std::vector<Plane> q;
    for (const Plane& img : burst) {
        Plane m(w, h);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const double lap = img.clamped(x - 1, y) + img.clamped(x + 1, y) + img.clamped(x, y - 1) +
                                   img.clamped(x, y + 1) - 4.0 * img.at(x, y);
                const double t = (img.at(x, y) - 0.5) / sigma;
                m.at(x, y) = std::fabs(lap) * std::exp(-0.5 * t * t) + 1e-12;
            }
        q.push_back(m);
    }
    for (std::size_t i = 0; i < q[0].v.size(); ++i) {
        double total = 0.0;
        for (const Plane& m : q) total += m.v[i];
        for (Plane& m : q) m.v[i] /= total;
    }
    std::vector<Plane> blend;
    for (std::size_t k = 0; k < burst.size(); ++k) {
        const auto l = laplacian(burst[k], levels);
        const auto g = gaussian(q[k], levels);
        if (blend.empty())
            for (const Plane& p : l) blend.emplace_back(p.w, p.h);
        for (int lv = 0; lv < levels; ++lv)
            for (std::size_t i = 0; i < blend[lv].v.size(); ++i) blend[lv].v[i] += g[lv].v[i] * l[lv].v[i];
    }
    Plane out = collapse(blend);
    for (double& v : out.v) v = std::clamp(v, 0.0, 1.0);
    return out;
}

}  // namespace hdru::ref
