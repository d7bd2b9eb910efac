/**
 * optim.cpp - regularization, clipping, ADAM
 */

#include "hdru/optim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hdru::nn {

namespace {

bool is_kernel(const std::string& name) {
    static const std::string suffix = ".kernel";
    return name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

PenaltyResult l1_penalty(const ParamStore& store, double lambda) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("l1_penalty: lambda must be nonnegative");
    PenaltyResult r;
    for (const auto& p : store.params()) {
        if (!p.trainable || !is_kernel(p.name)) continue;
        auto& g = r.grads[p.name];
        g.resize(p.values.size());
        double sum = 0.0;
        for (std::size_t i = 0; i < p.values.size(); ++i) {
            const float w = p.values[i];
            sum += std::fabs(static_cast<double>(w));
            g[i] = static_cast<float>(lambda * ((w > 0.0f) - (w < 0.0f)));
        }
        r.loss += lambda * sum;
    }
    return r;
}

void add_gradients(GradientSet& dst, const GradientSet& src) {
    for (const auto& [name, g] : src) {
        auto& d = dst[name];
        if (d.empty()) {
            d = g;
            continue;
        }
        if (d.size() != g.size()) throw std::invalid_argument("add_gradients: size mismatch for " + name);
        for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
    }
}

double gradient_norm(const std::vector<float>& g) {
    double s = 0.0;
    for (float v : g) s += static_cast<double>(v) * v;
    return std::sqrt(s);
}

GradientSet clip_gradients(GradientSet grads, double clipnorm) {
    if (!(clipnorm > 0.0)) throw std::invalid_argument("clip_gradients: clipnorm must be positive");
    for (auto& [name, g] : grads) {
        const double norm = gradient_norm(g);
        if (norm > clipnorm) {
            const double f = clipnorm / norm;
            for (float& v : g) v = static_cast<float>(v * f);
            // rounding can leave the result a hair above the bound
            while (gradient_norm(g) > clipnorm)
                for (float& v : g) v = std::nextafter(v, 0.0f);
        }
    }
    return grads;
}

void adam_step(ParamStore& store, const GradientSet& grads, AdamState& state) {
    for (const auto& [name, g] : grads)
        if (store.at(name).values.size() != g.size())
            throw std::invalid_argument("adam_step: gradient size mismatch for " + name);

    const double lr = state.current_lr();
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double lr_t = lr * std::sqrt(1.0 - std::pow(state.beta2, t)) / (1.0 - std::pow(state.beta1, t));
    for (auto& p : store.params()) {
        if (!p.trainable) continue;
        auto it = grads.find(p.name);
        if (it == grads.end()) continue;
        const auto& g = it->second;
        const auto sc = state.step_scale.find(p.name);
        const double step = sc == state.step_scale.end() ? lr_t : lr_t * sc->second;
        auto& m = state.m[p.name];
        auto& v = state.v[p.name];
        if (m.empty()) {
            m.assign(g.size(), 0.0);
            v.assign(g.size(), 0.0);
        }
        for (std::size_t i = 0; i < g.size(); ++i) {
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * static_cast<double>(g[i]) * g[i];
            p.values[i] = static_cast<float>(p.values[i] - step * m[i] / (std::sqrt(v[i]) + state.epsilon));
        }
    }
}

std::map<std::string, double> relative_step_scales(const ParamStore& store, double floor) {
    if (!(floor > 0.0)) throw std::invalid_argument("relative_step_scales: floor must be positive");
    std::map<std::string, double> out;
    for (const auto& p : store.params()) {
        if (!p.trainable || p.values.empty()) continue;
        double sq = 0.0;
        for (float v : p.values) sq += static_cast<double>(v) * v;
        out[p.name] = std::max(floor, std::sqrt(sq / static_cast<double>(p.values.size())));
    }
    return out;
}

}  // namespace hdru::nn
