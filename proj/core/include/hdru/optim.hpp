/**
 * optim.hpp - L1 kernel penalty, per-tensor gradient clipping and ADAM
 */
#pragma once

#include <cstdint>

#include "hdru/graph.hpp"

namespace hdru::nn {

struct PenaltyResult {
    double loss = 0.0;
    GradientSet grads;
};

/// lambda * sum |w| over trainable ".kernel" parameters; biases are exempt.
PenaltyResult l1_penalty(const ParamStore& store, double lambda);

/// Adds `src` into `dst` element-wise, creating entries as needed.
void add_gradients(GradientSet& dst, const GradientSet& src);

/// Rescales each tensor whose L2 norm exceeds clipnorm down to clipnorm.
GradientSet clip_gradients(GradientSet grads, double clipnorm);

double gradient_norm(const std::vector<float>& g);

struct AdamState {
    double lr = 0.005;
    double lr_decay = 1e-6;
    double epsilon = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    std::uint64_t step = 0;
    std::map<std::string, std::vector<double>> m;
    std::map<std::string, std::vector<double>> v;
    /// Optional per-tensor multiplier on the step size (absent = 1).
    std::map<std::string, double> step_scale;

    /// Learning rate applied by the next step: lr / (1 + decay * step).
    double current_lr() const { return lr / (1.0 + lr_decay * static_cast<double>(step)); }
};

/// One ADAM update of every trainable parameter with a gradient, in the Keras form:
///   lr_t = current_lr() * sqrt(1 - beta2^t) / (1 - beta1^t)
///   p   -= lr_t * m / (sqrt(v) + epsilon)
/// so epsilon is added to the uncorrected second moment.
void adam_step(ParamStore& store, const GradientSet& grads, AdamState& state);

/// Step multipliers proportional to each trainable tensor's RMS, floored at `floor`,
/// so one update changes a tensor by a fixed fraction of its own magnitude.
std::map<std::string, double> relative_step_scales(const ParamStore& store, double floor);

}  // namespace hdru::nn
