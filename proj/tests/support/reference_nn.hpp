/**
 * reference_nn.hpp - naive double-precision evaluator for graph ops
 *
 * Written directly from the op definitions, without the polyphase or tap-list
 * machinery of the library, so it can serve as an oracle for forward values and
 * as a precise function for numerical differentiation.
 */
#pragma once

#include <map>
#include <string>
#include <vector>

#include "hdru/graph.hpp"

namespace hdru::ref {

struct DTensor {
    nn::Shape4 shape;
    std::vector<double> v;

    DTensor() = default;
    explicit DTensor(nn::Shape4 s, double fill = 0.0) : shape(s), v(s.numel(), fill) {}

    double& at(int n, int c, int y, int x) { return v[((static_cast<std::size_t>(n) * shape.c + c) * shape.h + y) * shape.w + x]; }
    double at(int n, int c, int y, int x) const {
        return v[((static_cast<std::size_t>(n) * shape.c + c) * shape.h + y) * shape.w + x];
    }
};

DTensor to_double(const nn::Tensor4& t);

using DoubleParams = std::map<std::string, std::vector<double>>;
using DoubleInputs = std::map<std::string, DTensor>;

/// Parameter values of a store widened to double.
DoubleParams widen(const nn::ParamStore& store);

DTensor conv(const DTensor& in, const std::vector<double>& kernel, const std::vector<double>& bias,
             const nn::ConvSpec& spec, int out_h = -1, int out_w = -1);

double activation(nn::Activation a, double x);

/// Evaluates every node of g in double and returns the marked outputs.
std::map<std::string, DTensor> forward(const nn::Graph& g, const DoubleInputs& inputs, const DoubleParams& params);

}  // namespace hdru::ref
