/**
 * nn_ops.hpp - convolution and pointwise activation kernels with gradients
 *
 * Convolution is cross-correlation with replicate padding.
 *  - downsample mode: strided correlation, output = ceil(input / stride).
 *    Padding is (k-1)/2 before and the remainder after, so even kernels work.
 *  - upsample mode (transposed): the replicate-extended input is zero-inserted
 *    by the stride, then correlated. Output defaults to input * stride, or any
 *    size in [stride*(n-1)+1, stride*n].
 * Kernel layout is [out_ch][in_ch][kh][kw].
 */
#pragma once

#include <span>
#include <vector>

#include "hdru/tensor.hpp"

namespace hdru::nn {

enum class ConvMode { downsample, upsample };

struct ConvSpec {
    int in_ch = 1;
    int out_ch = 1;
    int kh = 3;
    int kw = 3;
    int stride = 1;
    ConvMode mode = ConvMode::downsample;

    std::size_t kernel_size() const noexcept { return static_cast<std::size_t>(out_ch) * in_ch * kh * kw; }
};

/// Standalone convolution parameters (kernel, bias, geometry).
struct ConvParams {
    ConvSpec spec;
    std::vector<float> kernel;
    std::vector<float> bias;
};

/// Output spatial size for the given input; out_h/out_w < 0 picks the default.
Shape4 conv_output_shape(const Shape4& in, const ConvSpec& spec, int out_h = -1, int out_w = -1);

Tensor4 conv2d_forward(const Tensor4& input, std::span<const float> kernel, std::span<const float> bias,
                       const ConvSpec& spec, int out_h = -1, int out_w = -1);

/// Accumulates into grad_input (if non-null), grad_kernel and grad_bias.
void conv2d_backward(const Tensor4& input, std::span<const float> kernel, const ConvSpec& spec,
                     const Tensor4& grad_output, Tensor4* grad_input, std::span<float> grad_kernel,
                     std::span<float> grad_bias);

inline Tensor4 conv2d(const Tensor4& input, const ConvParams& p, int out_h = -1, int out_w = -1) {
    return conv2d_forward(input, p.kernel, p.bias, p.spec, out_h, out_w);
}

enum class Activation { identity, tanh, relu, elu, exp, negate, sigmoid };

const char* activation_name(Activation a);

float activate_scalar(Activation a, float x);
Tensor4 activate(const Tensor4& input, Activation a);

/// d(loss)/d(input) given input, forward output and d(loss)/d(output).
Tensor4 activation_backward(const Tensor4& input, const Tensor4& output, const Tensor4& grad_output, Activation a);

}  // namespace hdru::nn
