/**
 * munet.hpp - Mertens exposure fusion unrolled into a convolutional generator
 *
 * Blocks and parameter names:
 *   cblock.conv1 / cblock.conv2   contrast |Laplacian| per image (relu pair, then tanh)
 *   xblock.conv1 / xblock.conv2   well-exposedness, followed by elu -> negate -> exp -> tanh
 *   quality.conv                  3x3 conv on the contrast x exposedness product, tanh,
 *                                 then a fixed per-pixel normalization across images
 *   pblock.img_down{l}, pblock.wgt_down{l}   stride-2 analysis of images and weights
 *   pblock.img_up{l}                         expansion of the next image level
 *   pblock.blend{l}, pblock.blend8           per-level weighted Laplacian blend
 *   pblock.syn_up{l}                         synthesis (collapse) ladder
 * Levels l run 0..7; the analysis reaches a 1x1 plane at level 8 for 256x256 input.
 */
#pragma once

#include <array>

#include "hdru/graph.hpp"
#include "hdru/image.hpp"

namespace hdru {

inline constexpr int kTileSize = 256;
inline constexpr int kBurstSize = 3;
inline constexpr int kPBlockLevels = 8;
inline constexpr float kDefaultLinearScale = 0.1f;

struct MuNetOptions {
    /// Pre-scale that keeps initialized tanh layers in their near-linear range.
    float linear_scale = kDefaultLinearScale;
};

struct MuNet {
    nn::Graph graph;
    MuNetOptions options;
    int input = -1;       ///< node id of the 3-channel burst input ("burst")
    int contrast = -1;    ///< C-Block output node
    int exposure = -1;    ///< X-Block output node
    int weights = -1;     ///< normalized quality node
};

MuNet build_munet(const MuNetOptions& options = {});

/// Pointwise X-Block model: tanh(exp(-elu(c1*tanh(a(R-.5))^2 + c2*tanh(b(R-.5))^2 + d)))
struct ExposureFit {
    std::array<double, 5> params{};  ///< a, b, c1, c2, d
    double max_abs_error = 0.0;      ///< over the fitting samples, vs the Gaussian
    double response_at_half = 0.0;

    double evaluate(double r) const;
};

inline constexpr double kExposureFitTolerance = 0.02;
inline constexpr int kExposureFitSamples = 1001;

/// Least-squares fit of the X-Block response to exp(-0.5((R-0.5)/sigma)^2).
/// Throws std::runtime_error when the fit is worse than kExposureFitTolerance.
ExposureFit fit_exposure_block(double sigma);

/// Sets the C-Block kernels for `images` independent channels (pair per image).
void init_contrast_block(nn::Param& conv1_kernel, nn::Param& conv1_bias, nn::Param& conv2_kernel,
                         nn::Param& conv2_bias, int images, float scale);

void init_exposure_block(nn::Param& conv1_kernel, nn::Param& conv1_bias, nn::Param& conv2_kernel,
                         nn::Param& conv2_bias, int images, const ExposureFit& fit);

/// Parameters that make the forward pass approximate mertens_fuse(sigma, 8 levels).
void init_mertens(MuNet& net, float sigma = 0.2f);

/// Stacks the burst in camera order, runs the graph and clamps to [0,1].
GrayImage munet_fuse(const MuNet& net, const Burst& burst);

/// Packs bursts into an N x 3 x H x W tensor, one channel per camera.
nn::Tensor4 stack_bursts(const std::vector<const Burst*>& bursts);

/// Copies one 1-channel plane of a tensor into an image (no clamping).
GrayImage tensor_plane(const nn::Tensor4& t, int n, int c = 0);

std::size_t param_count(const MuNet& net);

}  // namespace hdru
