/**
 * nunet.hpp - feature-pyramid discriminator over a candidate tile
 *
 * The candidate is scored together with its contrast and well-exposedness maps,
 * produced by frozen single-image copies of the Mertens-initialized C/X blocks
 * ("nunet.cblock.*", "nunet.xblock.*", not trainable).
 *
 * Bottom-up: nunet.down1..4 (4, 8, 16, 32 channels; 7x7, 7x7, 7x7, 4x4; stride 2).
 * Top-down:  nunet.up1 (3x3) and nunet.up2 (7x7), 16 channels, stride-2 transposed;
 *            laterals join by addition (32x32) and concatenation (64x64).
 * Output:    nunet.right1/2 (8 channels, 5x5) -> global max pool -> nunet.classifier (1x1).
 */
#pragma once

#include <cstdint>

#include "hdru/graph.hpp"
#include "hdru/image.hpp"

namespace hdru {

inline constexpr std::size_t kNuNetParamBudget = 45000;

struct NuNet {
    nn::Graph graph;  ///< input "candidate" (N x 1 x H x W); outputs "logit" and "score"
};

/// Builds the discriminator; trainable weights get a seeded Glorot-uniform draw.
NuNet build_nunet(std::uint64_t seed, float sigma = 0.2f);

/// Sigmoid score in (0,1) for a 256x256 candidate.
double discriminate(const NuNet& net, const GrayImage& candidate);

std::size_t param_count(const NuNet& net);

/// Mean binary cross-entropy of logits against a constant label; also returns
/// d(loss)/d(logit) per element.
double bce_with_logits(const nn::Tensor4& logits, float label, nn::Tensor4* grad = nullptr);

}  // namespace hdru
