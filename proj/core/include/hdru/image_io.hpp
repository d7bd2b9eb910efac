/**
 * image_io.hpp - grayscale PGM (P5) and PNG read/write
 */
#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "hdru/image.hpp"

namespace hdru {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class BitDepth { u8 = 8, u16 = 16 };

/// Load an 8/16-bit grayscale PGM or PNG, scaling samples to [0,1].
/// Format is chosen by magic bytes, not extension. Color input is rejected.
GrayImage load_image(const std::filesystem::path& path);

/// Clamp to [0,1], quantize round-to-nearest, and write. Format follows the
/// extension: ".png" writes PNG, anything else writes binary PGM.
void save_image(const GrayImage& img, const std::filesystem::path& path, BitDepth depth = BitDepth::u8);

/// Quantized sample value the writer would emit for v at the given depth.
unsigned quantize(float v, BitDepth depth);

}  // namespace hdru
