/**
 * pipeline.hpp - fine registration to the reference camera and fusion dispatch
 */
#pragma once

#include <array>
#include <string>

#include "hdru/debevec.hpp"
#include "hdru/image.hpp"
#include "hdru/registration.hpp"

namespace hdru {

struct MuNet;

struct RegisteredBurst {
    Burst tiles;                    ///< aligned, centre-cropped, camera order
    std::array<Shift, 3> shifts{};  ///< detected shift of each camera vs camera 2
};

/// Aligns cameras 1 and 3 to camera 2 by phase correlation and crops tile x tile.
RegisteredBurst register_burst(const Burst& frames, double beta = kDefaultKaiserBeta, int tile = 256);

enum class FusionMethod { mertens, munet, debevec, single };

const char* method_name(FusionMethod m);
/// Throws std::invalid_argument on an unknown name.
FusionMethod parse_method(const std::string& name);

struct FuseOptions {
    float sigma = 0.2f;
    int levels = 8;
    ExposureSpec exposures{{0.12589254117941673, 0.50118723362727224, 1.0}};
    const MuNet* net = nullptr;  ///< required for FusionMethod::munet
};

/// Fuses a registered burst. `single` returns camera 2's tile unchanged.
GrayImage fuse(FusionMethod method, const Burst& tiles, const FuseOptions& options);

}  // namespace hdru
