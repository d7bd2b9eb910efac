#include "hdru/pipeline.hpp"

#include <stdexcept>
#include <string>

#include "hdru/fusion.hpp"
#include "hdru/munet.hpp"
#include "hdru/synth.hpp"

namespace hdru {

RegisteredBurst register_burst(const Burst& frames, double beta, int tile) {
    if (frames.size() != 3) throw std::invalid_argument("register_burst: expected 3 frames");
    check_burst(frames, "register_burst");
    if (tile <= 0 || frames[0].width() < tile || frames[0].height() < tile)
        throw std::invalid_argument("register_burst: frames are smaller than the " + std::to_string(tile) + " tile");
    const GrayImage& ref = frames[kReferenceCamera];
    RegisteredBurst r;
    for (int k = 0; k < 3; ++k) {
        if (k == kReferenceCamera) {
            r.shifts[k] = Shift{};
            r.tiles.push_back(center_crop(ref, tile));
            continue;
        }
        r.shifts[k] = phase_correlate(ref, frames[k], beta);
        r.tiles.push_back(center_crop(apply_shift(frames[k], -r.shifts[k]), tile));
    }
    return r;
}

const char* method_name(FusionMethod m) {
    switch (m) {
        case FusionMethod::mertens: return "mertens";
        case FusionMethod::munet: return "munet";
        case FusionMethod::debevec: return "debevec";
        case FusionMethod::single: return "single";
    }
    return "unknown";
}

FusionMethod parse_method(const std::string& name) {
    for (auto m : {FusionMethod::mertens, FusionMethod::munet, FusionMethod::debevec, FusionMethod::single})
        if (name == method_name(m)) return m;
    throw std::invalid_argument("unknown fusion method '" + name + "'");
}

GrayImage fuse(FusionMethod method, const Burst& tiles, const FuseOptions& options) {
    if (tiles.size() != 3) throw std::invalid_argument("fuse: expected 3 images");
    check_burst(tiles, "fuse");
    switch (method) {
        case FusionMethod::mertens: return mertens_fuse(tiles, options.sigma, options.levels);
        case FusionMethod::munet:
            if (!options.net) throw std::invalid_argument("fuse: munet requires weights");
            return munet_fuse(*options.net, tiles);
        case FusionMethod::debevec: return durand_tonemap(debevec_merge(tiles, options.exposures));
        case FusionMethod::single: return tiles[kReferenceCamera];
    }
    throw std::invalid_argument("fuse: unknown method");
}

}  // namespace hdru
