/**
 * synth.hpp - synthetic through-windshield bursts with ground truth
 *
 * Forward model per camera k (relative radiance, unit exposure time):
 *   radiance  = base_exposure * scene^gamma  (scene mirror-padded to the context size)
 *             + cos^2(angle_k - glare_polarization) * glare
 *   frame_k   = clip(apply_shift(t_k * radiance, shift_k) + noise, 0, 1)
 * Camera 2 is the reference camera and is not shifted, so the ground-truth tile
 * is the centre crop of its frame.
 */
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hdru/debevec.hpp"
#include "hdru/fusion.hpp"
#include "hdru/image.hpp"
#include "hdru/registration.hpp"

namespace hdru {

inline constexpr int kContextSize = 600;
inline constexpr int kReferenceCamera = 1;  ///< zero-based index of camera 2

struct SimParams {
    std::array<double, 3> nd_transmittances{0.12589254117941673, 0.50118723362727224, 1.0};
    std::array<double, 3> polarizer_angles{80.0, 90.0, 100.0};  ///< degrees
    double glare_probability = 0.5;
    double noise_sigma = 0.005;
    double base_exposure = 2.0;
    double gamma = 1.5;
    int min_shift = 30;
    int max_shift = 150;
    double glare_amplitude_min = 0.5;
    double glare_amplitude_max = 2.0;
    std::uint64_t seed = 0;
};

struct SynthSample {
    std::uint64_t seed = 0;
    GrayImage scene;                      ///< ground-truth tile, 256x256
    Burst burst;                          ///< three 600x600 frames, camera order
    std::array<Shift, 3> shifts{};        ///< translation applied to each camera
    std::vector<WeightMap> glare_masks;   ///< attenuated glare radiance per camera (frame coords)
    ExposureSpec exposures;
    bool glare = false;
    double glare_polarization = 0.0;      ///< degrees
};

/// Procedural 256x256 tile: smooth gradient, 2-5 ellipses, fine texture; spans [0.05, 0.95].
GrayImage generate_scene(std::uint64_t seed);

/// Mirror-pads a tile to size x size around its centre.
GrayImage embed_scene(const GrayImage& scene, int size = kContextSize);

SynthSample render_burst(const GrayImage& scene, const SimParams& params, std::uint64_t seed);

/// Scene and burst from one sample seed.
SynthSample make_sample(const SimParams& params, std::uint64_t sample_seed);

std::uint64_t sample_seed(std::uint64_t corpus_seed, std::size_t index);

enum class Split { train, val };

const char* split_name(Split s);

/// 90/10 split: every tenth sample (index % 10 == 9) is validation.
Split split_for(std::size_t index);

struct ManifestEntry {
    std::size_t index = 0;
    std::string dir;  ///< sample directory name relative to the corpus root
    std::uint64_t seed = 0;
    Split split = Split::train;
    bool glare = false;
    std::array<Shift, 3> shifts{};
};

struct Manifest {
    std::uint64_t seed = 0;
    SimParams params;
    std::vector<ManifestEntry> entries;
};

/// Writes <out>/<index>/cam{1,2,3}.pgm (16-bit), scene.pgm, meta.txt and <out>/manifest.txt.
Manifest generate_corpus(std::size_t n, const SimParams& params, std::uint64_t seed,
                         const std::filesystem::path& out_dir);

Manifest read_manifest(const std::filesystem::path& corpus_dir);

struct LoadedSample {
    ManifestEntry entry;
    Burst frames;
    GrayImage scene;
    ExposureSpec exposures;
};

LoadedSample load_sample(const std::filesystem::path& corpus_dir, const Manifest& manifest, std::size_t i);

}  // namespace hdru
