/**
 * weights_io.hpp - binary parameter container
 *
 * Little-endian layout: "MUNW", u32 version, u32 entry count, then per entry
 * u16 name length, UTF-8 name, u8 rank, u32 dims[rank], f32 payload.
 */
#pragma once

#include <filesystem>
#include <stdexcept>

#include "hdru/graph.hpp"

namespace hdru::nn {

inline constexpr std::uint32_t kWeightsVersion = 1;

class WeightsFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string serialize_weights(const ParamStore& store);
ParamStore deserialize_weights(const std::string& bytes);

void save_weights(const ParamStore& store, const std::filesystem::path& path);
ParamStore load_weights(const std::filesystem::path& path);

/// load_weights + assign_params into an existing graph's store.
void load_weights_into(ParamStore& dst, const std::filesystem::path& path);

}  // namespace hdru::nn
