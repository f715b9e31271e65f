#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "dmsynth/nets.hpp"

namespace dmsynth {

// On-disk layout: a JSON text header (spec, shapes, seed, format version)
// terminated by a newline, then raw little-endian 32-bit floats for all
// parameters in layer order, weights before biases within each layer.
inline constexpr int kCheckpointFormatVersion = 1;

void save_checkpoint(const DenseNet& net, std::uint64_t seed,
                     const std::filesystem::path& path);

struct LoadedCheckpoint {
    DenseNet net;
    std::uint64_t seed = 0;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

} // namespace dmsynth
