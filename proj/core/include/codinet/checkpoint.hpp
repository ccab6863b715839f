#pragma once

#include <string>

#include "codinet/config.hpp"
#include "codinet/net.hpp"

namespace codinet {

/// Single-file container: magic string, format version, config text
/// snapshot, RNG seed and epoch counter, then length-prefixed named
/// parameter arrays in little-endian IEEE-754 at the declared precision.
struct Checkpoint {
    static constexpr char kMagic[12] = {'C', 'O', 'D', 'I', 'N', 'E',
                                        'T', 'C', 'K', 'P', 'T', '\0'};
    static constexpr std::uint32_t kVersion = 1;

    Config config;
    std::uint64_t seed = 0;
    std::uint64_t epoch = 0;
    bool float32 = false;
};

/// Writes `net`'s parameters with the run metadata.
void save_checkpoint(const std::string& path, DynamicNet& net, const Config& config,
                     std::uint64_t epoch);

struct LoadedCheckpoint {
    Checkpoint meta;
    DynamicNet net;
};

/// Rebuilds the net from the stored config snapshot and fills every named
/// parameter; forward outputs reproduce the saved model exactly at the
/// stored precision.
LoadedCheckpoint load_checkpoint(const std::string& path);

} // namespace codinet
