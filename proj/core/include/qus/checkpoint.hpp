#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "qus/network.hpp"

namespace qus::score {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Model plus training metadata. Layout (all little-endian) is documented in
/// docs/file-formats.md.
struct Checkpoint {
    ScoreModel model;
    std::uint32_t epoch = 0;
    std::uint64_t seed = 0;
    std::vector<double> loss_history;
    std::map<std::string, std::string> meta;  // config hash, producer, ...

    bool operator==(const Checkpoint& o) const;
};

std::vector<unsigned char> encode_checkpoint(const Checkpoint& ckpt);
/// Throws FormatError on bad magic, truncation, trailing bytes or a checksum
/// mismatch, UnsupportedVersion for any other format version.
Checkpoint decode_checkpoint(const std::vector<unsigned char>& bytes);

void save(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load(const std::filesystem::path& path);

}  // namespace qus::score
