#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace traitkit {

// FNV-1a 64-bit; integrity self-check for bundle/store manifests, not a
// cryptographic digest.
std::uint64_t fnv1a64(std::string_view bytes);
std::string checksum_hex(std::string_view bytes);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

// manifest.json: {"format_version": 1, "files": {name: checksum-hex, ...}}
void write_manifest(const std::filesystem::path& dir, const std::vector<std::string>& files);
// Throws DataError on a missing file or checksum mismatch.
void verify_manifest(const std::filesystem::path& dir);

}  // namespace traitkit
