#include "traitkit/manifest.hpp"

#include <fstream>
#include <sstream>

#include "traitkit/error.hpp"

namespace traitkit {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string checksum_hex(std::string_view bytes) {
  static const char* digits = "0123456789abcdef";
  std::uint64_t h = fnv1a64(bytes);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

void write_manifest(const std::filesystem::path& dir, const std::vector<std::string>& files) {
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  nlohmann::ordered_json entries;
  for (const auto& name : files) {
    entries[name] = checksum_hex(read_file(dir / name));
  }
  j["files"] = std::move(entries);
  write_file(dir / "manifest.json", j.dump(2) + "\n");
}

void verify_manifest(const std::filesystem::path& dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("manifest.json: " + std::string(e.what()));
  }
  if (!j.contains("files")) throw DataError("manifest.json: missing files map");
  for (const auto& [name, checksum] : j.at("files").items()) {
    const std::string actual = checksum_hex(read_file(dir / name));
    if (actual != checksum.get<std::string>()) {
      throw DataError("manifest checksum mismatch for '" + name + "'");
    }
  }
}

}  // namespace traitkit
