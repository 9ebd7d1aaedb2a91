#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace agsr {

using json = nlohmann::json;

std::string read_file(const std::filesystem::path& path);

// Write-temp-then-rename; the destination is never observed half-written.
void atomic_write_file(const std::filesystem::path& path, std::string_view content);

struct JsonlRecord {
    int line = 0; // 1-based
    json value;
};

// Parses one JSON document per non-empty line. Parse errors carry the line
// number via SchemaError.
std::vector<JsonlRecord> read_jsonl(const std::filesystem::path& path);

// FNV-1a 64-bit, used for cache keys and content digests.
std::uint64_t fnv1a64(std::string_view data);
std::string fnv1a64_hex(std::string_view data);

} // namespace agsr
