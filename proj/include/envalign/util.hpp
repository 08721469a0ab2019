#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace envalign {

// FNV-1a 64-bit; used for snapshot and file digests.
std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 1469598103934665603ULL);
std::string to_hex(std::uint64_t value);

// Raw bytes; nullopt when the file cannot be read.
std::optional<std::string> read_file(const std::filesystem::path& path);

// Write-temp-then-rename in the target's directory.
bool write_file_atomic(const std::filesystem::path& path, std::string_view content);

bool is_valid_utf8(std::string_view data);

std::vector<std::string> split(std::string_view text, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::string trim(std::string_view text);

bool is_identifier(std::string_view name);
bool is_dotted_name(std::string_view name);

// Lowercase + separator normalization for distribution names.
std::string normalize_package_name(std::string_view name);

}  // namespace envalign
