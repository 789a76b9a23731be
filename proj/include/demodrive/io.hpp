#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace demodrive {

// Writes `content` to a sibling temp file and renames it over `path`, so an
// interrupted run never leaves a truncated artifact behind.
void write_file_atomic(const std::string& path, std::string_view content);

// Reads a whole file; throws IoError when it cannot be opened.
std::string read_file(const std::string& path);

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

std::string to_hex(std::uint64_t value);

}  // namespace demodrive
