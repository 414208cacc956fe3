#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace cprlab::ioutil {

// Reads a whole file into memory; throws IoError on failure.
std::string read_file(const std::string& path);

// Writes via a temp file in the same directory plus rename, so readers never
// observe a partially written file. Throws IoError on failure.
void atomic_write_file(const std::string& path, std::string_view data);

// FNV-1a 64-bit digest as 16 lowercase hex chars.
std::string fnv1a_hex(std::string_view data);

// Current UTC time as ISO-8601 (e.g. 2026-08-25T12:34:56Z).
std::string iso8601_now();

}  // namespace cprlab::ioutil
