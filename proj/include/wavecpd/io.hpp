#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wavecpd::io {

// Little-endian encoding helpers for the binary artifact formats.
void put_u32(std::string& out, std::uint32_t v);
void put_f64(std::string& out, double v);
std::uint32_t get_u32(const unsigned char* p);
double get_f64(const unsigned char* p);

std::string read_file(const std::filesystem::path& path);

/// Writes `contents` to a sibling temporary file and renames it over `path`,
/// so readers never observe a partially written artifact.
void write_atomic(const std::filesystem::path& path, std::string_view contents);

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

/// FNV-1a over the raw bytes of the values.
std::uint64_t fnv1a(std::span<const double> values, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

/// Minimal RFC-4180 reader (quoted fields, doubled quotes, CRLF or LF).
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

}  // namespace wavecpd::io
