#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace adaptune {

// Raw headerless little-endian blobs, row-major. Single precision for
// datasets, double precision for checkpoints.

std::vector<float> read_f32_blob(const std::filesystem::path& path, std::size_t expected_count);
void write_f32_blob(const std::filesystem::path& path, std::span<const float> values);

std::vector<double> read_f64_blob(const std::filesystem::path& path, std::size_t expected_count);
void write_f64_blob(const std::filesystem::path& path, std::span<const double> values);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// FNV-1a 64 of the file contents, as 16 lowercase hex digits.
std::string file_checksum(const std::filesystem::path& path);
std::string hex64(std::uint64_t value);

}  // namespace adaptune
