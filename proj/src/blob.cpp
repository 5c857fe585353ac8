#include "adaptune/blob.hpp"

#include "adaptune/error.hpp"
#include "adaptune/rng.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace adaptune {
namespace {

std::vector<char> read_bytes(const std::filesystem::path& path) {
    if (!std::filesystem::is_regular_file(path)) {
        fail(ErrorCode::MissingFile, "no such file: " + path.string());
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& path, const char* data, std::size_t size) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
    out.write(data, static_cast<std::streamsize>(size));
    if (!out) fail(ErrorCode::IoError, "short write to " + path.string());
}

template <class U>
U byte_swap(U word) {
    if constexpr (sizeof(U) == 4) return __builtin_bswap32(word);
    else return __builtin_bswap64(word);
}

template <class T, class U>
std::vector<T> decode(const std::filesystem::path& path, std::size_t expected_count) {
    static_assert(sizeof(T) == sizeof(U));
    const auto bytes = read_bytes(path);
    if (bytes.size() != expected_count * sizeof(T)) {
        fail(ErrorCode::DimensionMismatch,
             path.filename().string() + ": expected " + std::to_string(expected_count * sizeof(T)) +
                 " bytes, found " + std::to_string(bytes.size()));
    }
    std::vector<T> out(expected_count);
    for (std::size_t i = 0; i < expected_count; ++i) {
        U word;
        std::memcpy(&word, bytes.data() + i * sizeof(T), sizeof(T));
        if constexpr (std::endian::native == std::endian::big) word = byte_swap(word);
        out[i] = std::bit_cast<T>(word);
    }
    return out;
}

template <class T, class U>
void encode(const std::filesystem::path& path, std::span<const T> values) {
    std::vector<char> bytes(values.size() * sizeof(T));
    for (std::size_t i = 0; i < values.size(); ++i) {
        U word = std::bit_cast<U>(values[i]);
        if constexpr (std::endian::native == std::endian::big) word = byte_swap(word);
        std::memcpy(bytes.data() + i * sizeof(T), &word, sizeof(T));
    }
    write_bytes(path, bytes.data(), bytes.size());
}

}  // namespace

std::vector<float> read_f32_blob(const std::filesystem::path& path, std::size_t expected_count) {
    return decode<float, std::uint32_t>(path, expected_count);
}

void write_f32_blob(const std::filesystem::path& path, std::span<const float> values) {
    encode<float, std::uint32_t>(path, values);
}

std::vector<double> read_f64_blob(const std::filesystem::path& path, std::size_t expected_count) {
    return decode<double, std::uint64_t>(path, expected_count);
}

void write_f64_blob(const std::filesystem::path& path, std::span<const double> values) {
    encode<double, std::uint64_t>(path, values);
}

std::string read_text_file(const std::filesystem::path& path) {
    const auto bytes = read_bytes(path);
    return {bytes.begin(), bytes.end()};
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    write_bytes(path, text.data(), text.size());
}

std::string hex64(std::uint64_t value) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = digits[value & 0xf];
        value >>= 4;
    }
    return s;
}

std::string file_checksum(const std::filesystem::path& path) {
    const auto bytes = read_bytes(path);
    return hex64(fnv1a64(std::as_bytes(std::span(bytes))));
}

}  // namespace adaptune
