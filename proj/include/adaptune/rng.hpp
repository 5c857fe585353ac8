#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace adaptune {

/// 64-bit FNV-1a over raw bytes. Used for stream labels and file checksums.
std::uint64_t fnv1a64(std::span<const std::byte> bytes,
                      std::uint64_t basis = 0xcbf29ce484222325ULL) noexcept;
std::uint64_t fnv1a64(std::string_view text) noexcept;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed of the named sub-stream of `seed`: splitmix64(seed ^ fnv1a64(label)).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) noexcept;

/// Reproducible random stream.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The standard distributions are implementation-defined, so every
/// transform from raw 64-bit words to uniforms, integers and normals is done
/// here explicitly:
///   uniform()       = (word >> 11) * 2^-53
///   uniform_int(n)  = rejection sampling on word % n
///   gaussian()      = Box-Muller on two uniforms, both outputs used in turn
///   shuffle(v)      = Fisher-Yates from the back, j = uniform_int(i + 1)
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    Rng(std::uint64_t seed, std::string_view label) : engine_(derive_seed(seed, label)) {}

    std::uint64_t next_u64() { return engine_(); }
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::uint64_t uniform_int(std::uint64_t n);
    double gaussian();

    template <class T>
    void shuffle(std::span<T> values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(uniform_int(i));
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace adaptune
