#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace vrpagent {

/**
 * Seeded random source with platform-independent mappings.
 *
 * The engine is std::mt19937_64, whose output sequence is fixed by the
 * standard. Integer ranges, unit reals and shuffles are mapped by hand because
 * the std:: distributions are implementation-defined.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform integer in [lo, hi] (inclusive). Returns lo when hi < lo.
    int uniform_int(int lo, int hi);

    /// Uniform index in [0, n). n must be positive.
    std::size_t index(std::size_t n);

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Fisher-Yates shuffle, drawing indices from high to low.
    template <class T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = index(i);
            using std::swap;
            swap(items[i - 1], items[j]);
        }
    }

    template <class Container>
    void shuffle(Container& items) {
        shuffle(std::span(items.data(), items.size()));
    }

private:
    std::mt19937_64 engine_;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Seed for stream `stream`, element `index`, derived from `master`. Adding new
/// indices never changes the seeds of existing ones.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index);

/// Stable 64-bit tag for a stream name (FNV-1a).
std::uint64_t stream_tag(std::string_view name);

} // namespace vrpagent
