#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace debias {

/// SplitMix64 finalizer. Used to decorrelate seeds, never as a generator.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// 64-bit FNV-1a; stable across platforms, used to fold config ids into seeds.
std::uint64_t fnv1a64(std::string_view text) noexcept;

/// Pure seed derivation: (base, key, index) -> seed. No global state.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t key, std::uint64_t index) noexcept;

/// A single random stream. Not thread-safe; each run owns its streams.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed);

    /// U[0,1) with 53 random bits.
    double uniform() noexcept;
    /// U(0,1]; used where `u <= rate` must hold for rate = 1 and fail for rate = 0.
    double uniform_open_closed() noexcept;
    /// U{0, ..., n-1}. Requires n > 0.
    std::size_t index(std::size_t n);
    /// N(0, sigma).
    double normal(double sigma);

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// The two streams of one DE run: operator randomness and f0 draws.
struct RunStreams {
    RandomStream algorithm;
    RandomStream objective;

    static RunStreams from_seed(std::uint64_t seed);
};

}  // namespace debias
