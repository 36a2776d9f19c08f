#include "debias/rng.hpp"

namespace debias {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view text) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t key, std::uint64_t index) noexcept {
    std::uint64_t s = splitmix64(base);
    s = splitmix64(s ^ key);
    return splitmix64(s ^ (index * 0xd1b54a32d192ed03ULL));
}

RandomStream::RandomStream(std::uint64_t seed) : engine_(seed) {}

double RandomStream::uniform() noexcept {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RandomStream::uniform_open_closed() noexcept {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
}

std::size_t RandomStream::index(std::size_t n) {
    std::uniform_int_distribution<std::size_t> dist(0, n - 1);
    return dist(engine_);
}

double RandomStream::normal(double sigma) {
    return sigma * normal_(engine_);
}

RunStreams RunStreams::from_seed(std::uint64_t seed) {
    return RunStreams{RandomStream(splitmix64(seed ^ 0x616c676fULL)),
                      RandomStream(splitmix64(seed ^ 0x66300000ULL))};
}

}  // namespace debias
