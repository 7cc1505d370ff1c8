#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace mbmm {

inline constexpr std::uint64_t kDefaultSeed = 20101231ULL;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Key of stream `index` under `seed`. Distinct (seed, index) pairs give
/// unrelated keys; nothing depends on which worker asks for the stream.
constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t index) noexcept {
    return mix64(mix64(seed) ^ mix64(index + 0x632BE59BD9B4E019ULL));
}

/// Standard-normal draws from one derived stream.
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint64_t index) : engine_(stream_key(seed, index)) {}

    double operator()() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }
    void fill(std::span<double> out) {
        for (double& z : out) z = normal_(engine_);
    }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace mbmm
