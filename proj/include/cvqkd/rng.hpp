#pragma once

#include <cstdint>
#include <random>

namespace cvqkd {

// Explicit random stream handed to every sampling routine. Streams are
// deterministic for a fixed seed; substreams derived with substream() are
// statistically independent of the parent and of each other.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0x5eed) : seed_(seed), engine_(make_engine(seed, 0)) {}

    std::uint64_t seed() const noexcept { return seed_; }

    Rng substream(std::uint64_t index) const {
        Rng child(seed_);
        child.engine_ = make_engine(seed_, index + 1);
        child.seed_ = mix(seed_ ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
        return child;
    }

    double normal() { return normal_(engine_); }
    double normal(double stddev) { return stddev * normal_(engine_); }
    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
    bool bit() { return (engine_() >> 63) != 0; }
    std::uint64_t below(std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_); }

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    static std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
        const std::uint64_t a = mix(seed);
        const std::uint64_t b = mix(a ^ mix(stream));
        std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                          static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
        return std::mt19937_64(seq);
    }

    std::uint64_t seed_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace cvqkd
