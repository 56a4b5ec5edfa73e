#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>

namespace lab {

/// Portable seedable generator: xoshiro256** whose state is expanded from a
/// 64-bit seed with splitmix64. Every derived distribution is implemented here
/// so that streams are identical across standard libraries and platforms.
///
/// Stream splitting: `split(k)` returns the generator seeded with
/// splitmix64(seed ^ (k * 0xD1B54A32D192ED03)), i.e. a child stream that
/// depends only on the parent seed and the stream index, never on how many
/// draws the parent has made.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() { return next(); }
    result_type next();

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Unbiased integer in [0, n); n must be positive.
    std::size_t below(std::size_t n);

    template <typename T>
    void shuffle(std::span<T> values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::size_t j = below(i);
            std::swap(values[i - 1], values[j]);
        }
    }

    Rng split(std::uint64_t stream) const;
    std::uint64_t seed() const noexcept { return seed_; }

private:
    std::uint64_t seed_;
    std::uint64_t s_[4];
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace lab
