#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>

namespace koopcert {

/// Philox4x32-10 counter-based generator.
///
/// The 64-bit key is the master seed and the upper half of the 128-bit counter
/// selects an independent stream, so `RandomStream(seed, i)` for different `i`
/// never overlap and can be consumed from any thread in any order.
class RandomStream {
  public:
    using result_type = std::uint64_t;

    RandomStream(std::uint64_t seed, std::uint64_t stream_id = 0) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()() noexcept;

    /// Child stream derived from (seed, stream id, child index). Deterministic.
    RandomStream child(std::uint64_t index) const noexcept;

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept;
    /// Standard normal draw.
    double normal() noexcept;

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_; }

    /// Raw Philox4x32-10 block function; exposed for known-answer tests.
    static std::array<std::uint32_t, 4> philox_block(std::array<std::uint32_t, 4> counter,
                                                     std::array<std::uint32_t, 2> key) noexcept;

  private:
    void refill() noexcept;

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int used_ = 4;
    std::normal_distribution<double> gauss_{0.0, 1.0};
};

}  // namespace koopcert
