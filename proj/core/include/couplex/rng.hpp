#pragma once

#include <array>
#include <cstdint>
#include <limits>

#include <boost/random/normal_distribution.hpp>

namespace couplex {

/// Philox4x32-10 block function (Salmon et al., SC'11).
/// Maps a 128-bit counter and a 64-bit key to 128 pseudo-random bits.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// Mixes a parent substream id with a child index. Used to give every
/// logical sub-task (start point, time ladder rung, ...) its own substream.
std::uint64_t derive_substream(std::uint64_t parent, std::uint64_t child) noexcept;

/// Counter-based stream of random bits for one (seed, substream, path).
///
/// The counter layout is [block, path, substream_lo, substream_hi], keyed by
/// the seed. Streams for distinct paths never overlap, so ensembles can be
/// generated in any order and on any number of threads with identical output.
class Stream {
public:
    using result_type = std::uint64_t;

    Stream(std::uint64_t seed, std::uint64_t substream, std::uint32_t path = 0) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          path_(path),
          substream_(substream) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        if (cursor_ == 2) {
            refill();
        }
        return buffer_[cursor_++];
    }

    /// Uniform on the open interval (0, 1) with 53 bits of resolution.
    double uniform() noexcept {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() noexcept { return normal_(*this); }

    std::uint64_t seed() const noexcept {
        return static_cast<std::uint64_t>(key_[0]) | (static_cast<std::uint64_t>(key_[1]) << 32);
    }
    std::uint64_t substream() const noexcept { return substream_; }
    std::uint32_t path() const noexcept { return path_; }

private:
    void refill() noexcept;

    std::array<std::uint32_t, 2> key_;
    std::uint32_t path_;
    std::uint64_t substream_;
    std::uint32_t block_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    unsigned cursor_ = 2;
    boost::random::normal_distribution<double> normal_{};
};

} // namespace couplex
