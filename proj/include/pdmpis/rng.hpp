#pragma once

#include <array>
#include <cstdint>

namespace pdmpis {

/// Philox4x32-10 block function (Salmon et al., Random123).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key) noexcept;

/// Counter-based random stream. Every (seed, stream id) pair addresses an
/// independent, reproducible sequence; the stream id is the trajectory index.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

  std::uint64_t next_u64() noexcept;

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;

  /// Exponential variate with the given rate (> 0).
  double exponential(double rate) noexcept;

  std::uint64_t draws() const noexcept { return draw_; }

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t draw_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int cursor_ = 4;
  std::uint64_t block_index_ = 0;
};

/// SplitMix64 finaliser; used to derive replicate seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) noexcept;

}  // namespace pdmpis
