#pragma once

#include <array>
#include <cstdint>

namespace cellpop {

// Philox4x32-10 counter-based generator. A (seed, stream) pair selects an
// independent random stream, so parallel replications can each own stream
// id = replication index without coordination. Output is identical on every
// platform, which is what makes reruns byte-reproducible.
class PhiloxRng {
 public:
  PhiloxRng(std::uint64_t seed, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  // Uniform double in the open interval (0,1).
  double uniform() {
    if (have_ >= 2) {
      have_ = 0;
      block_ = next_block();
    }
    const std::uint64_t lo = block_[2 * have_];
    const std::uint64_t hi = block_[2 * have_ + 1];
    ++have_;
    const std::uint64_t bits = (hi << 32) | lo;
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform in [a,b).
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  std::uint64_t stream() const { return stream_; }

 private:
  std::array<std::uint32_t, 4> next_block() {
    std::uint32_t c0 = static_cast<std::uint32_t>(index_);
    std::uint32_t c1 = static_cast<std::uint32_t>(index_ >> 32);
    std::uint32_t c2 = static_cast<std::uint32_t>(stream_);
    std::uint32_t c3 = static_cast<std::uint32_t>(stream_ >> 32);
    std::uint32_t k0 = key_[0], k1 = key_[1];
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = 0xD2511F53ULL * c0;
      const std::uint64_t p1 = 0xCD9E8D57ULL * c2;
      const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      c0 = hi1 ^ c1 ^ k0;
      c1 = lo1;
      c2 = hi0 ^ c3 ^ k1;
      c3 = lo0;
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    ++index_;
    return {c0, c1, c2, c3};
  }

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_ = 0;
  std::uint64_t index_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int have_ = 2;  // force a block on first use
};

}  // namespace cellpop
