#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace gfra {

// Output block of the Philox4x32-10 bijection (Salmon et al., SC'11).
// Exposed as a free function so known-answer vectors can be checked directly.
inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                  std::array<std::uint32_t, 2> key) noexcept {
  constexpr std::uint32_t m0 = 0xD2511F53u;
  constexpr std::uint32_t m1 = 0xCD9E8D57u;
  constexpr std::uint32_t w0 = 0x9E3779B9u;
  constexpr std::uint32_t w1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round != 0) {
      key[0] += w0;
      key[1] += w1;
    }
    const std::uint64_t p0 = static_cast<std::uint64_t>(m0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(m1) * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
           static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
           static_cast<std::uint32_t>(p0)};
  }
  return ctr;
}

// Counter-based generator: the key is the master seed and the stream index
// occupies two counter words, so distinct streams are disjoint counter
// subspaces by construction (2^64 blocks, i.e. 2^65 64-bit draws, per stream).
class Philox4x32 {
 public:
  using result_type = std::uint64_t;

  Philox4x32() noexcept : Philox4x32(0, 0) {}
  Philox4x32(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept {
    if (idx_ >= 2) refill();
    return buf_[idx_++];
  }

 private:
  void refill() noexcept {
    const auto out = philox4x32_10({static_cast<std::uint32_t>(block_),
                                    static_cast<std::uint32_t>(block_ >> 32),
                                    static_cast<std::uint32_t>(stream_),
                                    static_cast<std::uint32_t>(stream_ >> 32)},
                                   key_);
    buf_[0] = out[0] | (static_cast<std::uint64_t>(out[1]) << 32);
    buf_[1] = out[2] | (static_cast<std::uint64_t>(out[3]) << 32);
    ++block_;
    idx_ = 0;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_ = 0;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buf_{};
  int idx_ = 2;
};

// SplitMix64 finalizer, used only to derive child seeds for nested runs.
inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Deterministic stream family: stream(i) is a pure function of (master_seed, i).
struct RngPlan {
  std::uint64_t master_seed = 0;

  Philox4x32 stream(std::uint64_t index) const noexcept { return Philox4x32(master_seed, index); }

  // Independent sub-family for nested estimators (e.g. one per sweep point).
  RngPlan child(std::uint64_t tag) const noexcept {
    return RngPlan{splitmix64(master_seed ^ splitmix64(tag))};
  }
};

inline Philox4x32 derive_stream(std::uint64_t master_seed, std::uint64_t index) noexcept {
  return Philox4x32(master_seed, index);
}

// Uniform draw on [0, 1) with 53-bit resolution.
inline double uniform01(Philox4x32& g) noexcept { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

// Unit-mean exponential (Rayleigh block-fading power gain).
inline double exp_unit(Philox4x32& g) noexcept { return -std::log1p(-uniform01(g)); }

}  // namespace gfra
