#pragma once

#include <complex>
#include <cmath>
#include <cstdint>

namespace fdbeam {

// Counter-based generator (Philox4x32-10). Every random quantity in the
// project is drawn through this engine so that results replay bit-identically
// from (seed, stream) on the same build. Independent streams for Monte Carlo
// workers are derived by putting the stream id in the upper counter words,
// so streams never overlap regardless of how much each consumes.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : key0_(static_cast<std::uint32_t>(seed)),
        key1_(static_cast<std::uint32_t>(seed >> 32)),
        ctr2_(static_cast<std::uint32_t>(stream)),
        ctr3_(static_cast<std::uint32_t>(stream >> 32)) {}

  std::uint32_t next_u32() {
    if (have_ == 0) {
      fill_block();
      have_ = 4;
    }
    return out_[4 - have_--];
  }

  std::uint64_t next_u64() {
    const std::uint64_t lo = next_u32();
    const std::uint64_t hi = next_u32();
    return (hi << 32) | lo;
  }

  // [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // (0, 1]
  double uniform_pos() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via Box-Muller (pairs cached)
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
  }

  // circular complex Gaussian, unit variance (CN(0,1))
  std::complex<double> cnormal() {
    const double re = normal();
    const double im = normal();
    return {re * 0.7071067811865475244, im * 0.7071067811865475244};
  }

  // uniform phase point on the complex unit circle
  std::complex<double> unit_circle() {
    const double a = 6.283185307179586476925286766559 * uniform();
    return {std::cos(a), std::sin(a)};
  }

 private:
  void fill_block() {
    std::uint32_t c0 = ctr0_, c1 = ctr1_, c2 = ctr2_, c3 = ctr3_;
    std::uint32_t k0 = key0_, k1 = key1_;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = 0xD2511F53ull * c0;
      const std::uint64_t p1 = 0xCD9E8D57ull * c2;
      const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      const std::uint32_t n0 = hi1 ^ c1 ^ k0;
      const std::uint32_t n1 = lo1;
      const std::uint32_t n2 = hi0 ^ c3 ^ k1;
      const std::uint32_t n3 = lo0;
      c0 = n0;
      c1 = n1;
      c2 = n2;
      c3 = n3;
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    out_[0] = c0;
    out_[1] = c1;
    out_[2] = c2;
    out_[3] = c3;
    if (++ctr0_ == 0) ++ctr1_;
  }

  std::uint32_t key0_, key1_;
  std::uint32_t ctr0_ = 0, ctr1_ = 0, ctr2_, ctr3_;
  std::uint32_t out_[4] = {0, 0, 0, 0};
  int have_ = 0;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

// Worker streams: one sub-stream per (trial, purpose) pair. Purpose codes keep
// e.g. the half-duplex redraw independent of the full-duplex channel draw.
inline Rng make_stream(std::uint64_t seed, std::uint64_t trial,
                       std::uint64_t purpose = 0) {
  return Rng(seed, (purpose << 48) ^ trial);
}

}  // namespace fdbeam
