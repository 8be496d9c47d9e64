#pragma once

#include <array>
#include <cstdint>
#include <cmath>

namespace mgstd {

/// Counter-based random stream: Philox-2x64 with 10 rounds.
///
/// The generator is keyed by (seed, stream). Distinct streams are fully
/// independent substreams of the same seed, so work can be partitioned by
/// stream id (one per time series) and generated in any order while
/// producing identical values. Output is a pure function of
/// (seed, stream, draw index) with no shared state.
class PhiloxStream {
 public:
  PhiloxStream(std::uint64_t seed, std::uint64_t stream)
      : seed_(seed), stream_(stream) {}

  /// Next uniform double in the open interval (0, 1).
  double uniform() { return to_unit(next_word()); }

  /// Next standard normal draw, via the inverse CDF applied to uniform().
  /// Inverse-CDF sampling keeps the stream consumption rate fixed at one
  /// word per draw, which the substream layout relies on.
  double normal() { return inverse_normal_cdf(uniform()); }

  /// Skip ahead so that the next draw is draw number `n` (0-based).
  /// Draws 2c and 2c+1 come from block c.
  void seek(std::uint64_t n) {
    have_spare_ = (n % 2) != 0;
    if (have_spare_) {
      spare_ = block(n / 2)[1];
      counter_ = n / 2 + 1;
    } else {
      counter_ = n / 2;
    }
  }

 private:
  using Block = std::array<std::uint64_t, 2>;

  static constexpr std::uint64_t kMultiplier = 0xD2B74407B1CE6E93ull;
  static constexpr std::uint64_t kWeyl = 0x9E3779B97F4A7C15ull;

  Block block(std::uint64_t ctr) const {
    std::uint64_t x0 = ctr;
    std::uint64_t x1 = stream_;
    std::uint64_t key = seed_;
    for (int round = 0; round < 10; ++round) {
      const unsigned __int128 prod =
          static_cast<unsigned __int128>(kMultiplier) * x0;
      const std::uint64_t hi = static_cast<std::uint64_t>(prod >> 64);
      const std::uint64_t lo = static_cast<std::uint64_t>(prod);
      x0 = hi ^ key ^ x1;
      x1 = lo;
      key += kWeyl;
    }
    return {x0, x1};
  }

  std::uint64_t next_word() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const Block b = block(counter_++);
    spare_ = b[1];
    have_spare_ = true;
    return b[0];
  }

  /// Map a 64-bit word to (0,1): 53 mantissa bits plus a half-ulp offset so
  /// neither endpoint is reachable.
  static double to_unit(std::uint64_t w) {
    return static_cast<double>(w >> 11) * 0x1.0p-53 + 0x1.0p-54;
  }

  /// Inverse of the standard normal CDF (Wichura's PPND16 rational
  /// approximations; accurate to ~1e-16 over (0,1)).
  static double inverse_normal_cdf(double p) {
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
      const double r = 0.180625 - q * q;
      return q *
             (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                   6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
                 1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
               1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
             (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                   3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
                 5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
               4.2313330701600911252e+1) * r + 1.0);
    }
    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double v;
    if (r <= 5.0) {
      r -= 1.6;
      v = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
              3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
            4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
              6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
            2.05319162663775882187e+0) * r + 1.0);
    } else {
      r -= 5.0;
      v = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
              2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
            5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
              1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
            5.99832206555887937690e-1) * r + 1.0);
    }
    return (q < 0.0) ? -v : v;
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::uint64_t spare_ = 0;
  bool have_spare_ = false;
};

}  // namespace mgstd
