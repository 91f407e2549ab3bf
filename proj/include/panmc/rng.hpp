#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "panmc/vec.hpp"

namespace panmc {

namespace detail {

/// Philox4x32-10 keyed block function (Salmon et al. counter-based RNG).
/// One block of (counter, stream, key=seed) -> 128 random bits.
inline std::array<std::uint32_t, 4> philox4x32(std::uint64_t counter, std::uint64_t stream,
                                               std::uint64_t seed) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  std::uint32_t c0 = static_cast<std::uint32_t>(counter);
  std::uint32_t c1 = static_cast<std::uint32_t>(counter >> 32);
  std::uint32_t c2 = static_cast<std::uint32_t>(stream);
  std::uint32_t c3 = static_cast<std::uint32_t>(stream >> 32);
  std::uint32_t k0 = static_cast<std::uint32_t>(seed);
  std::uint32_t k1 = static_cast<std::uint32_t>(seed >> 32);

  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c0;
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c2;
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
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  return {c0, c1, c2, c3};
}

}  // namespace detail

/// Seedable counter-based random stream. Identical (seed, stream_id) replays
/// the identical variate sequence; distinct stream_ids index disjoint Philox
/// counter spaces and are safe to use concurrently (one stream per path).
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_(stream_id) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }

  std::uint64_t next_u64() {
    if (buffered_ == 0) {
      const auto b = detail::philox4x32(counter_++, stream_, seed_);
      buf_[0] = (static_cast<std::uint64_t>(b[1]) << 32) | b[0];
      buf_[1] = (static_cast<std::uint64_t>(b[3]) << 32) | b[2];
      buffered_ = 2;
    }
    return buf_[--buffered_];
  }

  /// Uniform on the open interval (0, 1).
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via the Marsaglia polar method (rejection in the unit
  /// disk; trig-free). Pairs are cached, so draws alternate cheap/full.
  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * next_uniform() - 1.0;
      v = 2.0 * next_uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint64_t, 2> buf_{};
  int buffered_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

/// n independent centered Gaussians of variance t.
inline Vec gaussian_vector(RngStream& rng, int n, double t) {
  if (n < 1 || n > kMaxDim) throw std::invalid_argument("gaussian_vector: bad dimension");
  if (!(t > 0.0)) throw std::domain_error("gaussian_vector: requires t > 0");
  const double s = std::sqrt(t);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = s * rng.next_gaussian();
  return v;
}

/// Uniform point on the sphere of radius r about center: an isotropic
/// Gaussian vector normalized to the sphere.
inline Vec uniform_sphere_point(RngStream& rng, const Vec& center, double r) {
  if (!(r > 0.0)) throw std::domain_error("uniform_sphere_point: requires r > 0");
  const int n = center.size();
  Vec dir(n);
  double nrm = 0.0;
  do {
    for (int i = 0; i < n; ++i) dir[i] = rng.next_gaussian();
    nrm = norm(dir);
  } while (nrm == 0.0);
  Vec y(n);
  for (int i = 0; i < n; ++i) y[i] = center[i] + r * dir[i] / nrm;
  return y;
}

/// Exponential variate with the given rate (mean 1/rate).
inline double exponential_variate(RngStream& rng, double rate) {
  if (!(rate > 0.0)) throw std::domain_error("exponential_variate: requires rate > 0");
  return -std::log(rng.next_uniform()) / rate;
}

}  // namespace panmc
