#pragma once

#include <cmath>
#include <span>
#include <stdexcept>

#include "panmc/vec.hpp"

namespace panmc::specfun {

/// Order of a modified Bessel function; for dimension n the relevant order
/// is nu = (n-2)/2, so half-integers appear for odd n.
struct BesselOrder {
  double nu = 0.0;

  static BesselOrder from_dimension(int n) {
    if (n < 2) throw std::domain_error("BesselOrder: dimension must be >= 2");
    return {0.5 * static_cast<double>(n - 2)};
  }
};

/// Largest argument accepted by bessel_i / psi before the ascending series
/// overflows double range (I_nu(x) ~ e^x / sqrt(2 pi x); e^700 ~ 1e304).
inline constexpr double kBesselArgMax = 700.0;

/// Ascending-series truncation: stop once the next term drops below
/// kSeriesRelTol times the running sum. All terms are positive, so the
/// discarded tail is bounded by a geometric comparison once terms decrease.
inline constexpr double kSeriesRelTol = 1e-16;
inline constexpr int kSeriesMaxTerms = 10'000;

/// ln Gamma(x) for x > 0.
inline double log_gamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("log_gamma: requires x > 0");
  return std::lgamma(x);
}

namespace detail {

/// Sum of the order-normalized series S = I_nu(x) / [ (x/2)^nu / Gamma(nu+1) ],
/// i.e. S = sum_m s_m with s_0 = 1, s_{m+1} = s_m * (x/2)^2 / ((m+1)(m+nu+1)).
/// Returns ln S; accumulation rescales so large x stays representable.
inline double log_series_sum(double nu, double x) {
  const double q = 0.25 * x * x;  // (x/2)^2
  double sum = 1.0;
  double term = 1.0;
  double log_scale = 0.0;
  for (int m = 0; m < kSeriesMaxTerms; ++m) {
    term *= q / ((m + 1.0) * (m + nu + 1.0));
    if (term < kSeriesRelTol * sum) {
      sum += term;
      return std::log(sum) + log_scale;
    }
    sum += term;
    if (sum > 1e280) {
      sum *= 1e-280;
      term *= 1e-280;
      log_scale += 280.0 * std::log(10.0);
    }
  }
  throw std::overflow_error("bessel series: no convergence within term cap");
}

}  // namespace detail

/// Modified Bessel function of the first kind I_nu(x), nu >= 0, x >= 0,
/// by the ascending power series. Throws overflow_error for x > kBesselArgMax.
inline double bessel_i(BesselOrder order, double x) {
  const double nu = order.nu;
  if (!(nu >= 0.0)) throw std::domain_error("bessel_i: requires nu >= 0");
  if (!(x >= 0.0)) throw std::domain_error("bessel_i: requires x >= 0");
  if (x > kBesselArgMax) throw std::overflow_error("bessel_i: argument beyond safe bound 700");
  if (x == 0.0) return nu == 0.0 ? 1.0 : 0.0;
  // I_nu = (x/2)^nu / Gamma(nu+1) * S
  const double log_prefix = nu * std::log(0.5 * x) - log_gamma(nu + 1.0);
  return std::exp(log_prefix + detail::log_series_sum(nu, x));
}

/// Killing constant psi_n(x) = x^nu / (2^nu Gamma(nu+1) I_nu(x)), nu = (n-2)/2,
/// extended continuously by psi_n(0) = 1. The prefactor cancels the leading
/// series term of I_nu, so psi_n(x) = exp(-ln S) with S the normalized series
/// sum; this is the log-space form and keeps the ratio finite long after
/// I_nu itself would overflow. Result is in (0, 1].
inline double psi(int n, double mu_r) {
  if (n < 2) throw std::domain_error("psi: requires n >= 2");
  if (!(mu_r >= 0.0)) throw std::domain_error("psi: requires mu_r >= 0");
  if (mu_r == 0.0) return 1.0;
  const double nu = BesselOrder::from_dimension(n).nu;
  return std::exp(-detail::log_series_sum(nu, mu_r));
}

/// Free-space Brownian transition density p(t, x) = (2 pi t)^{-n/2} exp(-|x|^2 / 2t).
inline double gaussian_kernel(int n, double t, std::span<const double> x) {
  if (n < 1) throw std::domain_error("gaussian_kernel: requires n >= 1");
  if (!(t > 0.0)) throw std::domain_error("gaussian_kernel: requires t > 0");
  if (static_cast<int>(x.size()) != n) throw std::invalid_argument("gaussian_kernel: dimension mismatch");
  double r2 = 0.0;
  for (double xi : x) r2 += xi * xi;
  const double two_pi_t = 2.0 * M_PI * t;
  return std::exp(-r2 / (2.0 * t)) / std::pow(two_pi_t, 0.5 * n);
}

inline double gaussian_kernel(int n, double t, const Vec& x) {
  return gaussian_kernel(n, t, std::span<const double>(x.data(), static_cast<size_t>(x.size())));
}

}  // namespace panmc::specfun
