#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace panmc::stats {

/// Neumaier compensated summation. Accumulation is exact enough that the
/// merge order (not the add order within a fixed chunking) determines the
/// result bit-for-bit.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }

  void merge(const CompensatedSum& o) {
    add(o.sum_);
    add(o.comp_);
  }

  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Streaming first/second moments with deterministic chunk merging.
struct MomentAccumulator {
  std::int64_t n = 0;
  CompensatedSum sum;
  CompensatedSum sum_sq;

  void add(double x) {
    ++n;
    sum.add(x);
    sum_sq.add(x * x);
  }

  void merge(const MomentAccumulator& o) {
    n += o.n;
    sum.merge(o.sum);
    sum_sq.merge(o.sum_sq);
  }

  double mean() const { return n > 0 ? sum.value() / static_cast<double>(n) : 0.0; }

  /// Sample variance (n-1 denominator); clamped at 0 against cancellation.
  double sample_variance() const {
    if (n < 2) return 0.0;
    const double m = mean();
    const double v = (sum_sq.value() - static_cast<double>(n) * m * m) / static_cast<double>(n - 1);
    return v > 0.0 ? v : 0.0;
  }

  double std_error() const {
    return n > 0 ? std::sqrt(sample_variance() / static_cast<double>(n)) : 0.0;
  }
};

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

namespace detail {

inline double lower_gamma_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double term = sum;
  for (int i = 0; i < 1000; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16)
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  throw std::runtime_error("incomplete gamma: series did not converge");
}

inline double upper_gamma_cf(double a, double x) {
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 1000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16)
      return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  throw std::runtime_error("incomplete gamma: continued fraction did not converge");
}

}  // namespace detail

/// Regularized lower incomplete gamma P(a, x).
inline double reg_lower_gamma(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw std::domain_error("reg_lower_gamma: bad arguments");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return detail::lower_gamma_series(a, x);
  return 1.0 - detail::upper_gamma_cf(a, x);
}

inline double chi_square_cdf(double x, int dof) {
  if (dof < 1) throw std::domain_error("chi_square_cdf: dof must be >= 1");
  if (x <= 0.0) return 0.0;
  return reg_lower_gamma(0.5 * dof, 0.5 * x);
}

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

/// Pearson goodness-of-fit of observed counts against cell probabilities.
inline ChiSquareResult chi_square_gof(std::span<const std::int64_t> observed,
                                      std::span<const double> probs) {
  if (observed.size() != probs.size() || observed.size() < 2)
    throw std::invalid_argument("chi_square_gof: need matching bins >= 2");
  std::int64_t total = 0;
  for (auto c : observed) total += c;
  if (total <= 0) throw std::invalid_argument("chi_square_gof: empty sample");
  double stat = 0.0;
  for (size_t i = 0; i < observed.size(); ++i) {
    const double expected = probs[i] * static_cast<double>(total);
    if (!(expected > 0.0)) throw std::invalid_argument("chi_square_gof: zero expected count");
    const double d = static_cast<double>(observed[i]) - expected;
    stat += d * d / expected;
  }
  const int dof = static_cast<int>(observed.size()) - 1;
  return {stat, dof, 1.0 - chi_square_cdf(stat, dof)};
}

/// Kolmogorov limiting survival function Q(lambda) = 2 sum (-1)^{j-1} e^{-2 j^2 lambda^2}.
inline double kolmogorov_q(double lambda) {
  if (lambda <= 0.0) return 1.0;
  const double a = -2.0 * lambda * lambda;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = sign * std::exp(a * j * j);
    sum += term;
    if (std::abs(term) < 1e-14) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// One-sample Kolmogorov-Smirnov test against a continuous CDF.
/// p-value via the Stephens-corrected asymptotic distribution.
inline KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf) {
  const size_t n = sample.size();
  if (n < 8) throw std::invalid_argument("ks_test: sample too small");
  std::sort(sample.begin(), sample.end());
  double d = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::max((i + 1.0) / n - f, f - static_cast<double>(i) / n));
  }
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  return {d, kolmogorov_q(lambda)};
}

}  // namespace panmc::stats
