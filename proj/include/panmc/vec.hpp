#pragma once

#include <array>
#include <cmath>
#include <cstring>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <vector>

namespace panmc {

inline constexpr int kMaxDim = 16;

/// Fixed-capacity point/vector in R^n, n <= kMaxDim. Cheap to copy; no heap.
class Vec {
 public:
  Vec() = default;

  explicit Vec(int n) : n_(n) {
    if (n < 0 || n > kMaxDim) throw std::invalid_argument("Vec: dimension out of range");
    a_.fill(0.0);
  }

  Vec(std::initializer_list<double> xs) : Vec(static_cast<int>(xs.size())) {
    int i = 0;
    for (double x : xs) a_[i++] = x;
  }

  static Vec zeros(int n) { return Vec(n); }

  static Vec from(std::span<const double> xs) {
    Vec v(static_cast<int>(xs.size()));
    for (int i = 0; i < v.n_; ++i) v.a_[i] = xs[i];
    return v;
  }

  int size() const { return n_; }
  double operator[](int i) const { return a_[i]; }
  double& operator[](int i) { return a_[i]; }
  const double* data() const { return a_.data(); }
  double* data() { return a_.data(); }
  const double* begin() const { return a_.data(); }
  const double* end() const { return a_.data() + n_; }

  std::vector<double> to_vector() const { return {begin(), end()}; }

  bool operator==(const Vec& o) const {
    if (n_ != o.n_) return false;
    for (int i = 0; i < n_; ++i)
      if (a_[i] != o.a_[i]) return false;
    return true;
  }

 private:
  std::array<double, kMaxDim> a_{};
  int n_ = 0;
};

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (int i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm_sq(const Vec& a) { return dot(a, a); }
inline double norm(const Vec& a) { return std::sqrt(norm_sq(a)); }

inline Vec operator-(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (int i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline Vec operator+(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (int i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline double dist(const Vec& a, const Vec& b) { return norm(a - b); }

/// a + t*(b - a), the point at fraction t along the segment [a, b].
inline Vec lerp(const Vec& a, const Vec& b, double t) {
  Vec r(a.size());
  for (int i = 0; i < a.size(); ++i) r[i] = a[i] + t * (b[i] - a[i]);
  return r;
}

}  // namespace panmc
