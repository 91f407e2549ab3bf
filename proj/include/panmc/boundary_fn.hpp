#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "panmc/domain.hpp"

namespace panmc {

/// Bounded boundary data f: dD -> R for the Dirichlet solves.
class BoundaryFn {
 public:
  enum class Kind { constant, indicator, indicator_bin, coordinate, table };

  static BoundaryFn constant(double c) {
    BoundaryFn f;
    f.kind_ = Kind::constant;
    f.value_ = c;
    return f;
  }

  /// 1 on {y_axis > threshold}, else 0.
  static BoundaryFn indicator_above(int axis, double threshold) {
    if (axis < 0) throw std::invalid_argument("BoundaryFn: bad axis");
    BoundaryFn f;
    f.kind_ = Kind::indicator;
    f.axis_ = axis;
    f.value_ = threshold;
    return f;
  }

  /// 1 on one bin of the given binning, else 0.
  static BoundaryFn indicator_bin(BoundaryBinning b, int bin) {
    if (bin < 0 || bin >= b.bin_count) throw std::invalid_argument("BoundaryFn: bad bin");
    BoundaryFn f;
    f.kind_ = Kind::indicator_bin;
    f.binning_ = b;
    f.axis_ = bin;
    return f;
  }

  static BoundaryFn coordinate(int axis) {
    if (axis < 0) throw std::invalid_argument("BoundaryFn: bad axis");
    BoundaryFn f;
    f.kind_ = Kind::coordinate;
    f.axis_ = axis;
    return f;
  }

  /// Per-bin table; sup_bound must be declared (used for sanity bounds only).
  static BoundaryFn table(BoundaryBinning b, std::vector<double> values, double sup_bound) {
    if (static_cast<int>(values.size()) != b.bin_count)
      throw std::invalid_argument("BoundaryFn: table size must match bin_count");
    if (!(sup_bound >= 0.0)) throw std::invalid_argument("BoundaryFn: sup_bound must be >= 0");
    BoundaryFn f;
    f.kind_ = Kind::table;
    f.binning_ = b;
    f.table_ = std::move(values);
    f.sup_ = sup_bound;
    return f;
  }

  Kind kind() const { return kind_; }

  double operator()(const Domain& d, const Vec& y) const {
    switch (kind_) {
      case Kind::constant:
        return value_;
      case Kind::indicator:
        return y[axis_] > value_ ? 1.0 : 0.0;
      case Kind::indicator_bin: {
        const int idx = bin_index(binning_, d, y);
        return idx == axis_ ? 1.0 : 0.0;
      }
      case Kind::coordinate:
        return y[axis_];
      case Kind::table: {
        const int idx = bin_index(binning_, d, y);
        return idx == kOutOfWindow ? 0.0 : table_[idx];
      }
    }
    return 0.0;
  }

  /// Declared or derivable sup |f| over the boundary, when finite.
  std::optional<double> sup_bound(const Domain& d) const {
    switch (kind_) {
      case Kind::constant:
        return std::abs(value_);
      case Kind::indicator:
      case Kind::indicator_bin:
        return 1.0;
      case Kind::coordinate: {
        if (d.kind() == DomainKind::ball)
          return std::abs(d.center()[axis_]) + d.radius();
        if (d.kind() == DomainKind::box)
          return std::max(std::abs(d.lower()[axis_]), std::abs(d.upper()[axis_]));
        return std::nullopt;  // unbounded boundary coordinate
      }
      case Kind::table:
        return sup_;
    }
    return std::nullopt;
  }

 private:
  Kind kind_ = Kind::constant;
  double value_ = 0.0;
  int axis_ = 0;
  double sup_ = 0.0;
  BoundaryBinning binning_;
  std::vector<double> table_;
};

}  // namespace panmc
