#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "panmc/vec.hpp"

namespace panmc {

enum class DomainKind { ball, half_space, box };

/// A regular domain D in R^n (n >= 2) supporting the exact geometric queries
/// the path samplers need: membership, distance to the boundary, projection
/// onto the boundary, and segment/boundary crossing.
///
/// Catalog: open ball, open half-space {x_k > offset}, open axis-aligned box.
class Domain {
 public:
  static Domain ball(Vec center, double radius) {
    if (center.size() < 2) throw std::invalid_argument("Domain::ball: dimension must be >= 2");
    if (!(radius > 0.0)) throw std::invalid_argument("Domain::ball: radius must be > 0");
    Domain d;
    d.kind_ = DomainKind::ball;
    d.dim_ = center.size();
    d.center_ = center;
    d.radius_ = radius;
    return d;
  }

  static Domain half_space(int dim, int axis, double offset) {
    if (dim < 2) throw std::invalid_argument("Domain::half_space: dimension must be >= 2");
    if (axis < 0 || axis >= dim) throw std::invalid_argument("Domain::half_space: bad axis");
    Domain d;
    d.kind_ = DomainKind::half_space;
    d.dim_ = dim;
    d.axis_ = axis;
    d.offset_ = offset;
    return d;
  }

  static Domain box(Vec lower, Vec upper) {
    if (lower.size() != upper.size()) throw std::invalid_argument("Domain::box: dimension mismatch");
    if (lower.size() < 2) throw std::invalid_argument("Domain::box: dimension must be >= 2");
    for (int i = 0; i < lower.size(); ++i)
      if (!(upper[i] > lower[i])) throw std::invalid_argument("Domain::box: requires lower < upper");
    Domain d;
    d.kind_ = DomainKind::box;
    d.dim_ = lower.size();
    d.lower_ = lower;
    d.upper_ = upper;
    return d;
  }

  DomainKind kind() const { return kind_; }
  int dim() const { return dim_; }
  bool is_bounded() const { return kind_ != DomainKind::half_space; }

  const Vec& center() const { return center_; }
  double radius() const { return radius_; }
  int axis() const { return axis_; }
  double offset() const { return offset_; }
  const Vec& lower() const { return lower_; }
  const Vec& upper() const { return upper_; }

  /// Characteristic length used to scale tolerances and walk defaults.
  double scale() const {
    switch (kind_) {
      case DomainKind::ball:
        return radius_;
      case DomainKind::half_space:
        return std::max(1.0, std::abs(offset_));
      case DomainKind::box: {
        double m = 0.0;
        for (int i = 0; i < dim_; ++i) m = std::max(m, upper_[i] - lower_[i]);
        return m;
      }
    }
    return 1.0;
  }

  double boundary_tolerance() const { return 1e-9 * scale(); }

  bool contains(const Vec& x) const {
    check_dim(x);
    switch (kind_) {
      case DomainKind::ball: {
        double s = 0.0;
        for (int i = 0; i < dim_; ++i) {
          const double di = x[i] - center_[i];
          s += di * di;
        }
        return s < radius_ * radius_;
      }
      case DomainKind::half_space:
        return x[axis_] > offset_;
      case DomainKind::box:
        for (int i = 0; i < dim_; ++i)
          if (!(lower_[i] < x[i] && x[i] < upper_[i])) return false;
        return true;
    }
    return false;
  }

  /// Euclidean distance from an interior point to the boundary.
  double dist_to_boundary(const Vec& x) const {
    require_inside(x, "dist_to_boundary");
    return unchecked_interior_dist(x);
  }

  /// Signed distance to the boundary: positive inside, <= 0 outside, no
  /// interior precondition (for the ball/half-space this is exact everywhere;
  /// for the box it is the face-distance minimum).
  double signed_boundary_distance(const Vec& x) const {
    check_dim(x);
    return unchecked_interior_dist(x);
  }

  /// Nearest boundary point of an interior point; equidistant ties are broken
  /// by the lowest axis index, lower face first.
  Vec project_to_boundary(const Vec& x) const {
    require_inside(x, "project_to_boundary");
    switch (kind_) {
      case DomainKind::ball: {
        const Vec d = x - center_;
        const double nrm = norm(d);
        if (nrm == 0.0) {
          Vec y = center_;
          y[0] -= radius_;  // tie-break: axis 0, lower side
          return y;
        }
        Vec y(dim_);
        for (int i = 0; i < dim_; ++i) y[i] = center_[i] + radius_ * d[i] / nrm;
        return y;
      }
      case DomainKind::half_space: {
        Vec y = x;
        y[axis_] = offset_;
        return y;
      }
      case DomainKind::box: {
        int best_axis = 0;
        bool best_lower = true;
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < dim_; ++i) {
          const double dl = x[i] - lower_[i];
          const double du = upper_[i] - x[i];
          if (dl < best) {
            best = dl;
            best_axis = i;
            best_lower = true;
          }
          if (du < best) {
            best = du;
            best_axis = i;
            best_lower = false;
          }
        }
        Vec y = x;
        y[best_axis] = best_lower ? lower_[best_axis] : upper_[best_axis];
        return y;
      }
    }
    return x;
  }

  /// Nearest boundary point without the interior precondition; used to snap
  /// crossing estimates that sit a rounding error off the boundary.
  Vec nearest_boundary_point(const Vec& x) const {
    check_dim(x);
    switch (kind_) {
      case DomainKind::ball: {
        const Vec d = x - center_;
        const double nrm = norm(d);
        if (nrm == 0.0) {
          Vec y = center_;
          y[0] -= radius_;
          return y;
        }
        Vec y(dim_);
        for (int i = 0; i < dim_; ++i) y[i] = center_[i] + radius_ * d[i] / nrm;
        return y;
      }
      case DomainKind::half_space: {
        Vec y = x;
        y[axis_] = offset_;
        return y;
      }
      case DomainKind::box: {
        Vec y(dim_);
        bool outside = false;
        for (int i = 0; i < dim_; ++i) {
          y[i] = std::clamp(x[i], lower_[i], upper_[i]);
          if (y[i] != x[i]) outside = true;
        }
        if (outside) return y;
        return project_to_boundary(x);
      }
    }
    return x;
  }

  bool on_boundary(const Vec& y, double tol) const {
    check_dim(y);
    switch (kind_) {
      case DomainKind::ball:
        return std::abs(dist(y, center_) - radius_) <= tol;
      case DomainKind::half_space:
        return std::abs(y[axis_] - offset_) <= tol;
      case DomainKind::box: {
        double nearest_face = std::numeric_limits<double>::infinity();
        for (int i = 0; i < dim_; ++i) {
          if (y[i] < lower_[i] - tol || y[i] > upper_[i] + tol) return false;
          nearest_face = std::min({nearest_face, std::abs(y[i] - lower_[i]), std::abs(upper_[i] - y[i])});
        }
        return nearest_face <= tol;
      }
    }
    return false;
  }

  /// Fraction t in [0,1] at which the segment a -> b first crosses the
  /// boundary; a must be inside, b outside or on the boundary.
  double segment_exit_fraction(const Vec& a, const Vec& b) const {
    check_dim(a);
    check_dim(b);
    switch (kind_) {
      case DomainKind::ball: {
        // solve |a + t(b-a) - c|^2 = R^2 for the positive root
        const Vec u = a - center_;
        const Vec v = b - a;
        const double vv = dot(v, v);
        if (vv == 0.0) return 1.0;
        const double uv = dot(u, v);
        const double uu = dot(u, u) - radius_ * radius_;
        const double disc = uv * uv - vv * uu;
        if (disc <= 0.0) return 1.0;
        const double t = (-uv + std::sqrt(disc)) / vv;
        return std::clamp(t, 0.0, 1.0);
      }
      case DomainKind::half_space: {
        const double da = a[axis_] - offset_;
        const double db = b[axis_] - offset_;
        if (da == db) return 1.0;
        return std::clamp(da / (da - db), 0.0, 1.0);
      }
      case DomainKind::box: {
        double t_exit = 1.0;
        for (int i = 0; i < dim_; ++i) {
          const double delta = b[i] - a[i];
          if (delta > 0.0 && b[i] >= upper_[i])
            t_exit = std::min(t_exit, (upper_[i] - a[i]) / delta);
          else if (delta < 0.0 && b[i] <= lower_[i])
            t_exit = std::min(t_exit, (lower_[i] - a[i]) / delta);
        }
        return std::clamp(t_exit, 0.0, 1.0);
      }
    }
    return 1.0;
  }

 private:
  void check_dim(const Vec& x) const {
    if (x.size() != dim_) throw std::invalid_argument("Domain: dimension mismatch");
  }

  void require_inside(const Vec& x, const char* op) const {
    if (!contains(x)) throw std::domain_error(std::string(op) + ": point not inside the domain");
  }

  double unchecked_interior_dist(const Vec& x) const {
    switch (kind_) {
      case DomainKind::ball: {
        double s = 0.0;
        for (int i = 0; i < dim_; ++i) {
          const double di = x[i] - center_[i];
          s += di * di;
        }
        return radius_ - std::sqrt(s);
      }
      case DomainKind::half_space:
        return x[axis_] - offset_;
      case DomainKind::box: {
        double m = std::numeric_limits<double>::infinity();
        for (int i = 0; i < dim_; ++i) m = std::min({m, x[i] - lower_[i], upper_[i] - x[i]});
        return m;
      }
    }
    return 0.0;
  }

  DomainKind kind_ = DomainKind::ball;
  int dim_ = 0;
  Vec center_;
  double radius_ = 0.0;
  int axis_ = 0;
  double offset_ = 0.0;
  Vec lower_;
  Vec upper_;
};

/// Marker returned by bin_index for boundary points outside a grid window.
inline constexpr int kOutOfWindow = -1;

/// Partition of (a window of) the boundary into bin_count cells, each boundary
/// point mapping to exactly one index.
///
///  - angular: equal arcs of a 2-d circle, arc 0 starting at angle 0.
///  - cap:     equal-width slabs in one coordinate of the unit sphere (n >= 3);
///             for n = 3 equal widths carry equal surface measure.
///  - grid:    equal subdivisions of one coordinate axis within [lo, hi];
///             points outside the window report kOutOfWindow.
struct BoundaryBinning {
  enum class Scheme { angular, cap, grid };

  Scheme scheme = Scheme::angular;
  int bin_count = 1;
  int axis = -1;         // cap/grid: binned coordinate (-1 = pick default)
  double window_lo = 0;  // grid only
  double window_hi = 0;
  bool has_window = false;

  static BoundaryBinning angular(int bins) {
    check_bins(bins);
    BoundaryBinning b;
    b.scheme = Scheme::angular;
    b.bin_count = bins;
    return b;
  }

  static BoundaryBinning cap(int bins, int axis = -1) {
    check_bins(bins);
    BoundaryBinning b;
    b.scheme = Scheme::cap;
    b.bin_count = bins;
    b.axis = axis;
    return b;
  }

  static BoundaryBinning grid(int bins, double lo, double hi, int axis = -1) {
    check_bins(bins);
    if (!(hi > lo)) throw std::invalid_argument("BoundaryBinning::grid: requires lo < hi");
    BoundaryBinning b;
    b.scheme = Scheme::grid;
    b.bin_count = bins;
    b.axis = axis;
    b.window_lo = lo;
    b.window_hi = hi;
    b.has_window = true;
    return b;
  }

 private:
  static void check_bins(int bins) {
    if (bins < 1) throw std::invalid_argument("BoundaryBinning: bin_count must be >= 1");
  }
};

namespace detail {

inline int grid_default_axis(const Domain& d) {
  if (d.kind() == DomainKind::half_space) return d.axis() == 0 ? 1 : 0;
  return 0;
}

}  // namespace detail

/// Bin index of a boundary point, or kOutOfWindow for grid points outside the
/// window. Throws if y is not on the boundary within tolerance.
inline int bin_index(const BoundaryBinning& b, const Domain& d, const Vec& y) {
  if (!d.on_boundary(y, d.boundary_tolerance()))
    throw std::domain_error("bin_index: point not on the boundary within tolerance");

  switch (b.scheme) {
    case BoundaryBinning::Scheme::angular: {
      if (d.kind() != DomainKind::ball || d.dim() != 2)
        throw std::invalid_argument("bin_index: angular binning requires a 2-d ball");
      double theta = std::atan2(y[1] - d.center()[1], y[0] - d.center()[0]);
      if (theta < 0.0) theta += 2.0 * M_PI;
      int idx = static_cast<int>(theta / (2.0 * M_PI) * b.bin_count);
      return std::min(idx, b.bin_count - 1);
    }
    case BoundaryBinning::Scheme::cap: {
      if (d.kind() != DomainKind::ball || d.dim() < 3)
        throw std::invalid_argument("bin_index: cap binning requires a ball with n >= 3");
      const int ax = b.axis >= 0 ? b.axis : d.dim() - 1;
      if (ax >= d.dim()) throw std::invalid_argument("bin_index: cap axis out of range");
      const double u = (y[ax] - d.center()[ax]) / d.radius();  // in [-1, 1]
      int idx = static_cast<int>((u + 1.0) / 2.0 * b.bin_count);
      return std::clamp(idx, 0, b.bin_count - 1);
    }
    case BoundaryBinning::Scheme::grid: {
      if (d.kind() == DomainKind::ball)
        throw std::invalid_argument("bin_index: grid binning requires half-space or box");
      const int ax = b.axis >= 0 ? b.axis : detail::grid_default_axis(d);
      if (ax >= d.dim()) throw std::invalid_argument("bin_index: grid axis out of range");
      if (d.kind() == DomainKind::half_space && ax == d.axis())
        throw std::invalid_argument("bin_index: grid axis may not be the half-space normal");
      const double v = y[ax];
      if (v < b.window_lo || v >= b.window_hi) return kOutOfWindow;
      const double w = (b.window_hi - b.window_lo) / b.bin_count;
      int idx = static_cast<int>((v - b.window_lo) / w);
      return std::min(idx, b.bin_count - 1);
    }
  }
  return kOutOfWindow;
}

}  // namespace panmc
