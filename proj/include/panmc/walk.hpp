#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>

#include "panmc/domain.hpp"
#include "panmc/rng.hpp"
#include "panmc/specfun.hpp"

namespace panmc {

/// Knobs for one family of paths. step_h and eps_shell are absolute (callers
/// scale them by the domain; see defaults_for).
struct WalkConfig {
  double mu = 0.0;              // killing parameter of the target equation
  double step_h = 1e-4;         // time step of the discrete walk
  double eps_shell = 1e-4;      // walk-on-spheres termination distance
  std::int64_t max_steps = 1'000'000;
  bool bridge_correction = false;

  /// step_h = 1e-4 * scale^2, eps_shell = 1e-4 * scale. The discrete walk has
  /// a known O(sqrt(step_h)) exit-time bias; bridge_correction adds a per-step
  /// boundary-crossing test that reduces it to O(step_h).
  static WalkConfig defaults_for(const Domain& d, double mu) {
    const double s = d.scale();
    WalkConfig cfg;
    cfg.mu = mu;
    cfg.step_h = 1e-4 * s * s;
    cfg.eps_shell = 1e-4 * s;
    return cfg;
  }

  void validate() const {
    if (!(mu >= 0.0)) throw std::domain_error("WalkConfig: mu must be >= 0");
    if (!(step_h > 0.0)) throw std::domain_error("WalkConfig: step_h must be > 0");
    if (!(eps_shell > 0.0)) throw std::domain_error("WalkConfig: eps_shell must be > 0");
    if (max_steps < 1) throw std::domain_error("WalkConfig: max_steps must be >= 1");
  }
};

enum class PathStatus { exited, killed, truncated };

/// Outcome of one path.
///
///  - exited:    exit_point lies on the boundary (within tolerance) and
///               weight carries the estimator factor accumulated up to exit.
///  - killed:    the path terminated before reaching the boundary (strip
///               escape of the lifted walk); weight is 0 and exit_point is
///               the interior position at termination.
///  - truncated: max_steps elapsed; contributes 0 to every estimator.
///
/// exit_time is absent for walk-on-spheres paths (time-free by construction).
struct ExitSample {
  Vec exit_point;
  std::optional<double> exit_time;
  double weight = 0.0;
  PathStatus status = PathStatus::truncated;
};

namespace detail {

/// Probability that a 1-d Brownian bridge over time h between interior
/// distances d1, d2 > 0 crossed the boundary in between: exp(-2 d1 d2 / h).
inline double bridge_cross_prob(double d1, double d2, double h) {
  return std::exp(-2.0 * d1 * d2 / h);
}

/// Exponent threshold below the smallest uniform (0.5 * 2^-53): crossing
/// probabilities with 2 d1 d2 / h above this can never fire a draw.
inline constexpr double kBridgeSkipExponent = 38.0;

inline bool bridge_negligible(double d1, double d2, double h) {
  return 2.0 * d1 * d2 > kBridgeSkipExponent * h;
}

struct BridgeHit {
  bool fired = false;
  double alpha = 1.0;   // crossing fraction along the step
  int box_axis = -1;    // box only
  bool box_lower = false;
};

/// One bridge crossing test for the step x -> y (both inside). Uses the exact
/// per-face test for half-space/box and the chord (tangent-plane) distances
/// for the ball. Consumes exactly one uniform.
inline BridgeHit bridge_test(RngStream& rng, const Domain& d, const Vec& x, const Vec& y,
                             double h) {
  BridgeHit hit;
  switch (d.kind()) {
    case DomainKind::ball: {
      const double d1 = d.radius() - dist(x, d.center());
      const double d2 = d.radius() - dist(y, d.center());
      if (bridge_negligible(d1, d2, h)) return hit;
      if (rng.next_uniform() < bridge_cross_prob(d1, d2, h)) {
        hit.fired = true;
        hit.alpha = d1 / (d1 + d2);
      }
      return hit;
    }
    case DomainKind::half_space: {
      const double d1 = x[d.axis()] - d.offset();
      const double d2 = y[d.axis()] - d.offset();
      if (bridge_negligible(d1, d2, h)) return hit;
      if (rng.next_uniform() < bridge_cross_prob(d1, d2, h)) {
        hit.fired = true;
        hit.alpha = d1 / (d1 + d2);
      }
      return hit;
    }
    case DomainKind::box: {
      // Combine the per-face crossing probabilities into one survival draw,
      // then attribute the crossing to the most probable face.
      double survive = 1.0;
      double best_p = 0.0;
      bool any = false;
      for (int i = 0; i < d.dim(); ++i) {
        const double dl1 = x[i] - d.lower()[i];
        const double dl2 = y[i] - d.lower()[i];
        if (!bridge_negligible(dl1, dl2, h)) {
          any = true;
          const double pl = bridge_cross_prob(dl1, dl2, h);
          survive *= 1.0 - pl;
          if (pl > best_p) {
            best_p = pl;
            hit.box_axis = i;
            hit.box_lower = true;
          }
        }
        const double du1 = d.upper()[i] - x[i];
        const double du2 = d.upper()[i] - y[i];
        if (!bridge_negligible(du1, du2, h)) {
          any = true;
          const double pu = bridge_cross_prob(du1, du2, h);
          survive *= 1.0 - pu;
          if (pu > best_p) {
            best_p = pu;
            hit.box_axis = i;
            hit.box_lower = false;
          }
        }
      }
      if (!any) return hit;
      if (rng.next_uniform() < 1.0 - survive && hit.box_axis >= 0) {
        hit.fired = true;
        const int i = hit.box_axis;
        const double d1 = hit.box_lower ? x[i] - d.lower()[i] : d.upper()[i] - x[i];
        const double d2 = hit.box_lower ? y[i] - d.lower()[i] : d.upper()[i] - y[i];
        hit.alpha = d1 / (d1 + d2);
      }
      return hit;
    }
  }
  return hit;
}

inline Vec bridge_hit_point(const Domain& d, const Vec& x, const Vec& y, const BridgeHit& hit) {
  Vec p = lerp(x, y, hit.alpha);
  if (d.kind() == DomainKind::box && hit.box_axis >= 0)
    p[hit.box_axis] = hit.box_lower ? d.lower()[hit.box_axis] : d.upper()[hit.box_axis];
  return d.nearest_boundary_point(p);
}

/// Ball-specialized discrete walk. Tracks the squared center distance so the
/// containment test is multiplication-only and the bridge test takes square
/// roots only inside the thin layer where it can actually fire. Draw-for-draw
/// identical to the generic loop.
inline ExitSample step_path_ball(RngStream& rng, const Domain& d, const Vec& x0,
                                 const WalkConfig& cfg) {
  const int n = d.dim();
  const double h = cfg.step_h;
  const double sqrt_h = std::sqrt(h);
  const double half_mu2 = 0.5 * cfg.mu * cfg.mu;
  const Vec& c = d.center();
  const double R = d.radius();
  const double R2 = R * R;

  Vec x = x0;
  double s_x = norm_sq(x - c);
  double t = 0.0;
  Vec y(n);
  for (std::int64_t step = 0; step < cfg.max_steps; ++step) {
    double s_y = 0.0;
    for (int i = 0; i < n; ++i) {
      y[i] = x[i] + sqrt_h * rng.next_gaussian();
      const double di = y[i] - c[i];
      s_y += di * di;
    }

    if (s_y >= R2) {
      const double alpha = d.segment_exit_fraction(x, y);
      const double exit_time = t + alpha * h;
      return {d.nearest_boundary_point(lerp(x, y, alpha)), exit_time,
              std::exp(-half_mu2 * exit_time), PathStatus::exited};
    }

    if (cfg.bridge_correction) {
      // (R - |z|) >= (R^2 - s) / (2R), so this lower bound on d1*d2 whitelists
      // far-from-boundary steps without square roots.
      const double bound = (R2 - s_x) * (R2 - s_y) / (4.0 * R2);
      if (2.0 * bound <= kBridgeSkipExponent * h) {
        const double d1 = R - std::sqrt(s_x);
        const double d2 = R - std::sqrt(s_y);
        if (!bridge_negligible(d1, d2, h) &&
            rng.next_uniform() < bridge_cross_prob(d1, d2, h)) {
          const double alpha = d1 / (d1 + d2);
          const double exit_time = t + alpha * h;
          return {d.nearest_boundary_point(lerp(x, y, alpha)), exit_time,
                  std::exp(-half_mu2 * exit_time), PathStatus::exited};
        }
      }
    }

    x = y;
    s_x = s_y;
    t += h;
  }
  return {x, t, 0.0, PathStatus::truncated};
}

}  // namespace detail

/// Discrete-time Brownian path with exit detection. Gaussian increments of
/// variance step_h; the first step landing outside D exits at the segment
/// crossing estimate. With bridge_correction, a per-step crossing test also
/// fires on excursions that return within the step. The exit weight is the
/// discount exp(-(mu^2/2) * exit_time).
inline ExitSample step_path_to_exit(RngStream& rng, const Domain& d, const Vec& x0,
                                    const WalkConfig& cfg) {
  cfg.validate();
  if (!d.contains(x0)) throw std::domain_error("step_path_to_exit: x0 not inside the domain");
  if (d.kind() == DomainKind::ball) return detail::step_path_ball(rng, d, x0, cfg);

  const int n = d.dim();
  const double h = cfg.step_h;
  const double sqrt_h = std::sqrt(h);
  const double half_mu2 = 0.5 * cfg.mu * cfg.mu;

  Vec x = x0;
  double t = 0.0;
  Vec y(n);
  for (std::int64_t step = 0; step < cfg.max_steps; ++step) {
    for (int i = 0; i < n; ++i) y[i] = x[i] + sqrt_h * rng.next_gaussian();

    if (!d.contains(y)) {
      const double alpha = d.segment_exit_fraction(x, y);
      const double exit_time = t + alpha * h;
      return {d.nearest_boundary_point(lerp(x, y, alpha)), exit_time,
              std::exp(-half_mu2 * exit_time), PathStatus::exited};
    }

    if (cfg.bridge_correction) {
      const auto hit = detail::bridge_test(rng, d, x, y, h);
      if (hit.fired) {
        const double exit_time = t + hit.alpha * h;
        return {detail::bridge_hit_point(d, x, y, hit), exit_time,
                std::exp(-half_mu2 * exit_time), PathStatus::exited};
      }
    }

    x = y;
    t += h;
  }
  return {x, t, 0.0, PathStatus::truncated};
}

/// Walk on spheres: jump to a uniform point of the largest centered in-ball,
/// multiplying the survival weight by psi_n(mu * r) per jump; terminate inside
/// the eps_shell boundary layer. The returned sample is time-free.
inline ExitSample wos_path_to_exit(RngStream& rng, const Domain& d, const Vec& x0,
                                   const WalkConfig& cfg) {
  cfg.validate();
  if (!d.contains(x0)) throw std::domain_error("wos_path_to_exit: x0 not inside the domain");

  const int n = d.dim();
  Vec x = x0;
  double weight = 1.0;
  for (std::int64_t step = 0; step < cfg.max_steps; ++step) {
    const double r = d.signed_boundary_distance(x);
    if (r < cfg.eps_shell)
      return {d.nearest_boundary_point(x), std::nullopt, weight, PathStatus::exited};
    if (cfg.mu > 0.0) weight *= specfun::psi(n, cfg.mu * r);
    x = uniform_sphere_point(rng, x, r);
  }
  return {x, std::nullopt, 0.0, PathStatus::truncated};
}

/// Lifted walk for the Duffin correspondence: an (n+1)-dimensional Brownian
/// motion (W, V) from (x0, 0), where V must stay inside the strip
/// (-pi/(2 mu), pi/(2 mu)). If W exits D first, the sample weight is
/// cos(mu * V) at the exit, clamped at 0 against discrete overshoot. If V
/// reaches the strip wall first the path is killed (weight 0: the cosine
/// vanishes on the wall).
inline ExitSample duffin_path_to_exit(RngStream& rng, const Domain& d, const Vec& x0,
                                      const WalkConfig& cfg) {
  cfg.validate();
  if (!(cfg.mu > 0.0)) throw std::domain_error("duffin_path_to_exit: requires mu > 0");
  if (!d.contains(x0)) throw std::domain_error("duffin_path_to_exit: x0 not inside the domain");

  const int n = d.dim();
  const double h = cfg.step_h;
  const double sqrt_h = std::sqrt(h);
  const double wall = 0.5 * M_PI / cfg.mu;

  Vec x = x0;
  double v = 0.0;  // the extra coordinate
  double t = 0.0;
  Vec y(n);
  for (std::int64_t step = 0; step < cfg.max_steps; ++step) {
    for (int i = 0; i < n; ++i) y[i] = x[i] + sqrt_h * rng.next_gaussian();
    const double v2 = v + sqrt_h * rng.next_gaussian();

    const bool dom_out = !d.contains(y);
    const bool strip_out = std::abs(v2) >= wall;
    if (dom_out || strip_out) {
      const double a_dom = dom_out ? d.segment_exit_fraction(x, y) : 2.0;
      double a_strip = 2.0;
      if (strip_out) {
        const double target = v2 > 0.0 ? wall : -wall;
        a_strip = (target - v) / (v2 - v);
      }
      if (a_strip <= a_dom) {
        return {lerp(x, y, a_strip), t + a_strip * h, 0.0, PathStatus::killed};
      }
      const double v_exit = v + a_dom * (v2 - v);
      return {d.nearest_boundary_point(lerp(x, y, a_dom)), t + a_dom * h,
              std::max(0.0, std::cos(cfg.mu * v_exit)), PathStatus::exited};
    }

    if (cfg.bridge_correction) {
      // Strip walls are 1-d faces of the lifted domain; test them alongside
      // the domain faces. Use separate draws so the consumption pattern stays
      // simple: a strip draw (when non-negligible), then a domain draw.
      const double du1 = wall - v, du2 = wall - v2;
      const double dn1 = v + wall, dn2 = v2 + wall;
      if (!detail::bridge_negligible(du1, du2, h) || !detail::bridge_negligible(dn1, dn2, h)) {
        const double p_up = detail::bridge_cross_prob(du1, du2, h);
        const double p_dn = detail::bridge_cross_prob(dn1, dn2, h);
        if (rng.next_uniform() < 1.0 - (1.0 - p_up) * (1.0 - p_dn)) {
          const double d1 = p_up >= p_dn ? du1 : dn1;
          const double d2 = p_up >= p_dn ? du2 : dn2;
          const double alpha = d1 / (d1 + d2);
          return {lerp(x, y, alpha), t + alpha * h, 0.0, PathStatus::killed};
        }
      }
      const auto hit = detail::bridge_test(rng, d, x, y, h);
      if (hit.fired) {
        const double v_exit = v + hit.alpha * (v2 - v);
        return {detail::bridge_hit_point(d, x, y, hit), t + hit.alpha * h,
                std::max(0.0, std::cos(cfg.mu * v_exit)), PathStatus::exited};
      }
    }

    x = y;
    v = v2;
    t += h;
  }
  return {x, t, 0.0, PathStatus::truncated};
}

}  // namespace panmc
