#pragma once

// Reference integrator: Dormand-Prince 5(4) with the standard fourth-order
// continuous extension, on complex states.

#include <algorithm>
#include <array>
#include <cmath>
#include <type_traits>
#include <vector>

#include "quadsolve/canonical.hpp"
#include "quadsolve/extensions.hpp"
#include "quadsolve/numerics.hpp"
#include "quadsolve/transform.hpp"

namespace quadsolve {

enum class Termination { reached_t_end, step_collapse, state_overflow };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::reached_t_end: return "reached_t_end";
    case Termination::step_collapse: return "step_collapse";
    case Termination::state_overflow: return "state_overflow";
  }
  return "unknown";
}

struct IntegratorOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double overflow = 1e12;     ///< state modulus that ends the run
  double collapse = 1e-14;    ///< minimum step as a fraction of t_end
  std::size_t max_steps = 2'000'000;
};

struct IntegrationResult {
  std::vector<double> times;
  std::vector<Point> states;
  Termination terminated = Termination::reached_t_end;
  double last_time = 0.0;

  /// Dense output on [times.front(), last_time].
  Point at(double t) const {
    if (t <= times.front()) return states.front();
    if (t >= times.back()) return states.back();
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const auto i = static_cast<std::size_t>(it - times.begin()) - 1;
    const double h = times[i + 1] - times[i];
    const double theta = (t - times[i]) / h;
    const double theta1 = 1.0 - theta;
    const auto& r = dense[i];
    Point out{};
    for (std::size_t k = 0; k < 2; ++k) {
      out[k] = r[0][k] + theta * (r[1][k] + theta1 * (r[2][k] + theta * (r[3][k] + theta1 * r[4][k])));
    }
    return out;
  }

  /// Per-step continuous-extension coefficients, one entry per accepted step.
  std::vector<std::array<Point, 5>> dense;
};

namespace dopri {

inline constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
inline constexpr double a21 = 1.0 / 5.0;
inline constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
inline constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
inline constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                        a54 = -212.0 / 729.0;
inline constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                        a65 = -5103.0 / 18656.0;
inline constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                        a76 = 11.0 / 84.0;
inline constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                        e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

}  // namespace dopri

/// Integrates y' = f(t, y) from t = 0 to t_end.
///
/// The error norm is the max over components of |err_k| / (abs_tol +
/// rel_tol max(|y_k|, |y_new,k|)). The run ends early when the step falls
/// below collapse * t_end or a component exceeds overflow in modulus.
template <class Rhs>
  requires std::is_invocable_r_v<Point, Rhs&, double, const Point&>
IntegrationResult integrate(Rhs&& f, const Point& y0, double t_end, const IntegratorOptions& opts = {}) {
  if (!(opts.rel_tol > 0.0) || !(opts.abs_tol > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "integrator tolerances must be positive");
  }
  if (!(t_end > 0.0)) throw Error(ErrorKind::invalid_argument, "t_end must be positive");
  if (!is_finite(y0)) throw Error(ErrorKind::invalid_argument, "initial state must be finite");
  using namespace dopri;

  IntegrationResult res;
  res.times.push_back(0.0);
  res.states.push_back(y0);

  auto axpy = [](const Point& y, double h, std::initializer_list<std::pair<double, const Point*>> terms) {
    Point out = y;
    for (const auto& [w, k] : terms) {
      out[0] += h * w * (*k)[0];
      out[1] += h * w * (*k)[1];
    }
    return out;
  };

  double t = 0.0;
  Point y = y0;
  Point k1 = f(t, y);
  const double min_step = opts.collapse * t_end;

  // Initial step from the scale of y and y'.
  double h;
  {
    double d0 = 0.0, d1v = 0.0;
    for (std::size_t k = 0; k < 2; ++k) {
      const double sk = opts.abs_tol + opts.rel_tol * std::abs(y[k]);
      d0 = std::max(d0, std::abs(y[k]) / sk);
      d1v = std::max(d1v, std::abs(k1[k]) / sk);
    }
    h = (d0 < 1e-5 || d1v < 1e-5) ? 1e-6 : 0.01 * d0 / d1v;
    h = std::min({h, t_end, 0.1 * t_end});
  }

  double fac_old = 1e-4;
  std::size_t steps = 0;
  while (t < t_end) {
    if (++steps > opts.max_steps || h < min_step) {
      res.terminated = Termination::step_collapse;
      break;
    }
    if (t + h > t_end) h = t_end - t;

    const Point k2 = f(t + c2 * h, axpy(y, h, {{a21, &k1}}));
    const Point k3 = f(t + c3 * h, axpy(y, h, {{a31, &k1}, {a32, &k2}}));
    const Point k4 = f(t + c4 * h, axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const Point k5 = f(t + c5 * h, axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const Point k6 = f(t + h, axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    const Point y_new = axpy(y, h, {{a71, &k1}, {a73, &k3}, {a74, &k4}, {a75, &k5}, {a76, &k6}});
    const Point k7 = f(t + h, y_new);

    double err = 0.0;
    bool finite = is_finite(y_new) && is_finite(k7);
    if (finite) {
      for (std::size_t k = 0; k < 2; ++k) {
        const Complex e = h * (e1 * k1[k] + e3 * k3[k] + e4 * k4[k] + e5 * k5[k] + e6 * k6[k] + e7 * k7[k]);
        const double sk = opts.abs_tol + opts.rel_tol * std::max(std::abs(y[k]), std::abs(y_new[k]));
        err = std::max(err, std::abs(e) / sk);
      }
      finite = std::isfinite(err);
    }
    if (!finite) {
      h *= 0.2;
      continue;
    }

    // Lund-stabilized step controller
    const double fac11 = std::pow(err, 0.2 - 0.04 * 0.75);
    double fac = fac11 / std::pow(fac_old, 0.04);
    fac = std::clamp(fac / 0.9, 0.1, 5.0);
    double h_new = h / fac;
    if (err <= 1.0) {
      fac_old = std::max(err, 1e-4);
      std::array<Point, 5> r{};
      for (std::size_t k = 0; k < 2; ++k) {
        const Complex dy = y_new[k] - y[k];
        const Complex bspl = h * k1[k] - dy;
        r[0][k] = y[k];
        r[1][k] = dy;
        r[2][k] = bspl;
        r[3][k] = dy - h * k7[k] - bspl;
        r[4][k] = h * (d1 * k1[k] + d3 * k3[k] + d4 * k4[k] + d5 * k5[k] + d6 * k6[k] + d7 * k7[k]);
      }
      res.dense.push_back(r);
      t = (t_end - (t + h) <= 1e-15 * t_end) ? t_end : t + h;
      y = y_new;
      k1 = k7;
      res.times.push_back(t);
      res.states.push_back(y);
      if (std::max(std::abs(y[0]), std::abs(y[1])) > opts.overflow) {
        res.terminated = Termination::state_overflow;
        break;
      }
    } else {
      h_new = h / std::min(1.0 / 0.2, fac11 / 0.9);
    }
    h = h_new;
  }
  res.last_time = res.times.back();
  return res;
}

inline IntegrationResult integrate(const QuadraticSystem& sys, const Point& x0, double t_end,
                                   const IntegratorOptions& opts = {}) {
  return integrate([&](double, const Point& x) { return sys.rhs(x); }, x0, t_end, opts);
}

inline IntegrationResult integrate(const LiftedSystem& ls, const Point& z0, double t_end,
                                   const IntegratorOptions& opts = {}) {
  return integrate([&](double, const Point& z) { return ls.rhs(z); }, z0, t_end, opts);
}

inline IntegrationResult integrate(const CanonicalParams& p, const Point& y0, double t_end,
                                   const IntegratorOptions& opts = {}) {
  return integrate(
      [&](double, const Point& y) {
        const auto d = canonical_rhs(p, {y[0], y[1]});
        return Point{d.y1, d.y2};
      },
      y0, t_end, opts);
}

/// max over sample_count equally spaced times of the overlap of
/// [closed_begin, closed_end] with the integrated range of
/// |closed(t) - numeric(t)| / (1 + |closed(t)|).
template <class Closed>
double compare_trajectories(Closed&& closed, double closed_begin, double closed_end, const IntegrationResult& numeric,
                            int sample_count) {
  if (sample_count < 1) throw Error(ErrorKind::invalid_argument, "sample_count must be positive");
  const double lo = std::max(closed_begin, numeric.times.front());
  const double hi = std::min(closed_end, numeric.last_time);
  if (!(hi >= lo)) throw Error(ErrorKind::disjoint_ranges, "closed-form and numeric ranges do not overlap");
  double worst = 0.0;
  for (int i = 0; i < sample_count; ++i) {
    const double t = sample_count == 1 ? hi : lo + (hi - lo) * static_cast<double>(i) / (sample_count - 1);
    const Point c = closed(t);
    worst = std::max(worst, norm(c - numeric.at(t)) / (1.0 + norm(c)));
  }
  return worst;
}

}  // namespace quadsolve
