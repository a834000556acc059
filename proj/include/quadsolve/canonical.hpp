#pragma once

// Closed-form solution of the canonical system
//
//   y1' = y1^2
//   y2' = rho1 y1^2 + rho2 y1 y2 + y2^2
//
// with u = y2 / y1 obeying a separable Riccati equation whose roots are
// u_pm = (1 - rho2 +- Delta) / 2.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "quadsolve/numerics.hpp"

namespace quadsolve {

struct CanonicalParams {
  Complex rho1;
  Complex rho2;
};

struct CanonicalState {
  Complex y1;
  Complex y2;
};

enum class CanonicalCase { generic, fixed_point_plus, fixed_point_minus, delta_zero, y1_zero };

inline const char* to_string(CanonicalCase c) {
  switch (c) {
    case CanonicalCase::generic: return "generic";
    case CanonicalCase::fixed_point_plus: return "fixed_point_plus";
    case CanonicalCase::fixed_point_minus: return "fixed_point_minus";
    case CanonicalCase::delta_zero: return "delta_zero";
    case CanonicalCase::y1_zero: return "y1_zero";
  }
  return "unknown";
}

/// Solved initial-value problem of the canonical system. Immutable once built
/// by solve_canonical; every field is a plain value.
struct CanonicalSolution {
  CanonicalParams params;
  Complex y10;
  Complex y20;
  Complex u0;  ///< y20 / y10, zero in the y1_zero case
  Complex u_plus;
  Complex u_minus;
  Complex delta;
  std::optional<Complex> u_bar;  ///< double root, set only for delta_zero
  CanonicalCase kind = CanonicalCase::generic;
  Tolerances tol;
};

/// Principal square root of (1 - rho2)^2 - 4 rho1.
inline Complex canonical_delta(const CanonicalParams& p) {
  const Complex s = 1.0 - p.rho2;
  return std::sqrt(s * s - 4.0 * p.rho1);
}

inline CanonicalState canonical_rhs(const CanonicalParams& p, const CanonicalState& y) {
  return {y.y1 * y.y1, p.rho1 * y.y1 * y.y1 + p.rho2 * y.y1 * y.y2 + y.y2 * y.y2};
}

inline CanonicalSolution solve_canonical(const CanonicalParams& p, const CanonicalState& y0,
                                         const Tolerances& tol = {}) {
  tol.validate();
  CanonicalSolution sol;
  sol.params = p;
  sol.y10 = y0.y1;
  sol.y20 = y0.y2;
  sol.tol = tol;
  sol.delta = canonical_delta(p);
  sol.u_plus = 0.5 * (1.0 - p.rho2 + sol.delta);
  sol.u_minus = 0.5 * (1.0 - p.rho2 - sol.delta);

  if (std::abs(y0.y1) <= tol.sing_tol * (1.0 + std::abs(y0.y2))) {
    sol.kind = CanonicalCase::y1_zero;
    sol.u0 = Complex{};
    return sol;
  }
  sol.u0 = y0.y2 / y0.y1;

  const double delta_scale = std::norm(1.0 - p.rho2) + std::abs(p.rho1);
  if (std::norm(sol.delta) <= tol.eq_tol * delta_scale) {
    sol.kind = CanonicalCase::delta_zero;
    sol.u_bar = 0.5 * (1.0 - p.rho2);
    return sol;
  }
  auto near = [&](Complex root) {
    return std::abs(sol.u0 - root) <= tol.eq_tol * (1.0 + std::abs(sol.u0) + std::abs(root));
  };
  if (near(sol.u_plus)) {
    sol.kind = CanonicalCase::fixed_point_plus;
  } else if (near(sol.u_minus)) {
    sol.kind = CanonicalCase::fixed_point_minus;
  } else {
    sol.kind = CanonicalCase::generic;
  }
  return sol;
}

/// A factor of the closed form whose zero is a movable singularity, with the
/// sum of its term magnitudes for relative comparisons.
struct SingularFactor {
  Complex value;
  double scale = 1.0;
  const char* name = "";

  double relative() const { return std::abs(value) / scale; }
};

namespace detail {

struct FactorSet {
  std::array<SingularFactor, 2> items{};
  int count = 0;

  void push(SingularFactor f) { items[static_cast<std::size_t>(count++)] = f; }
};

/// Singular factors at canonical time tau, where log_base is the continued
/// logarithm of 1 - y10 tau. u_den receives the u(t) denominator when present.
inline FactorSet singular_factors(const CanonicalSolution& sol, Complex tau, Complex log_base) {
  FactorSet out;
  if (sol.kind == CanonicalCase::y1_zero) {
    out.push({1.0 - sol.y20 * tau, 1.0 + std::abs(sol.y20 * tau), "y2 pole (1 - y2(0) t)"});
    return out;
  }
  out.push({1.0 - sol.y10 * tau, 1.0 + std::abs(sol.y10 * tau), "y1 pole (1 - y1(0) t)"});
  if (sol.kind == CanonicalCase::generic) {
    const Complex w = std::exp(-sol.delta * log_base);
    const Complex lead = sol.u0 - sol.u_minus;
    const Complex tail = (sol.u0 - sol.u_plus) * w;
    out.push({lead - tail, std::abs(lead) + std::abs(tail), "u denominator"});
  } else if (sol.kind == CanonicalCase::delta_zero) {
    const Complex v0 = sol.u0 - *sol.u_bar;
    out.push({1.0 + v0 * log_base, 1.0 + std::abs(v0 * log_base), "u denominator (logarithmic case)"});
  }
  return out;
}

}  // namespace detail

/// Canonical solution at (possibly complex) time tau. log_base must be the
/// logarithm of 1 - y10 tau continued from 0 along the time path; it is
/// ignored in the y1_zero and fixed-point cases.
inline CanonicalState eval_canonical_at(const CanonicalSolution& sol, Complex tau, Complex log_base) {
  const auto factors = detail::singular_factors(sol, tau, log_base);
  for (int i = 0; i < factors.count; ++i) {
    const auto& f = factors.items[static_cast<std::size_t>(i)];
    if (f.relative() <= sol.tol.sing_tol) {
      throw Error(ErrorKind::singular_point, std::string("evaluation at a zero of the ") + f.name);
    }
  }
  if (sol.kind == CanonicalCase::y1_zero) {
    return {Complex{}, sol.y20 / (1.0 - sol.y20 * tau)};
  }
  const Complex base = 1.0 - sol.y10 * tau;
  const Complex y1 = sol.y10 / base;
  Complex u;
  switch (sol.kind) {
    case CanonicalCase::fixed_point_plus:
    case CanonicalCase::fixed_point_minus:
      u = sol.u0;
      break;
    case CanonicalCase::delta_zero: {
      const Complex ub = *sol.u_bar;
      const Complex v0 = sol.u0 - ub;
      u = (sol.u0 + ub * v0 * log_base) / (1.0 + v0 * log_base);
      break;
    }
    default: {
      const Complex w = std::exp(-sol.delta * log_base);
      const Complex num = sol.u_plus * (sol.u0 - sol.u_minus) - sol.u_minus * (sol.u0 - sol.u_plus) * w;
      const Complex den = (sol.u0 - sol.u_minus) - (sol.u0 - sol.u_plus) * w;
      u = num / den;
      break;
    }
  }
  return {y1, y1 * u};
}

/// Canonical solution at real time t, continuing powers along t' in [0, t].
inline CanonicalState eval_canonical(const CanonicalSolution& sol, double t) {
  if (sol.kind == CanonicalCase::y1_zero) return eval_canonical_at(sol, t, Complex{});
  const Complex base = 1.0 - sol.y10 * t;
  if (std::abs(base) <= sol.tol.sing_tol * (1.0 + std::abs(sol.y10 * t))) {
    throw Error(ErrorKind::singular_point, "evaluation at a zero of the y1 pole (1 - y1(0) t)");
  }
  return eval_canonical_at(sol, t, log_from_unity(base, 0.0));
}

// ---------------------------------------------------------------------------
// Continuation along time paths
// ---------------------------------------------------------------------------

/// Real-time path t -> t in the canonical time variable.
struct RealTime {
  Complex operator()(double t) const { return t; }
};

namespace detail {

inline double log_step_budget(const CanonicalSolution& sol) {
  return kMaxLogStep / std::max(1.0, std::abs(sol.delta));
}

}  // namespace detail

/// Continued logarithm of 1 - y10 tau(t) from t = 0, where tau(0) = 0.
template <class TimeMap>
Complex continued_log_base(const CanonicalSolution& sol, TimeMap&& tau, double t) {
  if (sol.kind == CanonicalCase::y1_zero || t == 0.0) return Complex{};
  const double budget = detail::log_step_budget(sol);
  LogContinuation cont(Complex{1.0}, 0.0);
  const double min_step = std::abs(t) * 1e-15;
  double s = 0.0;
  double h = t / 16.0;
  while (s != t) {
    if ((t > 0.0) ? (s + h > t) : (s + h < t)) h = t - s;
    const Complex base = 1.0 - sol.y10 * tau(s + h);
    if (std::abs(base) <= sol.tol.sing_tol) {
      throw Error(ErrorKind::singular_point, "time path reaches the y1 pole (1 - y1(0) t)");
    }
    if (cont.try_advance(base, budget)) {
      s = (std::abs(t - (s + h)) <= min_step) ? t : s + h;
      h *= 2.0;
    } else {
      h *= 0.5;
      if (std::abs(h) < min_step) {
        throw Error(ErrorKind::singular_point, "continuation collapsed near the y1 pole");
      }
    }
  }
  return cont.log();
}

namespace detail {

template <class F>
double golden_minimize(F&& f, double lo, double hi, int iterations = 120) {
  constexpr double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iterations && (b - a) > 1e-16 * std::max(1.0, std::abs(b)); ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return (fc < fd) ? c : d;
}

struct PathSample {
  double t;
  Complex tau;
  Complex log_base;
};

}  // namespace detail

/// Real times in (0, t_max] where a singular factor of the solution vanishes
/// along the time path tau. The path is marched with steps bounded both by
/// t_max / samples and by the change of Delta log(1 - y10 tau); local minima
/// of each factor's relative modulus are refined by golden-section search and
/// accepted when below sing_tol. Scanning stops at the first y1 pole, beyond
/// which the continuation is undefined.
template <class TimeMap>
std::vector<double> singular_times_along(const CanonicalSolution& sol, TimeMap&& tau, double t_max,
                                         int samples = 2048) {
  if (!(t_max > 0.0)) throw Error(ErrorKind::invalid_argument, "t_max must be positive");
  const double sing_tol = sol.tol.sing_tol;
  const bool tracks_log = sol.kind != CanonicalCase::y1_zero;
  const double budget = detail::log_step_budget(sol);
  const double h_max = t_max / samples;
  const double min_step = t_max * 1e-15;

  std::vector<detail::PathSample> path{{0.0, tau(0.0), Complex{}}};
  std::vector<double> found;

  auto log_near = [&](const detail::PathSample& ref, double t) {
    if (!tracks_log) return Complex{};
    const Complex base_ref = 1.0 - sol.y10 * ref.tau;
    const Complex base = 1.0 - sol.y10 * tau(t);
    return ref.log_base + std::log(base / base_ref);
  };
  auto base_modulus = [&](double t) { return std::abs(1.0 - sol.y10 * tau(t)); };

  double h = h_max;
  bool pole_reached = false;
  while (path.back().t < t_max) {
    const auto& last = path.back();
    const double t_next = std::min(t_max, last.t + h);
    const Complex tau_next = tau(t_next);
    if (!tracks_log) {
      path.push_back({t_next, tau_next, Complex{}});
      continue;
    }
    const Complex base_last = 1.0 - sol.y10 * last.tau;
    const Complex base_next = 1.0 - sol.y10 * tau_next;
    const bool tiny = std::abs(base_next) <= sing_tol;
    const Complex step = tiny ? Complex{std::numeric_limits<double>::infinity()} : std::log(base_next / base_last);
    if (std::abs(step) <= budget) {
      path.push_back({t_next, tau_next, last.log_base + step});
      h = std::min(h_max, 2.0 * h);
      continue;
    }
    h *= 0.5;
    if (h < min_step || std::abs(base_last) <= 1e3 * sing_tol) {
      // Linearize the base to bracket its zero, then refine.
      const double probe = std::max(h, min_step);
      const double slope = std::abs(1.0 - sol.y10 * tau(last.t + probe) - base_last) / probe;
      const double reach = slope > 0.0 ? 2.0 * std::abs(base_last) / slope : h;
      const double t_pole =
          detail::golden_minimize(base_modulus, last.t, std::min(t_max, last.t + reach + min_step));
      found.push_back(base_modulus(t_pole) <= std::abs(base_last) ? t_pole : last.t);
      pole_reached = true;
      break;
    }
  }

  // Local minima of every factor's relative modulus over the marched samples.
  const std::size_t n = path.size();
  std::vector<std::array<double, 2>> rel(n);
  int factor_count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto f = detail::singular_factors(sol, path[i].tau, path[i].log_base);
    factor_count = f.count;
    for (int k = 0; k < f.count; ++k) rel[i][static_cast<std::size_t>(k)] = f.items[static_cast<std::size_t>(k)].relative();
  }
  for (int k = 0; k < factor_count; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (!(rel[i][kk] <= rel[i - 1][kk] && rel[i][kk] <= rel[i + 1][kk])) continue;
      const auto& ref = path[i];
      auto objective = [&](double t) {
        const auto f = detail::singular_factors(sol, tau(t), log_near(ref, t));
        return f.items[kk].relative();
      };
      const double t_min = detail::golden_minimize(objective, path[i - 1].t, path[i + 1].t);
      if (objective(t_min) <= sing_tol) found.push_back(t_min);
    }
    // A zero that falls exactly on the final sample of a truncated march.
    if (n >= 2 && !pole_reached && rel[n - 1][kk] <= sing_tol) found.push_back(path[n - 1].t);
  }

  std::sort(found.begin(), found.end());
  std::vector<double> unique;
  for (double t : found) {
    if (t <= 0.0 || t > t_max) continue;
    if (!unique.empty() && std::abs(t - unique.back()) <= 1e-9 * std::max(1.0, t)) continue;
    unique.push_back(t);
  }
  return unique;
}

/// Real singular times of the canonical solution in (0, t_max].
inline std::vector<double> singular_times(const CanonicalSolution& sol, double t_max, int samples = 2048) {
  return singular_times_along(sol, RealTime{}, t_max, samples);
}

}  // namespace quadsolve
