#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "quadsolve/canonical.hpp"
#include "quadsolve/inversion.hpp"
#include "quadsolve/numerics.hpp"
#include "quadsolve/transform.hpp"

namespace quadsolve {

struct SolveOptions {
  Branch branch = Branch::plus;
  std::optional<double> horizon;  ///< singularity scan horizon; scale-aware default when empty
  Tolerances tol;
};

/// Scan horizon 10 / (1 + max|c| max|x0|): movable singularity times scale
/// inversely with coefficient and data magnitude.
inline double default_horizon(const QuadraticSystem& sys, const Point& x0) {
  const double xmax = std::max(std::abs(x0[0]), std::abs(x0[1]));
  return 10.0 / (1.0 + sys.max_abs() * xmax);
}

/// Closed-form solution of an initial-value problem in the solvable subclass.
struct ClosedFormTrajectory {
  QuadraticSystem sys;
  Decomposition decomp;
  LinearChange change;
  CanonicalSolution canonical;
  Point x0;
  double horizon = 0.0;
  std::vector<double> t_singular;  ///< sorted, within (0, horizon]

  std::optional<double> first_singularity() const {
    if (t_singular.empty()) return std::nullopt;
    return t_singular.front();
  }

  Point operator()(double t) const { return push_state(change, eval_canonical(canonical, t)); }
};

/// Builds the trajectory from a given decomposition branch.
inline ClosedFormTrajectory trajectory_from(const QuadraticSystem& sys, const Decomposition& decomp, const Point& x0,
                                            const SolveOptions& opts = {}) {
  if (!is_finite(x0)) throw Error(ErrorKind::invalid_argument, "initial state must be finite");
  ClosedFormTrajectory traj;
  traj.sys = sys;
  traj.decomp = decomp;
  traj.change = linear_change_from_b(decomp.b, opts.tol.eq_tol);
  traj.canonical = solve_canonical(decomp.rho, pull_state(traj.change, x0), opts.tol);
  traj.x0 = x0;
  traj.horizon = opts.horizon.value_or(default_horizon(sys, x0));
  traj.t_singular = singular_times(traj.canonical, traj.horizon);
  return traj;
}

inline ClosedFormTrajectory solve_ivp(const QuadraticSystem& sys, const Point& x0, const SolveOptions& opts = {}) {
  const auto inv = decompose(sys, opts.tol);
  return trajectory_from(sys, inv.branch(opts.branch), x0, opts);
}

inline Point eval_trajectory(const ClosedFormTrajectory& traj, double t) { return traj(t); }

/// max over samples of |x_plus(t) - x_minus(t)| / (1 + |x_plus(t)|).
inline double branch_equivalence_check(const QuadraticSystem& sys, const Point& x0, std::span<const double> t_samples,
                                       const Tolerances& tol = {}) {
  const auto inv = decompose(sys, tol);
  SolveOptions opts;
  opts.tol = tol;
  const auto plus = trajectory_from(sys, inv.branch(Branch::plus), x0, opts);
  const auto minus = trajectory_from(sys, inv.branch(Branch::minus), x0, opts);
  double worst = 0.0;
  for (double t : t_samples) {
    const Point xp = plus(t);
    const Point xm = minus(t);
    worst = std::max(worst, norm(xp - xm) / (1.0 + norm(xp)));
  }
  return worst;
}

/// n equally spaced times in [0, fraction * end of the regular interval],
/// where the regular interval ends at the first singularity or the horizon.
inline std::vector<double> regular_samples(const ClosedFormTrajectory& traj, int n, double fraction = 0.5) {
  const double end = traj.first_singularity().value_or(traj.horizon) * fraction;
  std::vector<double> ts;
  ts.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) ts.push_back(end * (n == 1 ? 1.0 : static_cast<double>(i) / (n - 1)));
  return ts;
}

}  // namespace quadsolve
