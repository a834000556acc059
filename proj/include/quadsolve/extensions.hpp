#pragma once

// Rescalings of the quadratic system and its nonhomogeneous lift
//
//   z_n(t) = exp(eta t) x_n(s) + zbar_n,   s = (exp(eta t) - 1) / eta,
//
// which is isochronous for eta = i omega whenever Delta is a real rational.

#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "quadsolve/canonical.hpp"
#include "quadsolve/inversion.hpp"
#include "quadsolve/numerics.hpp"
#include "quadsolve/solver.hpp"
#include "quadsolve/transform.hpp"

namespace quadsolve {

// ---------------------------------------------------------------------------
// Scaling
// ---------------------------------------------------------------------------

/// xhat_n(lambda t) = (mu_n / lambda) x_n(t).
struct ScalingParams {
  Complex lambda{1.0};
  Complex mu1{1.0};
  Complex mu2{1.0};
};

inline QuadraticSystem rescale(const QuadraticSystem& sys, const ScalingParams& s) {
  if (s.lambda == Complex{} || s.mu1 == Complex{} || s.mu2 == Complex{}) {
    throw Error(ErrorKind::invalid_scaling, "scale parameters must be nonzero");
  }
  const std::array<Complex, 2> mu{s.mu1, s.mu2};
  QuadraticSystem out;
  for (std::size_t n = 0; n < 2; ++n) {
    out.c[n][0] = mu[n] / (s.mu1 * s.mu1) * sys.c[n][0];
    out.c[n][1] = mu[n] / (s.mu1 * s.mu2) * sys.c[n][1];
    out.c[n][2] = mu[n] / (s.mu2 * s.mu2) * sys.c[n][2];
  }
  return out;
}

/// Rescales so that c11 = c23 = 1, using mu1 = c11 and mu2 = c23.
inline std::pair<QuadraticSystem, ScalingParams> normalize(const QuadraticSystem& sys) {
  if (sys.c[0][0] == Complex{} || sys.c[1][2] == Complex{}) {
    throw Error(ErrorKind::normalization_inapplicable, "c11 and c23 must be nonzero");
  }
  const ScalingParams s{Complex{1.0}, sys.c[0][0], sys.c[1][2]};
  auto out = rescale(sys, s);
  // Exact by construction; avoid leaving 1 +- ulp behind.
  out.c[0][0] = 1.0;
  out.c[1][2] = 1.0;
  return {out, s};
}

// ---------------------------------------------------------------------------
// Lift
// ---------------------------------------------------------------------------

struct LiftParams {
  Point zbar{};
  Complex eta{};
};

/// z_n' = sum_l c_nl m_l(z) + eta z_n + d_n1 z1 + d_n2 z2 + d_n3.
struct LiftedSystem {
  QuadraticSystem base;
  Coefficients d{};
  Complex eta;
  Point zbar{};

  Point rhs(const Point& z) const {
    Point out = base.rhs(z);
    for (std::size_t n = 0; n < 2; ++n) out[n] += eta * z[n] + d[n][0] * z[0] + d[n][1] * z[1] + d[n][2];
    return out;
  }
};

inline LiftedSystem lift(const QuadraticSystem& sys, const LiftParams& p) {
  LiftedSystem ls;
  ls.base = sys;
  ls.eta = p.eta;
  ls.zbar = p.zbar;
  const Complex z1 = p.zbar[0], z2 = p.zbar[1];
  for (std::size_t n = 0; n < 2; ++n) {
    const auto& c = sys.c[n];
    ls.d[n][0] = -2.0 * c[0] * z1 - c[1] * z2;
    ls.d[n][1] = -2.0 * c[2] * z2 - c[1] * z1;
    ls.d[n][2] = -p.eta * p.zbar[n] + c[0] * z1 * z1 + c[1] * z1 * z2 + c[2] * z2 * z2;
  }
  return ls;
}

/// t -> (exp(eta t) - 1) / eta, equal to t for eta = 0.
struct LiftTime {
  Complex eta;

  Complex operator()(double t) const {
    const Complex x = eta * t;
    if (std::abs(x) <= 1e-6) return t * (1.0 + x / 2.0 + x * x / 6.0);
    // exp(x) - 1 without cancellation in the real part
    const double er = std::expm1(x.real());
    const double s = std::sin(0.5 * x.imag());
    const Complex em1{er * std::cos(x.imag()) - 2.0 * s * s, (er + 1.0) * std::sin(x.imag())};
    return em1 / eta;
  }
};

struct LiftedTrajectory {
  LiftedSystem system;
  Decomposition decomp;
  LinearChange change;
  CanonicalSolution canonical;
  Point z0{};
  double horizon = 0.0;
  std::vector<double> t_singular;

  Point operator()(double t) const {
    const LiftTime tau{system.eta};
    const Complex s = tau(t);
    const Complex log_base = continued_log_base(canonical, tau, t);
    const Point x = push_state(change, eval_canonical_at(canonical, s, log_base));
    const Complex g = std::exp(system.eta * t);
    return {g * x[0] + system.zbar[0], g * x[1] + system.zbar[1]};
  }
};

inline LiftedTrajectory solve_lifted(const LiftedSystem& ls, const Point& z0, const SolveOptions& opts = {}) {
  const auto inv = decompose(ls.base, opts.tol);
  LiftedTrajectory traj;
  traj.system = ls;
  traj.decomp = inv.branch(opts.branch);
  traj.change = linear_change_from_b(traj.decomp.b, opts.tol.eq_tol);
  traj.z0 = z0;
  const Point x0 = z0 - ls.zbar;
  traj.canonical = solve_canonical(traj.decomp.rho, pull_state(traj.change, x0), opts.tol);
  traj.horizon = opts.horizon.value_or(default_horizon(ls.base, x0));
  traj.t_singular = singular_times_along(traj.canonical, LiftTime{ls.eta}, traj.horizon);
  return traj;
}

// ---------------------------------------------------------------------------
// Isochrony
// ---------------------------------------------------------------------------

struct IsochronyReport {
  Complex delta;
  std::optional<Rational> rational;
  double omega = 0.0;
  std::optional<double> period;
  bool isochronous = false;
};

inline IsochronyReport isochrony_check(const QuadraticSystem& sys, double omega, std::int64_t max_den = 64,
                                       const Tolerances& tol = {}, double rational_tol = 1e-9) {
  if (omega == 0.0 || !std::isfinite(omega)) throw Error(ErrorKind::invalid_argument, "omega must be nonzero");
  const auto inv = decompose(sys, tol);
  IsochronyReport rep;
  rep.delta = inv.branch(Branch::plus).delta;
  rep.omega = omega;
  const bool real = std::abs(rep.delta.imag()) <= tol.eq_tol * (1.0 + std::abs(rep.delta));
  if (real) rep.rational = approx_rational(rep.delta.real(), max_den, rational_tol);
  rep.isochronous = real && rep.rational.has_value();
  if (rep.isochronous) {
    rep.period = 2.0 * std::numbers::pi * static_cast<double>(rep.rational->den) / std::abs(omega);
  }
  return rep;
}

}  // namespace quadsolve
