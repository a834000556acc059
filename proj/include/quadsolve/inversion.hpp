#pragma once

// Recovery of a decomposition (rho, b) from the six coefficients of a
// quadratic system: solvability constraints, the auxiliary ratio
// beta = b12 / b22, the quadratic for b21 and the rho formulas.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>

#include "quadsolve/canonical.hpp"
#include "quadsolve/numerics.hpp"
#include "quadsolve/transform.hpp"

namespace quadsolve {

using Coefficients = std::array<std::array<Complex, 3>, 2>;

enum class Branch { plus, minus };

inline const char* to_string(Branch b) { return b == Branch::plus ? "plus" : "minus"; }

// ---------------------------------------------------------------------------
// Polynomial building blocks, generic over Complex and MagnitudeBound
// ---------------------------------------------------------------------------

namespace detail {

template <class S>
struct CoefficientView {
  S c11, c12, c13, c21, c22, c23;

  static CoefficientView from(const QuadraticSystem& sys) {
    const auto& c = sys.c;
    return {S(c[0][0]), S(c[0][1]), S(c[0][2]), S(c[1][0]), S(c[1][1]), S(c[1][2])};
  }
};

/// Numerator and denominator of the linear equation for beta.
template <class S>
std::pair<S, S> beta_parts(const CoefficientView<S>& v) {
  const S two(2.0), four(4.0);
  const S num = v.c12 * v.c22 - four * v.c13 * v.c21;
  const S den = (v.c22 - two * v.c11) * v.c22 + two * v.c21 * (v.c12 - two * v.c23);
  return {num, den};
}

template <class S>
std::array<S, 2> constraint_polynomials(const CoefficientView<S>& v) {
  const S two(2.0);
  const auto [num, den] = beta_parts(v);
  const S r1 = two * v.c21 * num * num + (v.c22 - two * v.c11) * num * den - v.c12 * den * den;
  const S r2 = v.c22 * num * num - (v.c12 - two * v.c23) * num * den - two * v.c13 * den * den;
  return {r1, r2};
}

/// Residuals of the two quadratics satisfied by beta.
template <class S>
std::array<S, 2> beta_quadratics(const CoefficientView<S>& v, const S& beta) {
  const S two(2.0);
  return {two * v.c21 * beta * beta + (v.c22 - two * v.c11) * beta - v.c12,
          v.c22 * beta * beta - (v.c12 - two * v.c23) * beta - two * v.c13};
}

template <class S>
struct BetaPolynomials {
  S p;   // c11 - beta c21
  S k;   // 1 - c11 + beta c21
  S q;   // c13 + beta (c12 - c23) + beta^2 (c11 - c22)
  S b220;
  S b221;
  std::array<S, 4> cubic;  // C0..C3
};

template <class S>
BetaPolynomials<S> beta_polynomials(const CoefficientView<S>& v, const S& beta) {
  const S one(1.0), two(2.0);
  BetaPolynomials<S> r;
  const S b2 = beta * beta;
  const S b3 = b2 * beta;
  r.p = v.c11 - beta * v.c21;
  r.k = one - v.c11 + beta * v.c21;
  r.q = v.c13 + beta * (v.c12 - v.c23) + b2 * (v.c11 - v.c22);
  r.b220 = v.c23 + beta * v.c22 + b2 * v.c21;
  r.b221 = -(r.p * (r.q - v.c21 * b3));
  r.cubic[0] = b2 * v.c21 * r.k;
  r.cubic[1] = r.p * (b3 * v.c21 - r.k * (r.q - two * b3 * v.c21));
  r.cubic[2] = -(beta * r.p * r.p * (r.q - two * b3 * v.c21 + r.k * (r.q - b3 * v.c21)));
  r.cubic[3] = -(b2 * r.p * r.p * r.p * (r.q - b3 * v.c21));
  return r;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Constraints
// ---------------------------------------------------------------------------

struct ConstraintResiduals {
  Complex r1;
  Complex r2;
  double scale1 = 0.0;
  double scale2 = 0.0;
  bool satisfied = false;

  double relative1() const { return std::abs(r1) / scale1; }
  double relative2() const { return std::abs(r2) / scale2; }
};

/// Both quintic solvability constraints, each normalized by the sum of the
/// magnitudes of its monomials.
inline ConstraintResiduals constraint_residuals(const QuadraticSystem& sys, const Tolerances& tol = {}) {
  const auto values = detail::constraint_polynomials(detail::CoefficientView<Complex>::from(sys));
  const auto bounds = detail::constraint_polynomials(detail::CoefficientView<MagnitudeBound>::from(sys));
  const double m = sys.max_abs();
  const double floor = std::numeric_limits<double>::epsilon() * m * m * m * m * m;
  ConstraintResiduals res;
  res.r1 = values[0];
  res.r2 = values[1];
  res.scale1 = std::max(bounds[0].value, floor);
  res.scale2 = std::max(bounds[1].value, floor);
  if (res.scale1 == 0.0) res.scale1 = 1.0;
  if (res.scale2 == 0.0) res.scale2 = 1.0;
  res.satisfied = sys.finite() && std::abs(res.r1) <= tol.eq_tol * res.scale1 &&
                  std::abs(res.r2) <= tol.eq_tol * res.scale2;
  return res;
}

/// beta = b12 / b22 from the linear combination of its two quadratics.
inline Complex compute_beta(const QuadraticSystem& sys, const Tolerances& tol = {}) {
  const auto [num, den] = detail::beta_parts(detail::CoefficientView<Complex>::from(sys));
  const auto [num_b, den_b] = detail::beta_parts(detail::CoefficientView<MagnitudeBound>::from(sys));
  if (den == Complex{} || std::abs(den) <= tol.eq_tol * den_b.value) {
    throw Error(ErrorKind::beta_indeterminate, "denominator of the beta formula vanishes");
  }
  (void)num_b;
  return num / den;
}

/// Relative residuals of the two beta quadratics at the given beta.
inline std::array<double, 2> beta_quadratic_residuals(const QuadraticSystem& sys, Complex beta) {
  const auto values = detail::beta_quadratics(detail::CoefficientView<Complex>::from(sys), beta);
  const auto bounds =
      detail::beta_quadratics(detail::CoefficientView<MagnitudeBound>::from(sys), MagnitudeBound(beta));
  auto rel = [](Complex v, double s) { return s == 0.0 ? std::abs(v) : std::abs(v) / s; };
  return {rel(values[0], bounds[0].value), rel(values[1], bounds[1].value)};
}

// ---------------------------------------------------------------------------
// rho from b
// ---------------------------------------------------------------------------

/// The three equivalent (rho1, rho2) formulas; an entry is empty when its
/// divisor (b22, b12 or b12 b22) vanishes.
struct RhoCandidates {
  std::array<std::optional<CanonicalParams>, 3> pairs;

  std::optional<CanonicalParams> first_available() const {
    for (const auto& p : pairs)
      if (p) return p;
    return std::nullopt;
  }
};

inline RhoCandidates rho_from_b(const QuadraticSystem& sys, const Mat2& b, const Tolerances& tol = {}) {
  const auto& c = sys.c;
  const Complex c11 = c[0][0], c12 = c[0][1], c13 = c[0][2], c21 = c[1][0], c22 = c[1][1], c23 = c[1][2];
  const Complex b11 = b[0][0], b12 = b[0][1], b21 = b[1][0], b22 = b[1][1];
  const double bscale = std::max({std::abs(b11), std::abs(b12), std::abs(b21), std::abs(b22)});
  const bool use22 = std::abs(b22) > tol.eq_tol * bscale;
  const bool use12 = std::abs(b12) > tol.eq_tol * bscale;

  RhoCandidates out;
  if (use22) {
    const Complex r1 = (b21 * b21 * (1.0 - b12 * c11 - b22 * c12) + b11 * b11 * b22 * c21 +
                        b11 * b21 * (b12 * c21 - b22 * (c11 - c22))) /
                       (b22 * b22);
    const Complex r2 =
        (2.0 * b21 - 2.0 * b12 * b21 * c11 - b21 * b22 * c12 + 2.0 * b11 * b12 * c21 + b11 * b22 * c22) / b22;
    out.pairs[0] = CanonicalParams{r1, r2};
  }
  if (use12) {
    const Complex r1 = (b12 * b21 * b21 * c13 + b11 * b21 * (b22 * c13 + b12 * (c12 - c23)) +
                        b11 * b11 * (1.0 - b12 * c22 - b22 * c23)) /
                       (b12 * b12);
    const Complex r2 = (b11 * (2.0 - b12 * c22 - 2.0 * b22 * c23) + b12 * b21 * c12 + 2.0 * b21 * b22 * c13) / b12;
    out.pairs[1] = CanonicalParams{r1, r2};
  }
  if (use12 && use22) {
    const Complex r1 =
        (b21 * b21 * b22 * c13 + b11 * b11 * b12 * c21 + b11 * b21 * (1.0 - b12 * c11 - b22 * c23)) / (b12 * b22);
    const Complex r2 = b21 / b22 + (b12 * (-b21 * c11 + b11 * c21)) / b22 + (b11 + b21 * b22 * c13 - b11 * b22 * c23) / b12;
    out.pairs[2] = CanonicalParams{r1, r2};
  }
  if (!out.first_available()) throw Error(ErrorKind::rho_indeterminate, "b12 and b22 both vanish");
  return out;
}

// ---------------------------------------------------------------------------
// Decomposition
// ---------------------------------------------------------------------------

struct Decomposition {
  Complex beta;
  Mat2 b;
  CanonicalParams rho;
  Complex delta;
  Branch branch = Branch::plus;
  double round_trip_residual = 0.0;  ///< relative_distance(forward_map(rho, b), source)
};

struct InversionDiagnostics {
  std::string stage;  ///< last pipeline stage reached
  Complex beta;
  std::array<Coefficients, 2> alpha{};  ///< a c per branch (plus, minus)
  Complex B110, B220, B221;
  std::array<Complex, 4> C{};
  double c3_residual = 0.0;
  double b221_residual = 0.0;
  bool b21_free = false;  ///< C0 = C1 = C2 = 0: every b21 is admissible and 0 is used
  bool linear_b21 = false;  ///< C2 vanished, both branches share one b21
};

class InversionError : public Error {
 public:
  InversionError(ErrorKind kind, const std::string& what, InversionDiagnostics diag)
      : Error(kind, what), diagnostics_(std::move(diag)) {}

  const InversionDiagnostics& diagnostics() const noexcept { return diagnostics_; }

 private:
  InversionDiagnostics diagnostics_;
};

struct InversionResult {
  std::array<Decomposition, 2> branches;  ///< plus, minus
  InversionDiagnostics diagnostics;

  const Decomposition& branch(Branch which) const { return branches[which == Branch::plus ? 0 : 1]; }
};

/// Relative |C3| threshold above which the quadratic reduction is refused.
inline constexpr double kCubicLeadingTol = 1e-6;

/// a c, i.e. alpha_nl = a_n1 c_1l + a_n2 c_2l.
inline Coefficients alpha_matrix(const Mat2& a, const QuadraticSystem& sys) {
  Coefficients alpha{};
  for (std::size_t n = 0; n < 2; ++n)
    for (std::size_t l = 0; l < 3; ++l) alpha[n][l] = a[n][0] * sys.c[0][l] + a[n][1] * sys.c[1][l];
  return alpha;
}

/// Both branches of the decomposition of a system in the solvable subclass.
///
/// Errors: not_in_subclass when the constraints fail, beta_indeterminate or
/// degenerate_inversion when a formula's divisor vanishes, and
/// internal_consistency when C3 does not vanish or a branch fails to reproduce
/// the source coefficients. Inversion errors carry the diagnostics gathered so
/// far.
inline InversionResult decompose(const QuadraticSystem& sys, const Tolerances& tol = {}) {
  tol.validate();
  InversionDiagnostics diag;
  auto fail = [&](ErrorKind kind, const std::string& what) -> InversionError {
    return InversionError(kind, what, diag);
  };

  diag.stage = "constraints";
  const auto cons = constraint_residuals(sys, tol);
  if (!cons.satisfied) {
    throw fail(ErrorKind::not_in_subclass, "solvability constraints are violated (relative residuals " +
                                               std::to_string(cons.relative1()) + ", " +
                                               std::to_string(cons.relative2()) + ")");
  }

  diag.stage = "beta";
  try {
    diag.beta = compute_beta(sys, tol);
  } catch (const Error& e) {
    throw fail(e.kind(), e.detail());
  }
  const Complex beta = diag.beta;

  diag.stage = "b22";
  using View = detail::CoefficientView<Complex>;
  using Bound = detail::CoefficientView<MagnitudeBound>;
  const auto poly = detail::beta_polynomials(View::from(sys), beta);
  const auto poly_b = detail::beta_polynomials(Bound::from(sys), MagnitudeBound(beta));
  if (std::abs(poly.p) <= tol.eq_tol * poly_b.p.value) {
    throw fail(ErrorKind::degenerate_inversion, "c11 - beta c21 vanishes (B110 undefined)");
  }
  if (std::abs(poly.b220) <= tol.eq_tol * poly_b.b220.value) {
    throw fail(ErrorKind::degenerate_inversion, "c23 + beta c22 + beta^2 c21 vanishes (b22 undefined)");
  }
  diag.B110 = 1.0 / poly.p;
  diag.B220 = poly.b220;
  diag.B221 = poly.b221;
  diag.C = poly.cubic;
  const double b221_scale = poly_b.b221.value;
  diag.b221_residual = b221_scale == 0.0 ? 0.0 : std::abs(poly.b221) / b221_scale;
  const double c_max = std::max({std::abs(diag.C[0]), std::abs(diag.C[1]), std::abs(diag.C[2]), std::abs(diag.C[3])});
  diag.c3_residual = c_max == 0.0 ? 0.0 : std::abs(diag.C[3]) / c_max;

  diag.stage = "b21";
  if (diag.c3_residual > kCubicLeadingTol) {
    throw fail(ErrorKind::internal_consistency, "leading cubic coefficient C3 does not vanish (relative " +
                                                    std::to_string(diag.c3_residual) + ")");
  }
  const Complex b22 = 1.0 / poly.b220;
  const Complex b12 = beta * b22;

  std::array<Complex, 2> b21_roots{};
  const bool all_zero = [&] {
    for (std::size_t k = 0; k < 3; ++k)
      if (std::abs(diag.C[k]) > tol.eq_tol * poly_b.cubic[k].value) return false;
    return true;
  }();
  if (all_zero) {
    diag.b21_free = true;
    b21_roots = {Complex{}, Complex{}};
  } else {
    try {
      const auto roots = solve_quadratic(diag.C[2], diag.C[1], diag.C[0], 1e-12);
      diag.linear_b21 = roots.linear;
      // plus is the lexicographically larger root
      b21_roots = {roots.roots[1], roots.roots[0]};
    } catch (const Error& e) {
      throw fail(ErrorKind::degenerate_inversion, std::string("quadratic for b21: ") + e.what());
    }
  }

  diag.stage = "branches";
  InversionResult result;
  for (std::size_t i = 0; i < 2; ++i) {
    Decomposition d;
    d.branch = i == 0 ? Branch::plus : Branch::minus;
    d.beta = beta;
    const Complex b21 = b21_roots[i];
    const Complex b11 = diag.B110 + beta * b21;
    d.b = {{{b11, b12}, {b21, b22}}};
    LinearChange change;
    try {
      change = linear_change_from_b(d.b, tol.eq_tol);
    } catch (const Error& e) {
      throw fail(ErrorKind::degenerate_inversion, std::string("recovered change: ") + e.what());
    }
    // b22 = 1 / B220 is never zero, so the first rho pair always applies.
    const auto rho = rho_from_b(sys, d.b, tol).pairs[0];
    d.rho = *rho;
    d.delta = canonical_delta(d.rho);
    diag.alpha[i] = alpha_matrix(change.a, sys);
    d.round_trip_residual = relative_distance(forward_map(d.rho, change), sys);
    if (!(d.round_trip_residual <= 1e3 * tol.eq_tol)) {
      throw fail(ErrorKind::internal_consistency,
                 std::string("branch ") + to_string(d.branch) + " does not reproduce the coefficients (relative " +
                     std::to_string(d.round_trip_residual) + ")");
    }
    result.branches[i] = d;
  }
  diag.stage = "done";
  result.diagnostics = diag;
  return result;
}

}  // namespace quadsolve
