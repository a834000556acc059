#pragma once

// Constant linear changes of variables between the canonical coordinates y
// and the coordinates x of a general homogeneous quadratic system
//
//   x_n' = c_n1 x1^2 + c_n2 x1 x2 + c_n3 x2^2,   n = 1, 2.

#include <array>
#include <cmath>

#include "quadsolve/canonical.hpp"
#include "quadsolve/numerics.hpp"

namespace quadsolve {

using Mat2 = std::array<std::array<Complex, 2>, 2>;

inline Mat2 identity2() { return {{{Complex{1.0}, Complex{}}, {Complex{}, Complex{1.0}}}}; }

inline Mat2 operator*(const Mat2& a, const Mat2& b) {
  Mat2 r{};
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
  return r;
}

inline Complex det(const Mat2& m) { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }

/// Coefficients c[n][l] of the quadratic system, zero-based: c[0][0] is c11,
/// c[1][2] is c23.
struct QuadraticSystem {
  std::array<std::array<Complex, 3>, 2> c{};

  Point rhs(const Point& x) const {
    const Complex q1 = x[0] * x[0];
    const Complex q2 = x[0] * x[1];
    const Complex q3 = x[1] * x[1];
    return {c[0][0] * q1 + c[0][1] * q2 + c[0][2] * q3, c[1][0] * q1 + c[1][1] * q2 + c[1][2] * q3};
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& row : c)
      for (const auto& v : row) m = std::max(m, std::abs(v));
    return m;
  }

  bool finite() const {
    for (const auto& row : c)
      for (const auto& v : row)
        if (!is_finite(v)) return false;
    return true;
  }

  /// The canonical system written as a quadratic system.
  static QuadraticSystem canonical(const CanonicalParams& p) {
    return {{{{Complex{1.0}, Complex{}, Complex{}}, {p.rho1, p.rho2, Complex{1.0}}}}};
  }
};

/// Largest entrywise deviation between two systems relative to the larger
/// coefficient magnitude.
inline double relative_distance(const QuadraticSystem& lhs, const QuadraticSystem& rhs) {
  double diff = 0.0;
  for (std::size_t n = 0; n < 2; ++n)
    for (std::size_t l = 0; l < 3; ++l) diff = std::max(diff, std::abs(lhs.c[n][l] - rhs.c[n][l]));
  const double scale = std::max(lhs.max_abs(), rhs.max_abs());
  return scale == 0.0 ? 0.0 : diff / scale;
}

/// Mutually inverse matrices with y = a x and x = b y, and their determinants.
struct LinearChange {
  Mat2 a;
  Mat2 b;
  Complex det_a;
  Complex det_b;
};

namespace detail {

inline Mat2 adjugate_over(const Mat2& m, Complex d) {
  return {{{m[1][1] / d, -m[0][1] / d}, {-m[1][0] / d, m[0][0] / d}}};
}

inline void require_invertible(const Mat2& m, Complex d, double eq_tol, const char* which) {
  const double scale = std::abs(m[0][0] * m[1][1]) + std::abs(m[0][1] * m[1][0]);
  if (!is_finite(d) || d == Complex{} || std::abs(d) <= eq_tol * scale) {
    throw Error(ErrorKind::non_invertible_change, std::string(which) + " matrix is singular");
  }
}

}  // namespace detail

inline LinearChange linear_change_from_b(const Mat2& b, double eq_tol = Tolerances{}.eq_tol) {
  const Complex det_b = det(b);
  detail::require_invertible(b, det_b, eq_tol, "b");
  return {detail::adjugate_over(b, det_b), b, 1.0 / det_b, det_b};
}

inline LinearChange linear_change_from_a(const Mat2& a, double eq_tol = Tolerances{}.eq_tol) {
  const Complex det_a = det(a);
  detail::require_invertible(a, det_a, eq_tol, "a");
  return {a, detail::adjugate_over(a, det_a), det_a, 1.0 / det_a};
}

/// Coefficients of the system conjugate to the canonical one with parameters p
/// under the change ch.
inline QuadraticSystem forward_map(const CanonicalParams& p, const LinearChange& ch) {
  const auto& a = ch.a;
  const auto& b = ch.b;
  const Complex a11 = a[0][0], a12 = a[0][1], a21 = a[1][0], a22 = a[1][1];
  const Complex r1 = p.rho1, r2 = p.rho2;
  const Complex q1 = r1 * a11 * a11 + (r2 * a11 + a21) * a21;
  const Complex q2 = 2.0 * r1 * a11 * a12 + r2 * (a11 * a22 + a12 * a21) + 2.0 * a21 * a22;
  const Complex q3 = r1 * a12 * a12 + (r2 * a12 + a22) * a22;
  QuadraticSystem sys;
  for (std::size_t n = 0; n < 2; ++n) {
    sys.c[n][0] = b[n][0] * a11 * a11 + b[n][1] * q1;
    sys.c[n][1] = 2.0 * b[n][0] * a11 * a12 + b[n][1] * q2;
    sys.c[n][2] = b[n][0] * a12 * a12 + b[n][1] * q3;
  }
  return sys;
}

/// y = a x.
inline CanonicalState pull_state(const LinearChange& ch, const Point& x) {
  return {ch.a[0][0] * x[0] + ch.a[0][1] * x[1], ch.a[1][0] * x[0] + ch.a[1][1] * x[1]};
}

/// x = b y.
inline Point push_state(const LinearChange& ch, const CanonicalState& y) {
  return {ch.b[0][0] * y.y1 + ch.b[0][1] * y.y2, ch.b[1][0] * y.y1 + ch.b[1][1] * y.y2};
}

}  // namespace quadsolve
