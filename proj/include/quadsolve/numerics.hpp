#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>

namespace quadsolve {

using Complex = std::complex<double>;

/// A point of the two-dimensional complex phase space, (x1, x2).
using Point = std::array<Complex, 2>;

enum class ErrorKind {
  invalid_argument,
  singular_point,
  no_root,
  all_roots,
  non_invertible_change,
  not_in_subclass,
  beta_indeterminate,
  degenerate_inversion,
  rho_indeterminate,
  internal_consistency,
  invalid_scaling,
  normalization_inapplicable,
  disjoint_ranges,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::singular_point: return "singular-point";
    case ErrorKind::no_root: return "no-root";
    case ErrorKind::all_roots: return "all-roots";
    case ErrorKind::non_invertible_change: return "non-invertible-change";
    case ErrorKind::not_in_subclass: return "not-in-solvable-subclass";
    case ErrorKind::beta_indeterminate: return "beta-indeterminate";
    case ErrorKind::degenerate_inversion: return "degenerate-inversion";
    case ErrorKind::rho_indeterminate: return "rho-indeterminate";
    case ErrorKind::internal_consistency: return "internal-consistency";
    case ErrorKind::invalid_scaling: return "invalid-scaling";
    case ErrorKind::normalization_inapplicable: return "normalization-inapplicable";
    case ErrorKind::disjoint_ranges: return "disjoint-ranges";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), detail_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

/// Tolerance policy shared by every module.
///
/// eq_tol bounds relative residuals of algebraic identities, sing_tol is the
/// relative modulus below which a factor is treated as vanishing, and
/// oracle_tol is the accepted closed-form vs numerical deviation.
struct Tolerances {
  double eq_tol = 1e-9;
  double sing_tol = 1e-9;
  double oracle_tol = 1e-6;

  void validate() const {
    if (!(eq_tol > 0.0) || !(sing_tol > 0.0) || !(oracle_tol > 0.0)) {
      throw Error(ErrorKind::invalid_argument, "tolerances must be strictly positive");
    }
  }
};

inline bool is_finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

inline bool is_finite(const Point& p) { return is_finite(p[0]) && is_finite(p[1]); }

inline double norm(const Point& p) { return std::hypot(std::abs(p[0]), std::abs(p[1])); }

inline Point operator-(const Point& a, const Point& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Point operator+(const Point& a, const Point& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Point operator*(Complex s, const Point& a) { return {s * a[0], s * a[1]}; }

/// |a - b| / max(|a|, |b|), with 0 for two exact zeros.
inline double relative_error(Complex a, Complex b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

// ---------------------------------------------------------------------------
// Magnitude bounds
// ---------------------------------------------------------------------------

/// Companion scalar that tracks the sum of monomial magnitudes of an
/// expression: every + and - adds magnitudes, every product multiplies them.
/// Evaluating a polynomial template with MagnitudeBound instead of Complex
/// yields the normalizer used for relative residuals.
struct MagnitudeBound {
  double value = 0.0;

  MagnitudeBound() = default;
  MagnitudeBound(double v) : value(std::abs(v)) {}  // NOLINT(google-explicit-constructor)
  MagnitudeBound(Complex z) : value(std::abs(z)) {}  // NOLINT(google-explicit-constructor)

  friend MagnitudeBound operator+(MagnitudeBound a, MagnitudeBound b) { return raw(a.value + b.value); }
  friend MagnitudeBound operator-(MagnitudeBound a, MagnitudeBound b) { return raw(a.value + b.value); }
  friend MagnitudeBound operator-(MagnitudeBound a) { return a; }
  friend MagnitudeBound operator*(MagnitudeBound a, MagnitudeBound b) { return raw(a.value * b.value); }

 private:
  static MagnitudeBound raw(double v) {
    MagnitudeBound m;
    m.value = v;
    return m;
  }
};

// ---------------------------------------------------------------------------
// Branch-continuous logarithms and powers
// ---------------------------------------------------------------------------

/// Largest accepted change of the continued logarithm between two samples.
inline constexpr double kMaxLogStep = 0.25;

/// Logarithm continued from the principal value at the start of a path.
///
/// Successive samples must be close enough that the argument changes by less
/// than pi between them; advance() enforces a tighter bound and reports how
/// far the argument moved so callers can refine their sampling.
class LogContinuation {
 public:
  explicit LogContinuation(Complex start, double sing_tol = Tolerances{}.sing_tol)
      : current_(start), sing_tol_(sing_tol) {
    check_nonzero(start);
    log_ = std::log(start);
  }

  /// Moves to the next path sample. Returns false (state unchanged) when the
  /// step would change the logarithm by more than max_step.
  bool try_advance(Complex next, double max_step = kMaxLogStep) {
    check_nonzero(next);
    const Complex increment = std::log(next / current_);
    if (std::abs(increment) > max_step) return false;
    log_ += increment;
    current_ = next;
    return true;
  }

  Complex log() const { return log_; }
  Complex base() const { return current_; }

  /// Number of full turns accumulated beyond the principal branch.
  long winding() const {
    const double excess = log_.imag() - std::arg(current_);
    return std::lround(excess / (2.0 * std::numbers::pi));
  }

 private:
  void check_nonzero(Complex z) const {
    if (!is_finite(z) || std::abs(z) <= sing_tol_) {
      throw Error(ErrorKind::singular_point, "power base vanishes along the continuation path");
    }
  }

  Complex current_;
  Complex log_;
  double sing_tol_;
};

/// Continued logarithm of path(s_end), following the path from s_begin where
/// the principal branch is taken. Step size adapts so the logarithm moves by
/// at most kMaxLogStep per accepted step.
template <class Path>
Complex log_continuous(Path&& path, double s_begin, double s_end, double sing_tol = Tolerances{}.sing_tol,
                       int initial_steps = 16) {
  LogContinuation cont(path(s_begin), sing_tol);
  const double span = s_end - s_begin;
  if (span == 0.0) return cont.log();
  const double min_step = std::abs(span) * 1e-15;
  double s = s_begin;
  double h = span / initial_steps;
  while ((span > 0.0) ? (s < s_end) : (s > s_end)) {
    if ((span > 0.0) ? (s + h > s_end) : (s + h < s_end)) h = s_end - s;
    const double s_next = (std::abs(s_end - (s + h)) <= min_step) ? s_end : s + h;
    if (cont.try_advance(path(s_next))) {
      s = s_next;
      h *= 2.0;
    } else {
      h *= 0.5;
      if (std::abs(h) < min_step) {
        throw Error(ErrorKind::singular_point, "continuation step collapsed near a zero of the power base");
      }
    }
  }
  return cont.log();
}

/// base^exponent with the logarithm continued along path (a callable on
/// [s_begin, s_end] whose value at s_end is the base).
template <class Path>
Complex cpow_continuous(Path&& path, Complex exponent, double s_begin = 0.0, double s_end = 1.0,
                        double sing_tol = Tolerances{}.sing_tol) {
  return std::exp(exponent * log_continuous(std::forward<Path>(path), s_begin, s_end, sing_tol));
}

/// Logarithm continued along the straight segment from 1 to base.
///
/// A straight segment starting at 1 meets the real axis only at 1 unless it
/// lies on it, so the continued value is the principal logarithm except when
/// the segment runs through 0 onto the negative real axis.
inline Complex log_from_unity(Complex base, double sing_tol = Tolerances{}.sing_tol) {
  if (!is_finite(base) || std::abs(base) <= sing_tol) {
    throw Error(ErrorKind::singular_point, "power base vanishes");
  }
  if (base.imag() == 0.0 && base.real() < 0.0) {
    throw Error(ErrorKind::singular_point, "straight path from 1 passes through 0");
  }
  return std::log(base);
}

/// base^exponent continued along the straight path from 1 to base.
inline Complex cpow_from_unity(Complex base, Complex exponent, double sing_tol = Tolerances{}.sing_tol) {
  return std::exp(exponent * log_from_unity(base, sing_tol));
}

// ---------------------------------------------------------------------------
// Low-degree polynomials
// ---------------------------------------------------------------------------

struct QuadraticRoots {
  std::array<Complex, 2> roots;
  bool linear = false;  ///< leading coefficient vanished; both entries hold the single root
};

/// Lexicographic (re, im) ordering with a small tolerance on the real parts so
/// conjugate pairs are not reordered by rounding noise.
inline bool lexicographic_less(Complex a, Complex b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1.0});
  if (std::abs(a.real() - b.real()) > 1e-12 * scale) return a.real() < b.real();
  return a.imag() < b.imag();
}

/// Roots of c2 x^2 + c1 x + c0 sorted lexicographically.
///
/// c2 is treated as zero when |c2| <= zero_tol (|c1| + |c0|); the linear root
/// is then returned in both slots with the linear flag set.
inline QuadraticRoots solve_quadratic(Complex c2, Complex c1, Complex c0, double zero_tol = 0.0) {
  const double scale = std::abs(c1) + std::abs(c0);
  if (std::abs(c2) <= zero_tol * scale || c2 == Complex{}) {
    if (c1 == Complex{} || std::abs(c1) <= zero_tol * std::abs(c0)) {
      if (c0 == Complex{}) throw Error(ErrorKind::all_roots, "all coefficients vanish");
      throw Error(ErrorKind::no_root, "constant nonzero polynomial");
    }
    const Complex r = -c0 / c1;
    return {{r, r}, true};
  }
  Complex s = std::sqrt(c1 * c1 - 4.0 * c2 * c0);
  if ((std::conj(c1) * s).real() < 0.0) s = -s;
  const Complex q = -0.5 * (c1 + s);
  std::array<Complex, 2> r{};
  if (q == Complex{}) {
    r = {Complex{}, Complex{}};
  } else {
    r = {q / c2, c0 / q};
  }
  if (lexicographic_less(r[1], r[0])) std::swap(r[0], r[1]);
  return {r, false};
}

// ---------------------------------------------------------------------------
// Rational recognition
// ---------------------------------------------------------------------------

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

/// First continued-fraction convergent p/q of x with q <= max_den and
/// |x - p/q| <= tol. Convergents are always in lowest terms.
inline std::optional<Rational> approx_rational(double x, std::int64_t max_den, double tol = 1e-9) {
  if (max_den < 1) throw Error(ErrorKind::invalid_argument, "max_den must be >= 1");
  if (!std::isfinite(x)) return std::nullopt;
  // p_{-1}/q_{-1} = 1/0, p_{-2}/q_{-2} = 0/1
  std::int64_t p_prev = 1, q_prev = 0;
  std::int64_t p_prev2 = 0, q_prev2 = 1;
  double rem = x;
  for (int iter = 0; iter < 64; ++iter) {
    const double a_real = std::floor(rem);
    if (std::abs(a_real) > 1e15) break;
    const auto a = static_cast<std::int64_t>(a_real);
    const std::int64_t p = a * p_prev + p_prev2;
    const std::int64_t q = a * q_prev + q_prev2;
    if (q > max_den) break;
    if (std::abs(x - static_cast<double>(p) / static_cast<double>(q)) <= tol) return Rational{p, q};
    const double frac = rem - a_real;
    if (frac == 0.0) break;
    rem = 1.0 / frac;
    p_prev2 = p_prev;
    q_prev2 = q_prev;
    p_prev = p;
    q_prev = q;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Portable seeded sampling
// ---------------------------------------------------------------------------

/// std::mt19937_64 with a hand-rolled double conversion: the engine sequence
/// is fixed by the standard, std distributions are not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform in the closed unit disc of radius r.
  Complex in_disc(double r = 1.0) {
    const double rad = r * std::sqrt(uniform());
    const double theta = 2.0 * std::numbers::pi * uniform();
    return std::polar(rad, theta);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace quadsolve
