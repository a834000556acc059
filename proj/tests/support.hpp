#pragma once

// Shared fixtures: the three worked example systems, exact rationals, and a
// random solvable-system sampler independent of the CLI generator.

#include <cmath>
#include <complex>

#include "quadsolve/quadsolve.hpp"

namespace qtest {

using quadsolve::Complex;
using quadsolve::Point;
using quadsolve::QuadraticSystem;
using quadsolve::operator-;
using quadsolve::operator+;
using quadsolve::operator*;

inline Complex q(double num, double den = 1.0) { return {num / den, 0.0}; }

inline QuadraticSystem example1() {
  QuadraticSystem s;
  s.c = {{{q(7, 3), q(2), q(3)}, {q(-1), q(-2), q(-3)}}};
  return s;
}

inline QuadraticSystem example2() {
  QuadraticSystem s;
  s.c = {{{q(1), q(1), q(1)}, {q(1, 8), q(2), q(-1)}}};
  return s;
}

inline QuadraticSystem example3() {
  QuadraticSystem s;
  s.c = {{{q(-19, 169), q(-265, 507), q(110, 1521)}, {q(-27, 169), q(-1, 169), q(-36, 169)}}};
  return s;
}

inline QuadraticSystem example(int k) { return k == 1 ? example1() : k == 2 ? example2() : example3(); }

/// |a - b| / |b|, or |a| when b is zero.
inline double rel(Complex a, Complex b) {
  const double s = std::abs(b);
  return s == 0.0 ? std::abs(a) : std::abs(a - b) / s;
}

inline double rel(const Point& a, const Point& b) {
  const double s = quadsolve::norm(b);
  return s == 0.0 ? quadsolve::norm(a) : quadsolve::norm(a - b) / s;
}

struct RandomCase {
  quadsolve::CanonicalParams rho;
  quadsolve::Mat2 b;
  QuadraticSystem sys;
  Point x0;
};

/// rho, b and x0 entries uniform in the unit disc, |det b| >= 0.1.
inline RandomCase random_case(quadsolve::Rng& rng) {
  RandomCase rc;
  rc.rho = {rng.in_disc(), rng.in_disc()};
  do {
    rc.b = {{{rng.in_disc(), rng.in_disc()}, {rng.in_disc(), rng.in_disc()}}};
  } while (std::abs(quadsolve::det(rc.b)) < 0.1);
  rc.sys = quadsolve::forward_map(rc.rho, quadsolve::linear_change_from_b(rc.b));
  rc.x0 = {rng.in_disc(), rng.in_disc()};
  return rc;
}

/// Central-difference derivative of f at t.
template <class F>
Point central_difference(F&& f, double t, double h) {
  const Point fp = f(t + h);
  const Point fm = f(t - h);
  return (1.0 / (2.0 * h)) * (fp - fm);
}

}  // namespace qtest
