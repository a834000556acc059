#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "support.hpp"

using namespace quadsolve;
using qtest::rel;

namespace {

Point as_point(const CanonicalState& y) { return {y.y1, y.y2}; }

/// Regular evaluation times in [0, 0.5 * first singular time or t_max].
std::vector<double> regular_times(const CanonicalSolution& sol, double t_max, int n) {
  const auto sing = singular_times(sol, t_max);
  const double end = 0.5 * (sing.empty() ? t_max : sing.front());
  std::vector<double> ts;
  for (int i = 1; i <= n; ++i) ts.push_back(end * i / n);
  return ts;
}

double residual_at(const CanonicalSolution& sol, double t) {
  const double h = 1e-6 * std::max(1.0, std::abs(t));
  const auto f = [&](double s) { return as_point(eval_canonical(sol, s)); };
  const Point fd = qtest::central_difference(f, t, h);
  const Point exact = as_point(canonical_rhs(sol.params, eval_canonical(sol, t)));
  return norm(fd - exact) / (norm(exact) + 1e-300);
}

}  // namespace

TEST(CanonicalRhs, DirectSubstitution) {
  auto d = canonical_rhs({0.0, 0.0}, {1.0, 2.0});
  EXPECT_EQ(d.y1, Complex{1.0});
  EXPECT_EQ(d.y2, Complex{4.0});
  d = canonical_rhs({1.5, 0.0}, {1.0, 0.0});
  EXPECT_EQ(d.y1, Complex{1.0});
  EXPECT_EQ(d.y2, Complex{1.5});
  d = canonical_rhs({Complex{0.3, 0.2}, Complex{-1.0, 0.5}}, {0.0, Complex{2.0, 1.0}});
  EXPECT_EQ(d.y1, Complex{});
  EXPECT_EQ(d.y2, (Complex{2.0, 1.0} * Complex{2.0, 1.0}));
}

TEST(SolveCanonical, GenericDecoupled) {
  const auto sol = solve_canonical({0.0, 0.0}, {1.0, 2.0});
  EXPECT_EQ(sol.kind, CanonicalCase::generic);
  EXPECT_EQ(sol.delta, Complex{1.0});
  EXPECT_EQ(sol.u_plus, Complex{1.0});
  EXPECT_EQ(sol.u_minus, Complex{0.0});
  EXPECT_EQ(sol.u0, Complex{2.0});
  EXPECT_FALSE(sol.u_bar);
}

TEST(SolveCanonical, Y1ZeroLine) {
  const auto sol = solve_canonical({Complex{0.7, -0.1}, 2.0}, {0.0, 3.0});
  EXPECT_EQ(sol.kind, CanonicalCase::y1_zero);
}

TEST(SolveCanonical, DeltaZero) {
  const auto sol = solve_canonical({1.0, 3.0}, {1.0, 1.0});
  EXPECT_EQ(sol.kind, CanonicalCase::delta_zero);
  ASSERT_TRUE(sol.u_bar);
  EXPECT_EQ(*sol.u_bar, Complex{-1.0});
}

TEST(SolveCanonical, FixedPoints) {
  const CanonicalParams p{Complex{0.4, 0.1}, Complex{-0.3, 0.2}};
  const Complex d = canonical_delta(p);
  const Complex up = 0.5 * (1.0 - p.rho2 + d), um = 0.5 * (1.0 - p.rho2 - d);
  EXPECT_EQ(solve_canonical(p, {0.5, 0.5 * up}).kind, CanonicalCase::fixed_point_plus);
  EXPECT_EQ(solve_canonical(p, {0.5, 0.5 * um}).kind, CanonicalCase::fixed_point_minus);
}

TEST(SolveCanonical, RootRelations) {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const CanonicalParams p{rng.in_disc(2.0), rng.in_disc(2.0)};
    const auto sol = solve_canonical(p, {rng.in_disc(), rng.in_disc()});
    EXPECT_LE(std::abs(sol.u_plus + sol.u_minus - (1.0 - p.rho2)), 1e-14);
    EXPECT_LE(std::abs(sol.u_plus - sol.u_minus - sol.delta), 1e-14);
    const Complex s = 1.0 - p.rho2;
    EXPECT_LE(std::abs(sol.delta * sol.delta - (s * s - 4.0 * p.rho1)), 1e-13);
  }
}

TEST(EvalCanonical, DecoupledRiccati) {
  const auto sol = solve_canonical({0.0, 0.0}, {1.0, 2.0});
  const auto y = eval_canonical(sol, 0.25);
  EXPECT_LE(rel(y.y1, 4.0 / 3.0), 1e-15);
  EXPECT_LE(rel(y.y2, 4.0), 1e-14);
}

TEST(EvalCanonical, FixedPointRatioIsConstant) {
  const CanonicalParams p{1.5, 0.0};
  const Complex up = 0.5 * (1.0 + canonical_delta(p));
  const auto sol = solve_canonical(p, {1.0, up});
  ASSERT_EQ(sol.kind, CanonicalCase::fixed_point_plus);
  for (double t : {0.1, 0.3, 0.7}) {
    const auto y = eval_canonical(sol, t);
    EXPECT_EQ(y.y2, y.y1 * sol.u0);
  }
}

TEST(EvalCanonical, MatchesIntegrator) {
  const CanonicalParams p{1.5, 0.0};
  const auto sol = solve_canonical(p, {1.0, 1.0});
  const auto numeric = integrate(p, {1.0, 1.0}, 0.3);
  ASSERT_EQ(numeric.terminated, Termination::reached_t_end);
  EXPECT_LE(rel(numeric.states.back(), as_point(eval_canonical(sol, 0.3))), 1e-8);
}

TEST(EvalCanonical, InitialValueInEveryCase) {
  const std::vector<std::pair<CanonicalParams, CanonicalState>> cases = {
      {{0.0, 0.0}, {1.0, 2.0}},
      {{Complex{0.2, 0.3}, 0.5}, {0.0, 3.0}},
      {{1.0, 3.0}, {1.0, 1.0}},
      {{1.5, 0.0}, {1.0, 0.5 * (1.0 + canonical_delta({1.5, 0.0}))}},
      {{Complex{-0.4, 0.9}, Complex{0.1, -0.2}}, {Complex{0.3, -0.8}, Complex{-1.1, 0.4}}},
  };
  for (const auto& [p, y0] : cases) {
    const auto sol = solve_canonical(p, y0);
    const auto y = eval_canonical(sol, 0.0);
    EXPECT_LE(std::abs(y.y1 - y0.y1), 1e-15 * (1.0 + std::abs(y0.y1))) << to_string(sol.kind);
    EXPECT_LE(std::abs(y.y2 - y0.y2), 1e-14 * (1.0 + std::abs(y0.y2))) << to_string(sol.kind);
  }
}

TEST(EvalCanonical, EvaluationAtPoleIsSingular) {
  const auto sol = solve_canonical({0.0, 0.0}, {1.0, 2.0});
  try {
    eval_canonical(sol, 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::singular_point);
    EXPECT_NE(std::string(e.what()).find("u denominator"), std::string::npos);
  }
  try {
    eval_canonical(sol, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("y1 pole"), std::string::npos);
  }
  const auto line = solve_canonical({0.0, 0.0}, {0.0, 3.0});
  try {
    eval_canonical(line, 1.0 / 3.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("y2 pole"), std::string::npos);
  }
}

TEST(SingularTimes, DecoupledPoles) {
  const auto ts = singular_times(solve_canonical({0.0, 0.0}, {1.0, 2.0}), 2.0);
  ASSERT_EQ(ts.size(), 2u);
  EXPECT_NEAR(ts[0], 0.5, 1e-12);
  EXPECT_NEAR(ts[1], 1.0, 1e-12);
}

TEST(SingularTimes, Y1ZeroPole) {
  const auto ts = singular_times(solve_canonical({0.5, 0.5}, {0.0, 3.0}), 1.0);
  ASSERT_EQ(ts.size(), 1u);
  EXPECT_NEAR(ts[0], 1.0 / 3.0, 1e-12);
}

TEST(SingularTimes, NoneForDecayingData) {
  EXPECT_TRUE(singular_times(solve_canonical({0.0, 0.0}, {-1.0, -2.0}), 10.0).empty());
}

TEST(SingularTimes, MatchIntegratorBlowUp) {
  // Canonical image of x0 = (1, 1) under the first decomposition of example 1.
  const CanonicalParams p{1.5, 0.0};
  const CanonicalState y0{-8.0 / 3.0, 2.0};
  const auto sol = solve_canonical(p, y0);
  const auto ts = singular_times(sol, 1.0);
  ASSERT_FALSE(ts.empty());
  const auto numeric = integrate(p, {y0.y1, y0.y2}, 2.0 * ts.front());
  EXPECT_NE(numeric.terminated, Termination::reached_t_end);
  EXPECT_LE(std::abs(numeric.last_time - ts.front()), 1e-6 * ts.front());
}

TEST(CanonicalProperty, OdeResidualInEveryCase) {
  Rng rng(17);
  std::vector<CanonicalSolution> sols;
  for (int i = 0; i < 30; ++i) sols.push_back(solve_canonical({rng.in_disc(), rng.in_disc()}, {rng.in_disc(), rng.in_disc()}));
  for (int i = 0; i < 5; ++i) {
    const Complex rho2 = rng.in_disc(2.0);
    const Complex rho1 = 0.25 * (1.0 - rho2) * (1.0 - rho2);
    sols.push_back(solve_canonical({rho1, rho2}, {rng.in_disc(), rng.in_disc()}));
    EXPECT_EQ(sols.back().kind, CanonicalCase::delta_zero);
  }
  for (int i = 0; i < 5; ++i) {
    const CanonicalParams p{rng.in_disc(), rng.in_disc()};
    const Complex y10 = rng.in_disc();
    const Complex d = canonical_delta(p);
    sols.push_back(solve_canonical(p, {y10, y10 * 0.5 * (1.0 - p.rho2 - d)}));
    EXPECT_EQ(sols.back().kind, CanonicalCase::fixed_point_minus);
    sols.push_back(solve_canonical(p, {0.0, rng.in_disc()}));
    EXPECT_EQ(sols.back().kind, CanonicalCase::y1_zero);
  }
  for (const auto& sol : sols) {
    for (double t : regular_times(sol, 5.0, 8)) {
      EXPECT_LE(residual_at(sol, t), 1e-6) << to_string(sol.kind) << " t=" << t;
    }
  }
}

TEST(CanonicalProperty, DeltaSignInvariance) {
  Rng rng(23);
  for (int i = 0; i < 100; ++i) {
    const auto sol = solve_canonical({rng.in_disc(), rng.in_disc()}, {rng.in_disc(), rng.in_disc()});
    if (sol.kind != CanonicalCase::generic) continue;
    CanonicalSolution flipped = sol;
    flipped.delta = -sol.delta;
    std::swap(flipped.u_plus, flipped.u_minus);
    for (double t : regular_times(sol, 5.0, 5)) {
      EXPECT_LE(rel(as_point(eval_canonical(flipped, t)), as_point(eval_canonical(sol, t))), 1e-12);
    }
  }
}

TEST(CanonicalProperty, GenericConvergesToLogarithmicCase) {
  // rho2 = 3 and rho1 = 1 - eps^2 / 4 give Delta = eps.
  Tolerances tight;
  tight.eq_tol = 1e-14;
  const CanonicalState y0{0.4, Complex{0.3, 0.2}};
  const auto limit = solve_canonical({1.0, 3.0}, y0);
  ASSERT_EQ(limit.kind, CanonicalCase::delta_zero);
  auto near = [&](double eps) {
    const auto sol = solve_canonical({1.0 - 0.25 * eps * eps, 3.0}, y0, tight);
    EXPECT_EQ(sol.kind, CanonicalCase::generic);
    return sol;
  };
  const auto s4 = near(1e-4), s5 = near(1e-5);
  for (double t : {0.2, 0.5, 1.0}) {
    const Point f0 = as_point(eval_canonical(limit, t));
    const Point f4 = as_point(eval_canonical(s4, t));
    const Point f5 = as_point(eval_canonical(s5, t));
    // The error is even in eps, so Richardson extrapolation uses eps^2.
    const Point extrapolated = (1.0 / 99.0) * (Complex{100.0} * f5 - f4);
    EXPECT_LE(rel(f4, f0), 1e-3);
    EXPECT_LE(rel(f5, f0), 1e-3);
    EXPECT_LE(rel(extrapolated, f0), 1e-3);
  }
}

TEST(CanonicalProperty, MatchesIntegratorOnRandomData) {
  Rng rng(29);
  for (int i = 0; i < 30; ++i) {
    const CanonicalParams p{rng.in_disc(), rng.in_disc()};
    const CanonicalState y0{rng.in_disc(), rng.in_disc()};
    const auto sol = solve_canonical(p, y0);
    const auto ts = regular_times(sol, 5.0, 1);
    const auto numeric = integrate(p, {y0.y1, y0.y2}, ts.back());
    const double dev = compare_trajectories([&](double t) { return as_point(eval_canonical(sol, t)); }, 0.0, ts.back(),
                                            numeric, 25);
    EXPECT_LE(dev, 1e-6);
  }
}

TEST(CanonicalProperty, Y1MatchesRiccatiSolution) {
  Rng rng(31);
  for (int i = 0; i < 20; ++i) {
    const Complex y10 = rng.in_disc(2.0);
    const CanonicalParams p{rng.in_disc(), rng.in_disc()};
    const double t_end = 0.4 / (1.0 + std::abs(y10));
    const auto numeric = integrate(p, {y10, 0.0}, t_end);
    EXPECT_LE(rel(numeric.states.back()[0], y10 / (1.0 - y10 * t_end)), 1e-9);
  }
}
