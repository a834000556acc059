#include <gtest/gtest.h>

#include <vector>

#include "support.hpp"

using namespace quadsolve;
using qtest::q;
using qtest::rel;

namespace {

struct BranchValues {
  Complex b11, b21, rho1, rho2;
};

struct Golden {
  QuadraticSystem sys;
  Complex beta, b12, b22, delta_sq;
  std::array<BranchValues, 2> branches;  // in the order listed for each example
};

std::vector<Golden> golden() {
  return {
      {qtest::example1(), q(-3), q(1, 2), q(-1, 6), q(-5),
       {{{q(0), q(-1, 2), q(3, 2), q(0)}, {q(1), q(-5, 6), q(7, 2), q(4)}}}},
      {qtest::example2(), q(2), q(4, 7), q(2, 7), q(7, 3),
       {{{q(0), q(-2, 3), q(7, 9), q(-4, 3)}, {q(1), q(-1, 6), q(-35, 144), q(13, 6)}}}},
      {qtest::example3(), q(5, 3), q(-5, 2), q(-3, 2), q(9, 4),
       {{{q(0), q(-39, 10), q(-11, 25), q(17, 10)}, {q(1), q(-33, 10), q(-14, 25), q(9, 10)}}}},
  };
}

/// Branch of the decomposition whose b21 is closest to the expected value.
const Decomposition& match(const InversionResult& inv, Complex b21) {
  const auto& p = inv.branch(Branch::plus);
  const auto& m = inv.branch(Branch::minus);
  return std::abs(p.b[1][0] - b21) <= std::abs(m.b[1][0] - b21) ? p : m;
}

}  // namespace

TEST(Constraints, WorkedExamplesSatisfied) {
  for (int k = 1; k <= 3; ++k) {
    const auto r = constraint_residuals(qtest::example(k));
    EXPECT_TRUE(r.satisfied) << "example " << k;
    EXPECT_LE(r.relative1(), 1e-12);
    EXPECT_LE(r.relative2(), 1e-12);
    EXPECT_GT(r.scale1, 0.0);
    EXPECT_GT(r.scale2, 0.0);
  }
}

TEST(Constraints, PerturbedExampleViolates) {
  auto sys = qtest::example1();
  sys.c[0][0] += 0.1;
  const auto r = constraint_residuals(sys);
  EXPECT_FALSE(r.satisfied);
  // Independent evaluation of the two quintics at the perturbed coefficients.
  const Complex c11 = sys.c[0][0], c12 = 2.0, c13 = 3.0, c21 = -1.0, c22 = -2.0, c23 = -3.0;
  const Complex n = c12 * c22 - 4.0 * c13 * c21;
  const Complex d = (c22 - 2.0 * c11) * c22 + 2.0 * c21 * (c12 - 2.0 * c23);
  EXPECT_LE(rel(r.r1, 2.0 * c21 * n * n + (c22 - 2.0 * c11) * n * d - c12 * d * d), 1e-13);
  EXPECT_LE(rel(r.r2, c22 * n * n - (c12 - 2.0 * c23) * n * d - 2.0 * c13 * d * d), 1e-13);
}

TEST(Constraints, EverySingleCoefficientPerturbationViolates) {
  for (int n = 0; n < 2; ++n)
    for (int l = 0; l < 3; ++l) {
      auto sys = qtest::example1();
      sys.c[n][l] += 0.1;
      EXPECT_FALSE(constraint_residuals(sys).satisfied) << n << "," << l;
    }
}

TEST(Constraints, ResidualScaleInvariance) {
  // Multiplying every coefficient by s scales both quintics and their
  // normalizers by s^5.
  auto sys = qtest::example3();
  sys.c[1][1] += 0.05;
  const auto base = constraint_residuals(sys);
  for (double s : {1e-3, 7.0, 1e4}) {
    QuadraticSystem scaled = sys;
    for (auto& row : scaled.c)
      for (auto& v : row) v *= s;
    const auto r = constraint_residuals(scaled);
    EXPECT_NEAR(r.relative1(), base.relative1(), 1e-10);
    EXPECT_NEAR(r.relative2(), base.relative2(), 1e-10);
  }
}

TEST(Beta, WorkedExamples) {
  EXPECT_LE(rel(compute_beta(qtest::example1()), -3.0), 1e-14);
  EXPECT_LE(rel(compute_beta(qtest::example2()), 2.0), 1e-14);
  EXPECT_LE(rel(compute_beta(qtest::example3()), 5.0 / 3.0), 1e-14);
}

TEST(Beta, CanonicalSystemGivesZero) {
  const auto sys = QuadraticSystem::canonical({Complex{0.4, 0.1}, Complex{2.5, -0.3}});
  EXPECT_EQ(compute_beta(sys), Complex{});
}

TEST(Beta, IndeterminateDenominator) {
  // (c22 - 2 c11) c22 + 2 c21 (c12 - 2 c23) = 0 with c21 = 0, c22 = 0.
  QuadraticSystem sys;
  sys.c = {{{1.0, 1.0, 1.0}, {0.0, 0.0, 1.0}}};
  try {
    compute_beta(sys);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::beta_indeterminate);
  }
}

TEST(Decompose, GoldenValues) {
  for (const auto& g : golden()) {
    const auto inv = decompose(g.sys);
    for (const auto& expected : g.branches) {
      const auto& d = match(inv, expected.b21);
      EXPECT_LE(rel(d.beta, g.beta), 1e-12);
      EXPECT_LE(rel(d.b[0][1], g.b12), 1e-12);
      EXPECT_LE(rel(d.b[1][1], g.b22), 1e-12);
      EXPECT_LE(rel(d.b[0][0], expected.b11), 1e-12);
      EXPECT_LE(rel(d.b[1][0], expected.b21), 1e-12);
      EXPECT_LE(rel(d.rho.rho1, expected.rho1), 1e-12);
      EXPECT_LE(rel(d.rho.rho2, expected.rho2), 1e-12);
      EXPECT_LE(rel(d.delta * d.delta, g.delta_sq), 1e-12);
      EXPECT_LE(d.round_trip_residual, 1e-9);
    }
    EXPECT_NE(inv.branches[0].b[1][0], inv.branches[1].b[1][0]);
  }
}

TEST(Decompose, Example1BranchLabels) {
  const auto inv = decompose(qtest::example1());
  EXPECT_LE(rel(inv.branch(Branch::plus).b[1][0], -0.5), 1e-12);
  EXPECT_LE(rel(inv.branch(Branch::minus).b[1][0], -5.0 / 6.0), 1e-12);
  EXPECT_EQ(inv.branch(Branch::plus).branch, Branch::plus);
  EXPECT_LE(rel(inv.branch(Branch::plus).delta, Complex{0.0, std::sqrt(5.0)}), 1e-12);
}

TEST(Decompose, CubicCoefficientsForExample1) {
  const auto inv = decompose(qtest::example1());
  const auto& C = inv.diagnostics.C;
  EXPECT_LE(rel(C[0], -15.0), 1e-12);
  EXPECT_LE(rel(C[1], -48.0), 1e-12);
  EXPECT_LE(rel(C[2], -36.0), 1e-12);
  EXPECT_LE(std::abs(C[3]), 1e-12);
  const auto roots = solve_quadratic(C[2], C[1], C[0]);
  EXPECT_LE(rel(roots.roots[0], -5.0 / 6.0), 1e-12);
  EXPECT_LE(rel(roots.roots[1], -0.5), 1e-12);
  EXPECT_EQ(inv.diagnostics.stage, "done");
}

TEST(Decompose, NotInSubclassCarriesDiagnostics) {
  auto sys = qtest::example1();
  sys.c[0][0] += 0.1;
  try {
    decompose(sys);
    FAIL();
  } catch (const InversionError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::not_in_subclass);
    EXPECT_EQ(e.diagnostics().stage, "constraints");
  }
}

TEST(Decompose, CanonicalSystemHasFreeB21) {
  const CanonicalParams p{Complex{0.4, 0.1}, Complex{2.5, -0.3}};
  const auto inv = decompose(QuadraticSystem::canonical(p));
  EXPECT_TRUE(inv.diagnostics.b21_free);
  for (const auto& d : inv.branches) {
    EXPECT_LE(relative_distance(QuadraticSystem::canonical(d.rho), QuadraticSystem::canonical(p)), 1e-15);
    EXPECT_LE(std::abs(d.b[1][0]), 0.0);
    EXPECT_LE(rel(d.b[0][0], 1.0), 1e-15);
  }
}

TEST(RhoFromB, AllPairsAgree) {
  const Mat2 b{{{q(0), q(1, 2)}, {q(-1, 2), q(-1, 6)}}};
  const auto cands = rho_from_b(qtest::example1(), b);
  for (const auto& p : cands.pairs) {
    ASSERT_TRUE(p);
    EXPECT_LE(rel(p->rho1, 1.5), 1e-12);
    EXPECT_LE(std::abs(p->rho2), 1e-12);
  }
  const Mat2 b3{{{q(1), q(-5, 2)}, {q(-33, 10), q(-3, 2)}}};
  const auto c3 = rho_from_b(qtest::example3(), b3);
  for (const auto& p : c3.pairs) {
    ASSERT_TRUE(p);
    EXPECT_LE(rel(p->rho1, -14.0 / 25.0), 1e-12);
    EXPECT_LE(rel(p->rho2, 9.0 / 10.0), 1e-12);
  }
}

TEST(RhoFromB, VanishingB12SkipsDependentPairs) {
  const CanonicalParams p{Complex{0.3, 0.2}, 0.7};
  const Mat2 b{{{q(2), q(0)}, {q(1), q(3)}}};
  const auto sys = forward_map(p, linear_change_from_b(b));
  const auto cands = rho_from_b(sys, b);
  ASSERT_TRUE(cands.pairs[0]);
  EXPECT_FALSE(cands.pairs[1]);
  EXPECT_FALSE(cands.pairs[2]);
  EXPECT_LE(rel(cands.pairs[0]->rho1, p.rho1), 1e-12);
  EXPECT_LE(rel(cands.pairs[0]->rho2, p.rho2), 1e-12);
  try {
    rho_from_b(sys, {{{q(1), q(0)}, {q(1), q(0)}}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::rho_indeterminate);
  }
}

TEST(InversionProperty, ForwardBackwardConsistency) {
  Rng rng(101);
  for (int i = 0; i < 100; ++i) {
    const auto rc = qtest::random_case(rng);
    const auto inv = decompose(rc.sys);
    const auto& b = rc.b;
    for (const auto& d : inv.branches) {
      EXPECT_LE(rel(d.beta, b[0][1] / b[1][1]), 1e-9);
      EXPECT_LE(rel(d.b[1][1], b[1][1]), 1e-9);
      EXPECT_LE(rel(d.b[0][1], b[0][1]), 1e-9);
      EXPECT_LE(rel(d.b[0][1], d.beta * d.b[1][1]), 1e-12);
      EXPECT_LE(d.round_trip_residual, 1e-9);
    }
    // Decompositions form a family under y2 -> y2 + k y1; each branch is the
    // member with b11 in {0, 1}, and (rho, b) shift by the same k.
    const Complex b11s[2] = {inv.branches[0].b[0][0], inv.branches[1].b[0][0]};
    EXPECT_LE(std::min(std::abs(b11s[0]), std::abs(b11s[1])), 1e-9);
    EXPECT_LE(std::min(std::abs(b11s[0] - 1.0), std::abs(b11s[1] - 1.0)), 1e-9);
    for (const auto& d : inv.branches) {
      const Complex k = (d.b[1][0] - b[1][0]) / b[1][1];
      EXPECT_LE(std::abs(d.b[0][0] - (b[0][0] + k * b[0][1])), 1e-8);
      EXPECT_LE(rel(d.rho.rho1, rc.rho.rho1 + rc.rho.rho2 * k + k * k - k), 1e-8);
      EXPECT_LE(rel(d.rho.rho2, rc.rho.rho2 + 2.0 * k), 1e-8);
    }
  }
}

TEST(InversionProperty, NormalizedGeneratorIsRecovered) {
  Rng rng(107);
  for (int i = 0; i < 100; ++i) {
    auto rc = qtest::random_case(rng);
    const Complex target = (i % 2 == 0) ? 0.0 : 1.0;
    const Complex k = (target - rc.b[0][0]) / rc.b[0][1];
    rc.b[0][0] = target;
    rc.b[1][0] += k * rc.b[1][1];
    rc.rho = {rc.rho.rho1 + rc.rho.rho2 * k + k * k - k, rc.rho.rho2 + 2.0 * k};
    const auto inv = decompose(forward_map(rc.rho, linear_change_from_b(rc.b)));
    const auto& d = match(inv, rc.b[1][0]);
    EXPECT_LE(std::abs(d.b[0][0] - target), 1e-8);
    EXPECT_LE(rel(d.b[1][0], rc.b[1][0]), 1e-8);
    EXPECT_LE(rel(d.rho.rho1, rc.rho.rho1), 1e-8);
    EXPECT_LE(rel(d.rho.rho2, rc.rho.rho2), 1e-8);
  }
}

TEST(InversionProperty, CubicAndB221Vanish) {
  Rng rng(103);
  for (int i = 0; i < 100; ++i) {
    const auto inv = decompose(qtest::random_case(rng).sys);
    EXPECT_LE(inv.diagnostics.c3_residual, 1e-9);
    EXPECT_LE(inv.diagnostics.b221_residual, 1e-9);
  }
}

TEST(InversionProperty, BranchesShareDeltaUpToSign) {
  Rng rng(107);
  for (int i = 0; i < 100; ++i) {
    const auto inv = decompose(qtest::random_case(rng).sys);
    const Complex d0 = inv.branches[0].delta, d1 = inv.branches[1].delta;
    EXPECT_LE(std::min(std::abs(d0 - d1), std::abs(d0 + d1)), 1e-8 * (1.0 + std::abs(d0)));
  }
}

TEST(InversionProperty, BetaSatisfiesBothQuadratics) {
  Rng rng(109);
  for (int i = 0; i < 100; ++i) {
    const auto sys = qtest::random_case(rng).sys;
    const auto r = beta_quadratic_residuals(sys, compute_beta(sys));
    EXPECT_LE(r[0], 1e-10);
    EXPECT_LE(r[1], 1e-10);
  }
  for (int k = 1; k <= 3; ++k) {
    const auto sys = qtest::example(k);
    const auto r = beta_quadratic_residuals(sys, compute_beta(sys));
    EXPECT_LE(std::max(r[0], r[1]), 1e-12);
  }
}

TEST(InversionProperty, RhoPairsAgreeOnRecoveredChange) {
  Rng rng(113);
  for (int i = 0; i < 100; ++i) {
    const auto sys = qtest::random_case(rng).sys;
    const auto inv = decompose(sys);
    for (const auto& d : inv.branches) {
      const auto cands = rho_from_b(sys, d.b);
      for (const auto& p : cands.pairs) {
        if (!p) continue;
        EXPECT_LE(rel(p->rho1, d.rho.rho1), 1e-9 * (1.0 + 1.0 / std::abs(d.rho.rho1)));
        EXPECT_LE(rel(p->rho2, d.rho.rho2), 1e-9 * (1.0 + 1.0 / std::abs(d.rho.rho2)));
      }
    }
  }
}

TEST(InversionProperty, AlphaMatchesCanonicalExpansion) {
  // a c must equal the coefficients of y' = f(y) written in x-monomials:
  // y1' = (a11 x1 + a12 x2)^2 and y2' = rho1 y1^2 + rho2 y1 y2 + y2^2.
  Rng rng(127);
  for (int i = 0; i < 50; ++i) {
    const auto sys = qtest::random_case(rng).sys;
    const auto inv = decompose(sys);
    for (std::size_t k = 0; k < 2; ++k) {
      const auto& d = inv.branches[k];
      const auto a = linear_change_from_b(d.b).a;
      const Complex a11 = a[0][0], a12 = a[0][1], a21 = a[1][0], a22 = a[1][1];
      const Complex r1 = d.rho.rho1, r2 = d.rho.rho2;
      const Coefficients expected{{{a11 * a11, 2.0 * a11 * a12, a12 * a12},
                                   {r1 * a11 * a11 + r2 * a11 * a21 + a21 * a21,
                                    2.0 * r1 * a11 * a12 + r2 * (a11 * a22 + a12 * a21) + 2.0 * a21 * a22,
                                    r1 * a12 * a12 + r2 * a12 * a22 + a22 * a22}}};
      double scale = 0.0;
      for (const auto& row : expected)
        for (const auto& v : row) scale = std::max(scale, std::abs(v));
      for (int n = 0; n < 2; ++n)
        for (int l = 0; l < 3; ++l)
          EXPECT_LE(std::abs(inv.diagnostics.alpha[k][n][l] - expected[n][l]), 1e-9 * scale);
    }
  }
}
