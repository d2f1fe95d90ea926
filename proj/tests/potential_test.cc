#include "qcrystal/potential.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "qcrystal/rng.hpp"

namespace {

qcr::Potential make(std::initializer_list<std::pair<int, double>> terms, int degree = 4) {
  std::vector<double> c(degree + 1, 0.0);
  for (auto [j, v] : terms) c[j] = v;
  return qcr::Potential(std::move(c));
}

TEST(Potential, EvalMonomial) {
  const auto v = make({{4, 1.0}});
  EXPECT_DOUBLE_EQ(qcr::eval_V0(v, 2.0), 16.0);
}

TEST(Potential, EvalZeroAtOrigin) {
  const auto v = make({{2, -1.0}, {3, 0.3}, {4, 1.0}});
  EXPECT_DOUBLE_EQ(qcr::eval_V0(v, 0.0), 0.0);
}

TEST(Potential, EvalAsymmetricQuartic) {
  const auto v = make({{2, -1.0}, {3, 0.3}, {4, 1.0}});
  EXPECT_NEAR(qcr::eval_V0(v, 1.0), 0.3, 1e-15);
}

TEST(Potential, FieldTerm) {
  const auto v = make({{4, 1.0}});
  EXPECT_DOUBLE_EQ(qcr::eval_V(v, 2.0, 3.0), 81.0 - 6.0);
}

TEST(Potential, WitnessPureQuartic) {
  const auto w = qcr::lower_bound_witness(make({{4, 1.0}}));
  EXPECT_DOUBLE_EQ(w.A, 0.5);
  EXPECT_NEAR(w.B, 0.0, 1e-12);
}

TEST(Potential, WitnessDoubleWell) {
  // min of x^4/2 - x^2 is -1/2 at x^2 = 1
  const auto w = qcr::lower_bound_witness(make({{2, -1.0}, {4, 1.0}}));
  EXPECT_DOUBLE_EQ(w.A, 0.5);
  EXPECT_NEAR(w.B, -0.5, 1e-6);
}

TEST(Potential, WitnessCubicTilt) {
  const auto v = make({{3, 1.0}, {4, 1.0}});
  const auto w = qcr::lower_bound_witness(v);
  EXPECT_DOUBLE_EQ(w.A, 0.5);
  // independent dense-grid check of the claimed global bound
  for (int i = 0; i <= 20000; ++i) {
    const double x = -50.0 + 100.0 * i / 20000.0;
    EXPECT_LE(w.A * std::pow(x, 4) + w.B, qcr::eval_V0(v, x) + 1e-9);
  }
}

TEST(Potential, WitnessBoundHoldsForRandomSpecs) {
  qcr::Rng rng(7);
  for (int trial = 0; trial < 25; ++trial) {
    const int K = (rng.next_u64() % 2) ? 4 : 6;
    std::vector<double> c(K + 1, 0.0);
    for (int j = 2; j < K; ++j) c[j] = rng.uniform(-3.0, 3.0);
    c[K] = rng.uniform(0.05, 2.0);
    const qcr::Potential v(std::move(c));
    const auto w = qcr::lower_bound_witness(v);
    ASSERT_GT(w.A, 0.0);
    for (int i = 0; i <= 4000; ++i) {
      const double x = -100.0 + 200.0 * i / 4000.0;
      ASSERT_LE(w.A * std::pow(x, K) + w.B, qcr::eval_V0(v, x) + 1e-7)
          << "x=" << x << " trial=" << trial;
    }
  }
}

TEST(Potential, ValidationRejectsBadSpecs) {
  EXPECT_FALSE(make({{3, 1.0}}, 3).valid());            // K < 4
  EXPECT_FALSE(make({{5, 1.0}}, 5).valid());            // K odd
  EXPECT_FALSE(make({{4, -1.0}}).valid());              // c_K <= 0
  EXPECT_FALSE(qcr::Potential({1.0, 0, 0, 0, 1.0}).valid());  // constant term
  EXPECT_TRUE(make({{2, -4.0}, {3, 0.5}, {4, 1.0}}).valid());
  EXPECT_THROW(qcr::lower_bound_witness(make({{4, -1.0}})), std::invalid_argument);
}

}  // namespace
