#include <gtest/gtest.h>

#include <cmath>

#include "bisimdist/error.hpp"
#include "bisimdist/policy_iter.hpp"
#include "bisimdist/value_iter.hpp"
#include "support.hpp"

using namespace bisimdist;
namespace ts = testing_support;

namespace {

ViBudget iters(long k) {
  ViBudget b;
  b.max_iters = k;
  return b;
}

}  // namespace

TEST(ValueIteration, GamblersTwoSteps) {
  auto g = ts::gamblers();
  const auto r = vi_run(g, 1.0, iters(2));
  EXPECT_EQ(r.iters, 2);
  EXPECT_EQ(r.d(g.find_state("h"), g.find_state("t")), 1.0);
  EXPECT_NEAR(r.d(g.find_state("f"), g.find_state("b")), 0.01, 1e-15);
  // Successor distances settled after the first step.
  EXPECT_LE(ts::max_abs_diff(vi_run(g, 1.0, iters(5)).d, r.d), 1e-15);
}

// The label clause reaches (v,u) in step one; t's coin sees it in step two.
TEST(ValueIteration, CoinSteps) {
  auto c = ts::coin();
  const int t = c.find_state("t"), u = c.find_state("u"), v = c.find_state("v");
  const auto one = vi_run(c, 1.0, iters(1)).d;
  EXPECT_EQ(one(v, u), 1.0);
  EXPECT_EQ(one(t, u), 0.0);
  EXPECT_DOUBLE_EQ(vi_run(c, 1.0, iters(2)).d(t, u), 0.5);
}

TEST(ValueIteration, ZeroStepsGiveZero) {
  auto a = ts::random_automaton(3, 5, 5);
  const auto r = vi_run(a, 0.7, iters(0));
  EXPECT_EQ(r.iters, 0);
  EXPECT_EQ(r.tp_count, 0);
  EXPECT_EQ(r.d.cwiseAbs().maxCoeff(), 0.0);
}

TEST(ValueIteration, MonotoneAndGeometric) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto a = ts::random_automaton(seed, 2, 8);
    const auto d = spi(a, 0.8).final;
    DistMatrix prev;
    vi_run(a, 0.8, iters(20), [&](long k, const DistMatrix& x) {
      if (k > 0) { EXPECT_TRUE(((x - prev).array() >= -1e-12).all()) << seed; }
      EXPECT_LE(ts::max_abs_diff(x, d), std::pow(0.8, static_cast<double>(k)) + 1e-6) << seed;
      prev = x;
    });
  }
}

TEST(ValueIteration, StopsAtTargetResidual) {
  auto a = ts::random_automaton(11, 6, 6);
  ViBudget b;
  b.target_residual = 1e-9;
  const auto r = vi_run(a, 0.5, b);
  EXPECT_LE(r.residual, 1e-9);
  EXPECT_LE(ts::max_abs_diff(r.d, spi(a, 0.5).final), 1e-6);
}

TEST(ValueIteration, TimeBudgetTakesAStep) {
  ViBudget b;
  b.max_seconds = 0.0;
  const auto r = vi_run(ts::coin(), 1.0, b);
  EXPECT_GE(r.iters, 1);
}

TEST(ValueIteration, BudgetValidation) {
  auto c = ts::coin();
  EXPECT_THROW(vi_run(c, 1.0, ViBudget{}), InputError);
  ViBudget two;
  two.max_iters = 3;
  two.max_seconds = 1.0;
  EXPECT_THROW(vi_run(c, 1.0, two), InputError);
  EXPECT_THROW(vi_run(c, 1.0, iters(-1)), InputError);
  EXPECT_THROW(vi_run(c, 0.0, iters(1)), InputError);
}
