// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>
#include <vector>

#include "tvflow/error.hpp"
#include "tvflow/noise.hpp"

namespace {

using namespace tvflow;

/// |sample variance - dt| in units of its standard error.
double variance_z_score(const BrownianPath& p, int component) {
  const int k = p.steps();
  double sum = 0.0, sum2 = 0.0;
  for (int s = 0; s < k; ++s) {
    const double d = p.value(component, s + 1) - p.value(component, s);
    sum += d;
    sum2 += d * d;
  }
  const double mean = sum / k;
  const double var = (sum2 - k * mean * mean) / (k - 1);
  const double se = p.dt() * std::sqrt(2.0 / (k - 1));
  return std::abs(var - p.dt()) / se;
}

TEST(BrownianPath, StartsAtZeroAndIsDeterministic) {
  const auto a = BrownianPath::sample(42, 3, 1.0, 1e-3);
  const auto b = BrownianPath::sample(42, 3, 1.0, 1e-3);
  const auto c = BrownianPath::sample(43, 3, 1.0, 1e-3);
  EXPECT_EQ(a.steps(), 1000);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(a.value(i, 0), 0.0);
  EXPECT_TRUE(a == b);
  EXPECT_FALSE(a == c);
  EXPECT_FALSE(a.is_zero());
}

TEST(BrownianPath, IncrementVariance) {
  const double dt = 1e-3;
  const auto p = BrownianPath::sample(2024, 2, 1e5 * dt, dt);
  for (int i = 0; i < 2; ++i) EXPECT_LT(variance_z_score(p, i), 3.0);
}

TEST(BrownianPath, ComponentsAreUncorrelated) {
  const double dt = 1e-2;
  const auto p = BrownianPath::sample(7, 2, 1e5 * dt, dt);
  double cov = 0.0;
  for (int s = 0; s < p.steps(); ++s) {
    cov += (p.value(0, s + 1) - p.value(0, s)) * (p.value(1, s + 1) - p.value(1, s));
  }
  cov /= p.steps();
  // Standard error of the mean product is dt / sqrt(K).
  EXPECT_LT(std::abs(cov), 3.0 * dt / std::sqrt(p.steps()));
}

TEST(BrownianPath, RejectsNonIntegerStepCount) {
  EXPECT_THROW(BrownianPath::sample(1, 1, 1.0, 0.3), std::invalid_argument);
  EXPECT_THROW(BrownianPath::sample(1, 0, 1.0, 0.1), std::invalid_argument);
  EXPECT_THROW(BrownianPath::sample(1, 1, -1.0, 0.1), std::invalid_argument);
  EXPECT_EQ(checked_step_count(0.2, 1e-3), 200);
}

TEST(BrownianPath, ZeroPath) {
  const auto z = BrownianPath::zero(2, 0.5, 0.01);
  EXPECT_TRUE(z.is_zero());
  EXPECT_EQ(z.steps(), 50);
  for (int k = 0; k <= z.steps(); ++k) EXPECT_EQ(z.value(1, k), 0.0);
  const auto r = z.refine(4);
  EXPECT_TRUE(r.is_zero());
  for (int k = 0; k <= r.steps(); ++k) EXPECT_EQ(r.value(0, k), 0.0);
}

TEST(Refine, KeepsCoarseValues) {
  const auto p = BrownianPath::sample(5, 2, 0.5, 1e-2);
  for (int f : {2, 3, 4, 6}) {
    const auto r = p.refine(f);
    ASSERT_EQ(r.steps(), p.steps() * f);
    EXPECT_DOUBLE_EQ(r.dt(), p.dt() / f);
    for (int k = 0; k <= p.steps(); ++k) {
      for (int i = 0; i < 2; ++i) EXPECT_EQ(r.value(i, k * f), p.value(i, k));
    }
  }
  EXPECT_THROW(p.refine(1), std::invalid_argument);
}

TEST(Refine, TwiceByTwoEqualsOnceByFour) {
  const auto p = BrownianPath::sample(6, 2, 0.3, 1e-2);
  EXPECT_TRUE(p.refine(2).refine(2) == p.refine(4));
}

TEST(Refine, RefinedIncrementVariance) {
  const auto p = BrownianPath::sample(77, 1, 4e4 * 1e-3, 1e-3);
  for (int f : {2, 4}) EXPECT_LT(variance_z_score(p.refine(f), 0), 3.0) << "factor " << f;
}

TEST(PathCsv, RoundTripWithCrlf) {
  const auto p = BrownianPath::sample(9, 2, 0.05, 1e-3);
  std::ostringstream os;
  p.write_csv(os);
  const std::string text = os.str();
  EXPECT_EQ(text.substr(0, 17), "t,beta_1,beta_2\r\n");
  std::istringstream is(text);
  const auto q = BrownianPath::read_csv(is, 9);
  EXPECT_EQ(q.steps(), p.steps());
  EXPECT_NEAR(q.dt(), p.dt(), 1e-18);
  for (int k = 0; k <= p.steps(); ++k) {
    for (int i = 0; i < 2; ++i) EXPECT_EQ(q.value(i, k), p.value(i, k));
  }
}

TEST(PathCsv, RejectsMalformedInput) {
  auto parse = [](const std::string& s) {
    std::istringstream is(s);
    return BrownianPath::read_csv(is);
  };
  EXPECT_THROW(parse(""), FormatError);
  EXPECT_THROW(parse("x,beta_1\n0,0\n1,1\n"), FormatError);
  EXPECT_THROW(parse("t,beta_2\n0,0\n1,1\n"), FormatError);
  EXPECT_THROW(parse("t,beta_1\n0,0\n"), FormatError);
  EXPECT_THROW(parse("t,beta_1\n0,0.5\n1,1\n"), FormatError);
  EXPECT_THROW(parse("t,beta_1\n0,0\n1,abc\n"), FormatError);
  EXPECT_THROW(parse("t,beta_1\n0,0\n1,1,2\n"), FormatError);
  EXPECT_THROW(parse("t,beta_1\n0,0\n1,1\n3,2\n"), FormatError);
  EXPECT_TRUE(parse("t,beta_1\n0,0\n0.5,0\n").is_zero());
}

TEST(MixSeed, DistinctStreams) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 50; ++a) {
    for (std::uint64_t b = 0; b < 50; ++b) seen.insert(mix_seed(a, b));
  }
  EXPECT_EQ(seen.size(), 2500u);
  EXPECT_EQ(mix_seed(1, 2), mix_seed(1, 2));
}

}  // namespace
