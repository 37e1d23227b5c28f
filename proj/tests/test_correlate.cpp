#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mmla/analytics.hpp"
#include "mmla/timeline.hpp"
#include "oracles.hpp"

namespace mmla::analytics {
namespace {

SignalStream make(Modality m, std::vector<Sample> s) {
  SignalStream out;
  out.modality = m;
  out.source_id = "src";
  out.samples = std::move(s);
  out.cleaned = true;
  return out;
}

std::vector<Sample> random_walk(std::mt19937_64& rng, std::int64_t t0, int n) {
  std::normal_distribution<double> step(0, 3);
  std::vector<Sample> s;
  double v = 50;
  std::int64_t t = t0;
  for (int i = 0; i < n; ++i) {
    s.push_back({t, v});
    v += step(rng);
    t += 200 + static_cast<std::int64_t>(rng() % 1800);
  }
  return s;
}

TEST(Pearson, HandExample) {
  std::vector<double> x = {1, 2, 3, 4}, y = {2, 1, 4, 3};
  auto r = pearson(x, y);
  ASSERT_TRUE(r.has_value());
  EXPECT_NEAR(*r, 0.6, 1e-15);
}

TEST(Pearson, PerfectAndDegenerate) {
  std::vector<double> x = {1, 5, 2, 8}, neg = {-1, -5, -2, -8}, flat = {3, 3, 3, 3};
  EXPECT_EQ(*pearson(x, x), 1.0);
  EXPECT_NEAR(*pearson(x, neg), -1.0, 1e-15);
  EXPECT_FALSE(pearson(x, flat).has_value());
  std::vector<double> one = {1};
  EXPECT_FALSE(pearson(one, one).has_value());
}

TEST(Pearson, MatchesOracle) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-100, 100);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 300;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = u(rng);
      y[i] = 0.3 * x[i] + u(rng);
    }
    EXPECT_NEAR(*pearson(x, y), *oracle::pearson(x, y), 1e-12);
  }
}

TEST(ResamplePair, IntersectionGrid) {
  std::vector<Sample> a = {{0, 0}, {10000, 10}}, b = {{2500, 5}, {20000, 5}};
  auto g = resample_pair(a, b, 2500);
  ASSERT_EQ(g.x.size(), 4u);  // 2500, 5000, 7500, 10000
  EXPECT_EQ(g.x.front(), 2.5);
  EXPECT_EQ(g.x.back(), 10);
  ActivityInterval w{"w", 5000, 7500};
  auto clipped = resample_pair(a, b, 2500, &w);
  ASSERT_EQ(clipped.x.size(), 1u);
  EXPECT_EQ(clipped.x[0], 5);
}

TEST(CorrelateStreams, MatrixShape) {
  std::mt19937_64 rng(32);
  auto a = random_walk(rng, 0, 300);
  std::vector<Sample> neg;
  for (const auto& s : a) neg.push_back({s.t_ms, 100 - s.value});
  std::vector<Sample> flat = {{0, 7}, {400000, 7}};
  std::vector<Sample> far = {{10'000'000, 1}, {10'005'000, 2}};
  std::vector<SignalStream> streams = {make(Modality::Attention, a), make(Modality::Meditation, neg),
                                       make(Modality::HeartRate, flat), make(Modality::PupilDiameter, far)};
  auto m = correlate_streams(streams, 1000);
  ASSERT_EQ(m.labels.size(), 4u);
  EXPECT_EQ(m.labels[1].modality, Modality::Meditation);
  EXPECT_EQ(*m.r[0][0], 1.0);
  EXPECT_NEAR(*m.r[0][1], -1.0, 1e-12);
  EXPECT_FALSE(m.r[0][2].has_value());
  EXPECT_FALSE(m.r[0][3].has_value());
  EXPECT_EQ(m.n_common[0][3], 0);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      EXPECT_EQ(m.r[i][j], m.r[j][i]);
      EXPECT_EQ(m.n_common[i][j], m.n_common[j][i]);
    }
}

TEST(CorrelateStreams, MatchesDirectPearsonOnGrid) {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 30; ++trial) {
    auto a = random_walk(rng, static_cast<std::int64_t>(rng() % 20000), 200);
    auto b = random_walk(rng, static_cast<std::int64_t>(rng() % 20000), 200);
    std::vector<SignalStream> streams = {make(Modality::Attention, a), make(Modality::Meditation, b)};
    auto m = correlate_streams(streams, 1000);
    // Independent grid: intersection span, step 1000, oracle interpolation.
    const std::int64_t lo = std::max(a.front().t_ms, b.front().t_ms);
    const std::int64_t hi = std::min(a.back().t_ms, b.back().t_ms);
    std::vector<double> x, y;
    for (std::int64_t t = lo; t <= hi; t += 1000) {
      x.push_back(*oracle::interpolate(a, t));
      y.push_back(*oracle::interpolate(b, t));
    }
    EXPECT_EQ(m.n_common[0][1], static_cast<std::int64_t>(x.size()));
    EXPECT_NEAR(*m.r[0][1], *oracle::pearson(x, y), 1e-9);
  }
}

TEST(CorrelateStreams, AffineInvariance) {
  std::mt19937_64 rng(34);
  std::uniform_real_distribution<double> alpha(0.01, 50), beta(-1000, 1000);
  for (int trial = 0; trial < 30; ++trial) {
    auto a = random_walk(rng, 0, 150);
    auto b = random_walk(rng, 5000, 150);
    const double al = alpha(rng), be = beta(rng);
    auto scaled = b;
    for (auto& s : scaled) s.value = al * s.value + be;
    std::vector<SignalStream> base = {make(Modality::Attention, a), make(Modality::Meditation, b)};
    std::vector<SignalStream> moved = {make(Modality::Attention, a), make(Modality::Meditation, scaled)};
    EXPECT_NEAR(*correlate_streams(base).r[0][1], *correlate_streams(moved).r[0][1], 1e-9);
  }
}

TEST(CorrelateStreams, ActivityFilterUsesSubgrid) {
  std::vector<Sample> a, b;
  for (int i = 0; i <= 20; ++i) {
    a.push_back({i * 1000, static_cast<double>(i)});
    b.push_back({i * 1000, i < 10 ? static_cast<double>(i) : static_cast<double>(-i)});
  }
  std::vector<SignalStream> streams = {make(Modality::Attention, a), make(Modality::Meditation, b)};
  ActivityInterval first{"first", 0, 10000};
  ActivityInterval second{"second", 10000, 21000};
  EXPECT_NEAR(*correlate_streams(streams, 1000, &first).r[0][1], 1.0, 1e-12);
  EXPECT_NEAR(*correlate_streams(streams, 1000, &second).r[0][1], -1.0, 1e-12);
  EXPECT_EQ(correlate_streams(streams, 1000, &first).n_common[0][1], 10);
}

}  // namespace
}  // namespace mmla::analytics
