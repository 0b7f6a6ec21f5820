#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "rfa/postprocess.hpp"

using namespace rfa;

namespace {

constexpr double pi = std::numbers::pi;

std::vector<double> field(const Mesh& m, auto f) {
  std::vector<double> T(m.nodes.size());
  for (std::size_t i = 0; i < T.size(); ++i) T[i] = f(m.nodes[i]);
  return T;
}

std::vector<TimeSeriesRecord> series(const std::vector<double>& t, const std::vector<double>& v,
                                     const std::vector<double>& tmax = {}) {
  std::vector<TimeSeriesRecord> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    out[i].t = t[i];
    out[i].lesion_volume = v[i];
    out[i].T_max = tmax.empty() ? 37.0 : tmax[i];
  }
  return out;
}

}  // namespace

TEST(Lesion, BodyTemperatureHasNoLesion) {
  const Mesh m = rect_mesh(0, 0.02, 0, 0.008, 10, 4);
  const auto L = lesion_metrics(m, std::vector<double>(m.nodes.size(), 37.0), 50.0);
  EXPECT_EQ(L.area, 0.0);
  EXPECT_EQ(L.volume, 0.0);
}

TEST(Lesion, UniformHotMuscleIsAllLesion) {
  const Mesh m = rect_mesh(0, 0.02, 0, 0.008, 10, 4);
  const auto L = lesion_metrics(m, std::vector<double>(m.nodes.size(), 60.0), 50.0);
  EXPECT_NEAR(L.area, 0.02 * 0.008, 1e-15);
  EXPECT_NEAR(L.volume, pi * 0.02 * 0.02 * 0.008, 1e-15);
}

TEST(Lesion, OnlyMuscleCounts) {
  const Mesh m = rect_mesh(0, 0.02, 0, 0.008, 10, 4, Region::Blood);
  const auto L = lesion_metrics(m, std::vector<double>(m.nodes.size(), 60.0), 50.0);
  EXPECT_EQ(L.volume, 0.0);
}

TEST(Lesion, LinearFieldIsClippedExactly) {
  // T = 60 - a r reaches 50 at r* = 10 / a: a cylinder of radius r*
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(600.0, 3000.0);
  const double H = 0.008;
  const Mesh m = rect_mesh(0, 0.02, 0, H, 13, 5);
  for (int k = 0; k < 10; ++k) {
    const double a = u(rng), rs = 10.0 / a;
    const auto L = lesion_metrics(m, field(m, [a](const Point& p) { return 60.0 - a * p.r; }), 50.0);
    EXPECT_NEAR(L.area, rs * H, 1e-12 * rs * H);
    EXPECT_NEAR(L.volume, pi * rs * rs * H, 1e-12 * pi * rs * rs * H);
  }
}

TEST(Lesion, SmoothFieldConvergesAtSecondOrder) {
  // hemisphere r^2 + z^2 <= rho^2 of a Gaussian bump centred on the axis at z = 0
  const double s = 3e-3, rho = s * std::sqrt(std::log(30.0 / 13.0));
  const double exact = 2.0 / 3.0 * pi * rho * rho * rho;
  auto bump = [s](const Point& p) { return 37.0 + 30.0 * std::exp(-(p.r * p.r + p.z * p.z) / (s * s)); };
  std::vector<double> err;
  for (int n : {8, 16, 32, 64}) {
    const Mesh m = rect_mesh(0, 6e-3, 0, 6e-3, n, n);
    err.push_back(std::abs(lesion_metrics(m, field(m, bump), 50.0).volume - exact));
  }
  const double order = std::log2(err[2] / err[3]);
  EXPECT_GE(order, 1.8) << err[0] << " " << err[1] << " " << err[2] << " " << err[3];
}

TEST(MaxTemp, TiesGoToTheLowestNode) {
  const Mesh m = rect_mesh(0, 1, 0, 1, 3, 3);
  const auto mx = max_temperature(m, std::vector<double>(m.nodes.size(), 42.0));
  EXPECT_EQ(mx.node, 0);
  EXPECT_EQ(mx.value, 42.0);
  EXPECT_EQ(mx.location, m.nodes[0]);
}

TEST(MaxTemp, FindsTheHottestNode) {
  const Mesh m = rect_mesh(0, 1, 0, 1, 3, 3);
  auto T = field(m, [](const Point& p) { return 37.0 + p.r + 2 * p.z; });
  const auto mx = max_temperature(m, T);
  EXPECT_EQ(mx.location, (Point{1, 1}));
  EXPECT_EQ(mx.value, 40.0);
}

TEST(ProbeTest, NodeIsExactAndLinearFieldsAreReproduced) {
  const Mesh m = rect_mesh(0, 0.02, 0, 0.01, 7, 5);
  auto lin = [](const Point& p) { return 37.0 + 300.0 * p.r - 800.0 * p.z; };
  const auto T = field(m, lin);
  EXPECT_EQ(probe(m, T, m.nodes[9]), T[9]);
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> ur(0, 0.02), uz(0, 0.01);
  for (int k = 0; k < 50; ++k) {
    const Point p{ur(rng), uz(rng)};
    EXPECT_NEAR(probe(m, T, p), lin(p), 1e-12);
  }
}

TEST(ProbeTest, OutsidePointIsRejected) {
  const Mesh m = rect_mesh(0, 0.02, 0, 0.01, 4, 4);
  EXPECT_THROW(Probe(m, {0.03, 0.005}), ProbeError);
  EXPECT_THROW(Probe(m, {0.01, -0.001}), ProbeError);
}

TEST(Energy, BodyTemperatureStoresNothing) {
  const Mesh m = rect_mesh(0, 0.02, 0, 0.008, 8, 4);
  const CoefficientMap rc{{Region::Muscle, 1200.0 * 3200.0}};
  for (double e : region_energy(m, std::vector<double>(m.nodes.size(), 37.0), rc)) EXPECT_EQ(e, 0.0);
}

TEST(Energy, OneKelvinInAMuscleDisc) {
  const Mesh m = rect_mesh(0, 0.02, 0, 0.008, 8, 4);
  const CoefficientMap rc{{Region::Muscle, 1200.0 * 3200.0}};
  const auto e = region_energy(m, std::vector<double>(m.nodes.size(), 38.0), rc);
  EXPECT_NEAR(e[1], 1200.0 * 3200.0 * pi * 0.02 * 0.02 * 0.008, 1e-9);
  EXPECT_NEAR(e[1], 38.6, 0.05);
  EXPECT_EQ(e[0], 0.0);
  EXPECT_EQ(e[2], 0.0);
}

TEST(Compare, IdenticalSeriesHaveNoDifference) {
  const std::vector<double> t{1, 2, 3, 40, 50}, v{0, 1, 2, 3, 4};
  const auto c = compare_series(series(t, v), series(t, v));
  EXPECT_FALSE(c.crossover_time);
  EXPECT_EQ(c.peak_ratio, 0.0);
  EXPECT_TRUE(std::isnan(c.difference_ratio[0]));
  for (std::size_t i = 1; i < t.size(); ++i) EXPECT_EQ(c.difference_ratio[i], 0.0);
}

TEST(Compare, HalfVolumeGivesHalfRatio) {
  const std::vector<double> t{10, 20, 30, 40}, v{2, 4, 6, 8}, h{1, 2, 3, 4};
  const auto c = compare_series(series(t, v), series(t, h));
  for (double r : c.difference_ratio) EXPECT_DOUBLE_EQ(r, 0.5);
  EXPECT_DOUBLE_EQ(c.peak_ratio, 0.5);
  EXPECT_EQ(c.t_peak, 30.0);
}

TEST(Compare, MismatchedGridsAreRejected) {
  const std::vector<double> v{1, 2, 3};
  EXPECT_THROW(compare_series(series({1, 2, 3}, v), series({1, 2, 4}, v)), std::invalid_argument);
  EXPECT_THROW(compare_series(series({1, 2, 3}, v), series({1, 2}, {1, 2})), std::invalid_argument);
}

TEST(Compare, CrossoverIsInterpolatedAndCounted) {
  // be - hbe = 2, 1, -1, -3 ... crosses between t = 20 and 30 at 25
  const std::vector<double> t{0, 10, 20, 30, 40};
  const auto c = compare_series(series(t, {0, 5, 5, 5, 5}, {40, 50, 60, 60, 60}),
                                series(t, {0, 3, 4, 6, 8}, {40, 45, 70, 70, 70}));
  ASSERT_TRUE(c.crossover_time);
  EXPECT_NEAR(*c.crossover_time, 25.0, 1e-12);
  EXPECT_EQ(c.crossover_count, 1);
  ASSERT_TRUE(c.T_max_crossover_time);
  EXPECT_NEAR(*c.T_max_crossover_time, 10.0 + 10.0 * 5.0 / 15.0, 1e-12);
}

TEST(Compare, EarlySignChangesAreIgnored) {
  const std::vector<double> t{1, 2, 3, 6, 7, 8};
  const std::vector<double> a{1, -1, 1, 1, -1, 1}, b(6, 0.0);
  EXPECT_EQ(sign_changes(t, a, b, 5.0), 2);
  EXPECT_NEAR(first_crossing(t, a, b, 5.0)->time, 6.5, 1e-12);
  EXPECT_EQ(sign_changes(t, a, b, 0.0), 4);
}
