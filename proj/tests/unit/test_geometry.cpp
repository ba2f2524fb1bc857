#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "netimg/geometry.hpp"

namespace netimg {
namespace {

constexpr double kTol = 1e-12;

// Angle formula written out as arctan plus the pi shift, independent of atan2.
double shifted_arctan(const Vec2& a, const Vec2& p) {
  return std::atan((a.y() - p.y()) / (a.x() - p.x())) + (a.x() < p.x() ? kPi : 0.0);
}

TEST(Aod, HorizontalCollinear) { EXPECT_NEAR(aod({-3, 7.5}, {7.5, 7.5}), kPi, kTol); }

TEST(Aod, VerticalAlignment) { EXPECT_NEAR(aod({0, 0}, {0, -1}), kPi / 2, kTol); }

TEST(Aod, MatchesArctanOracle) {
  const Vec2 tx(-3, 7.5);
  const Vec2 p(7.5, 10.5);
  EXPECT_NEAR(aod(tx, p), shifted_arctan(tx, p), kTol);
  EXPECT_NEAR(aod(tx, p), std::atan2(-3.0, -10.5) + 2 * kPi, kTol);
}

TEST(Aod, CoincidentPointsThrow) { EXPECT_THROW(aod({1, 2}, {1, 2}), DomainError); }

TEST(Aoa, Examples) {
  EXPECT_NEAR(aoa({18, 7.5}, {7.5, 7.5}), 0.0, kTol);
  EXPECT_NEAR(aoa({7.5, 18}, {7.5, 7.5}), kPi / 2, kTol);
  EXPECT_NEAR(aoa({7.5, -3}, {3, 3}), std::atan(-6.0 / 4.5), kTol);
  EXPECT_NEAR(aoa({7.5, -3}, {3, 3}), shifted_arctan({7.5, -3}, {3, 3}), kTol);
}

TEST(Aod, RangeAndSineAgreeWithClosedForm) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-20, 20);
  for (int i = 0; i < 500; ++i) {
    const Vec2 a(u(rng), u(rng));
    const Vec2 p(u(rng), u(rng));
    const double phi = aod(a, p);
    EXPECT_GT(phi, -kPi / 2);
    EXPECT_LE(phi, 3 * kPi / 2);
    EXPECT_NEAR(std::sin(phi), sine_of_angle(a, p), 1e-12);
    if (a.x() != p.x()) EXPECT_NEAR(std::sin(phi), std::sin(shifted_arctan(a, p)), 1e-12);
  }
}

TEST(Steering, Examples) {
  const CVec s0 = steer_tx(0.0, 4);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(std::abs(s0[i] - Complex(1, 0)), 0.0, kTol);
  const CVec s1 = steer_tx(kPi / 2, 2);
  EXPECT_NEAR(std::abs(s1[1] - Complex(-1, 0)), 0.0, kTol);
  const CVec s2 = steer_rx(kPi / 6, 3);
  EXPECT_NEAR(std::abs(s2[0] - Complex(1, 0)), 0.0, kTol);
  EXPECT_NEAR(std::abs(s2[1] - Complex(0, -1)), 0.0, kTol);
  EXPECT_NEAR(std::abs(s2[2] - Complex(-1, 0)), 0.0, kTol);
}

TEST(Steering, SquaredNormEqualsLength) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int n = 1; n <= 32; n += 3) {
    const double phi = u(rng);
    EXPECT_NEAR(steer_tx(phi, n).squaredNorm(), n, 1e-10);
  }
}

TEST(Steering, MirrorAcrossArrayRowConjugates) {
  const Vec2 t(-3, 7.5);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0, 15);
  for (int i = 0; i < 50; ++i) {
    const Vec2 p(u(rng), u(rng));
    const Vec2 mirrored(p.x(), 2 * t.y() - p.y());
    EXPECT_NEAR(sine_of_angle(t, p), -sine_of_angle(t, mirrored), 1e-12);
    const CVec a = steer_tx(aod(t, p), 8);
    const CVec b = steer_tx(aod(t, mirrored), 8);
    EXPECT_LT((a.conjugate() - b).norm(), 1e-10);
  }
}

TEST(PathLoss, Examples) {
  EXPECT_NEAR(path_loss({0, 0}, {20, 0}, {10, 0}, 1e-7), 1e-11, 1e-24);
  EXPECT_NEAR(path_loss({0, 0}, {2, 0}, {1, 0}, 1.0), 1.0, kTol);
  const double expected = 1e-7 * std::pow(10.5, -2) * std::pow(10.5, -2);
  EXPECT_NEAR(path_loss({-3, 7.5}, {18, 7.5}, {7.5, 7.5}, 1e-7), expected, expected * 1e-12);
}

TEST(PathLoss, SymmetricInEndpoints) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5, 20);
  for (int i = 0; i < 100; ++i) {
    const Vec2 a(u(rng), u(rng));
    const Vec2 b(u(rng), u(rng));
    const Vec2 p(u(rng), u(rng));
    EXPECT_DOUBLE_EQ(path_loss(a, b, p, 1e-7), path_loss(b, a, p, 1e-7));
  }
}

TEST(PathLoss, ZeroDistanceThrows) { EXPECT_THROW(path_loss({0, 0}, {1, 1}, {0, 0}, 1.0), DomainError); }

Scene one_receiver(double center, double width) {
  Scene s = testing::reference_scene(4, 4, 1);
  s.fovs.push_back({0, center, width});
  return s;
}

TEST(Visibility, ZeroWidthAlwaysVisible) {
  const Scene s = one_receiver(1.0, 0.0);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 15);
  for (int i = 0; i < 100; ++i) EXPECT_TRUE(visibility(s, 0, {u(rng), u(rng)}));
}

TEST(Visibility, FullWidthNeverVisible) {
  const Scene s = one_receiver(0.3, 2 * kPi);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 15);
  for (int i = 0; i < 100; ++i) EXPECT_FALSE(visibility(s, 0, {u(rng), u(rng)}));
}

TEST(Visibility, SectorBoundary) {
  const Vec2 rx(18, 7.5);
  const double width = kPi / 8;
  const double center = kPi;  // towards the RoI centre
  const Scene s = one_receiver(center, width);
  EXPECT_FALSE(visibility(s, 0, {7.5, 7.5}));
  const double eps = 1e-6;
  for (double sign : {-1.0, 1.0}) {
    const double b = center + sign * (width / 2 + eps);
    const Vec2 p = rx + 5.0 * Vec2(std::cos(b), std::sin(b));
    EXPECT_TRUE(visibility(s, 0, p));
    const double inside = center + sign * (width / 2 - eps);
    EXPECT_FALSE(visibility(s, 0, rx + 5.0 * Vec2(std::cos(inside), std::sin(inside))));
  }
}

TEST(Contains, Examples) {
  EXPECT_TRUE(contains(DiscShape{{5, 5}, 2}, {5, 5}));
  EXPECT_FALSE(contains(AnnulusShape{{0, 0}, 1, 2}, {0, 0.5}));
  EXPECT_TRUE(contains(AnnulusShape{{0, 0}, 1, 2}, {0, 1.5}));
  const PolygonShape square{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
  EXPECT_TRUE(contains(square, {0.5, 0.5}));
  EXPECT_FALSE(contains(square, {1.5, 0.5}));
}

TEST(Contains, RasterMaskBottomRowFirst) {
  RasterMaskShape m;
  m.origin = {1, 1};
  m.cell_size = 0.5;
  m.rows = 2;
  m.cols = 2;
  m.cells = {1, 0, 0, 1};  // bottom-left and top-right
  EXPECT_TRUE(contains(m, {1.2, 1.2}));
  EXPECT_FALSE(contains(m, {1.7, 1.2}));
  EXPECT_TRUE(contains(m, {1.7, 1.7}));
  EXPECT_FALSE(contains(m, {0.9, 1.2}));
}

TEST(Validate, RejectsBadShapes) {
  const RegionOfInterest roi{0, 15, 0, 15};
  EXPECT_THROW(validate(AnnulusShape{{7, 7}, 3, 2}, roi), std::invalid_argument);
  EXPECT_THROW(validate(DiscShape{{14, 7}, 2}, roi), std::invalid_argument);
  const PolygonShape bowtie{{{1, 1}, {3, 3}, {3, 1}, {1, 3}}};
  EXPECT_THROW(validate(bowtie, roi), std::invalid_argument);
  EXPECT_NO_THROW(validate(PolygonShape{{{1, 1}, {3, 1}, {2, 3}}}, roi));
}

TEST(Validate, SceneInvariants) {
  Scene s = testing::reference_scene(4, 4, 1);
  EXPECT_NO_THROW(s.validate());
  s.beta0_sq = 0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = testing::reference_scene(4, 4, 0);
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = testing::reference_scene(4, 4, 1);
  s.fovs.push_back({0, 0.0, 2 * kPi});
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(WrapPi, Range) {
  for (double a = -20; a < 20; a += 0.37) {
    const double w = wrap_pi(a);
    EXPECT_GT(w, -kPi);
    EXPECT_LE(w, kPi);
    EXPECT_NEAR(std::remainder(w - a, 2 * kPi), 0.0, 1e-12);
  }
}

}  // namespace
}  // namespace netimg
