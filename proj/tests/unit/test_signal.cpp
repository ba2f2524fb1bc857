#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "netimg/signal.hpp"

namespace netimg {
namespace {

TEST(Pilot, OrthogonalSmall) {
  const Pilot p = make_pilot(PilotKind::orthogonal, 2, 2, 1.0);
  const CMat g = p.x * p.x.adjoint();
  EXPECT_NEAR(std::abs(g(0, 1)), 0.0, 1e-12);
  EXPECT_NEAR(g(0, 0).real(), 2.0, 1e-12);
  EXPECT_NEAR(g(1, 1).real(), 2.0, 1e-12);
}

TEST(Pilot, OrthogonalTenDbm) {
  const double watts = dbm_to_watts(10.0);
  EXPECT_NEAR(watts, 0.01, 1e-15);
  const Pilot p = make_pilot(PilotKind::orthogonal, 16, 16, watts);
  EXPECT_LT((p.x * p.x.adjoint() - CMat::Identity(16, 16) * (16 * 0.01)).norm(), 1e-12);
}

TEST(Pilot, RandomSphereRowNorms) {
  const Pilot p = make_pilot(PilotKind::random_sphere, 8, 12, 0.5, 42);
  for (int i = 0; i < 8; ++i) EXPECT_NEAR(p.x.row(i).squaredNorm(), 12 * 0.5, 1e-10);
  const Pilot again = make_pilot(PilotKind::random_sphere, 8, 12, 0.5, 42);
  EXPECT_EQ((p.x - again.x).norm(), 0.0);
}

TEST(Pilot, OrthogonalNeedsLongEnoughBlock) {
  EXPECT_THROW(make_pilot(PilotKind::orthogonal, 8, 4, 1.0), std::invalid_argument);
}

TEST(ArrayResponse, ColumnMatchesKroneckerDefinition) {
  const Pilot p = make_pilot(PilotKind::random_sphere, 3, 5, 1.0, 7);
  const Vec2 tx(-3, 7.5), rx(18, 7.5), pt(4.0, 9.0);
  const ArrayResponse resp(tx, rx, 4, p);
  const CVec v = resp.column(pt);
  const CVec xa = p.x.transpose() * steer_tx(aod(tx, pt), 3);
  const CVec b = steer_rx(aoa(rx, pt), 4);
  ASSERT_EQ(v.size(), 20);
  for (int t = 0; t < 5; ++t) {
    for (int r = 0; r < 4; ++r) EXPECT_LT(std::abs(v[t * 4 + r] - xa[t] * b[r]), 1e-12);
  }
}

TEST(ArrayResponse, JetMatchesFiniteDifferences) {
  const Pilot p = make_pilot(PilotKind::orthogonal, 4, 4, 1.0);
  const ArrayResponse resp({-3, 7.5}, {7.5, -3}, 4, p);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.5, 14.5);
  const double h = 1e-6;
  for (int i = 0; i < 20; ++i) {
    const Vec2 pt(u(rng), u(rng));
    const auto jet = resp.column_jet(pt);
    const CVec fdx = (resp.column(pt + Vec2(h, 0)) - resp.column(pt - Vec2(h, 0))) / (2 * h);
    const CVec fdy = (resp.column(pt + Vec2(0, h)) - resp.column(pt - Vec2(0, h))) / (2 * h);
    EXPECT_LT((jet.dx - fdx).norm(), 1e-6 * std::max(1.0, fdx.norm()));
    EXPECT_LT((jet.dy - fdy).norm(), 1e-6 * std::max(1.0, fdy.norm()));
    EXPECT_LT((jet.v - resp.column(pt)).norm(), 1e-14);
  }
}

Scene disc_scene(int receivers = 1) {
  Scene s = testing::reference_scene(4, 4, receivers);
  s.targets.push_back(DiscShape{{7.5, 7.5}, 2.0});
  return s;
}

TEST(Cloud, UniformWeightsAndInsideTargets) {
  const Scene s = disc_scene();
  const auto cloud = sample_cloud(s, 50.0, 1);
  ASSERT_GT(cloud.size(), 100u);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    EXPECT_DOUBLE_EQ(cloud.weights[i], 1.0 / static_cast<double>(cloud.size()));
    EXPECT_TRUE(s.in_targets(cloud.points[i]));
  }
}

TEST(Cloud, BlindSectorHidesWholeDisc) {
  Scene s = disc_scene();
  s.fovs.push_back({0, kPi, kPi / 2});  // rx at (18, 7.5) looking west
  const auto cloud = sample_cloud(s, 30.0, 2);
  for (auto v : cloud.visible[0]) EXPECT_EQ(v, 0);
}

TEST(Cloud, EqualAreaTargetsWithinBinomialBounds) {
  Scene s = testing::reference_scene(4, 4, 1);
  s.targets.push_back(DiscShape{{4, 7.5}, 1.5});
  s.targets.push_back(DiscShape{{11, 7.5}, 1.5});
  const auto cloud = sample_cloud(s, 40.0, 3);
  const double n = static_cast<double>(cloud.size());
  double left = 0;
  for (const auto& p : cloud.points) left += p.x() < 7.5 ? 1 : 0;
  EXPECT_LT(std::abs(left - n / 2), 3 * std::sqrt(n / 4));
}

TEST(Cloud, EmptyRegionThrows) {
  Scene s = testing::reference_scene(4, 4, 1);
  EXPECT_THROW(sample_cloud(s, 10.0, 1), std::invalid_argument);
}

TEST(TrueCovariance, NoiseOnlyWhenNothingVisible) {
  Scene s = disc_scene();
  s.fovs.push_back({0, kPi, kPi / 2});
  const auto cloud = sample_cloud(s, 10.0, 4);
  const Pilot p = make_pilot(PilotKind::orthogonal, 4, 4, 0.01);
  const CMat sig = true_covariance(cloud, p, s, 0, NoiseModel{0.3});
  EXPECT_LT((sig - CMat::Identity(16, 16) * 0.3).norm(), 1e-15);
}

TEST(TrueCovariance, SinglePointRankOnePlusIdentity) {
  Scene s = disc_scene();
  ScattererCloud cloud;
  const Vec2 pt(7.5, 8.0);
  cloud.points = {pt};
  cloud.weights = {1.0};
  cloud.visible = {{1}};
  const Pilot p = make_pilot(PilotKind::orthogonal, 4, 4, 0.01);
  const ArrayResponse resp(s, 0, p);
  const double gb = path_loss(s.tx.position, s.rxs[0].position, pt, s.beta0_sq);
  const CVec v = resp.column(pt);
  const CMat expected = CMat::Identity(16, 16) * 2.0 + gb * v * v.adjoint();
  EXPECT_LT(testing::rel_err(true_covariance(cloud, p, s, 0, NoiseModel{2.0}), expected), 1e-14);
}

TEST(TrueCovariance, TraceIdentity) {
  Scene s = disc_scene();
  const auto cloud = sample_cloud(s, 20.0, 5);
  const Pilot p = make_pilot(PilotKind::random_sphere, 4, 6, 0.01, 5);
  const ArrayResponse resp(s, 0, p);
  double expected = 1e-12 * 6 * 4;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    expected += cloud.weights[i] * path_loss(s.tx.position, s.rxs[0].position, cloud.points[i], s.beta0_sq) *
                resp.column(cloud.points[i]).squaredNorm();
  }
  const CMat sig = true_covariance(cloud, p, s, 0, NoiseModel{1e-12});
  EXPECT_NEAR(sig.trace().real(), expected, 1e-10 * expected);
  EXPECT_LT((sig - sig.adjoint()).norm(), 1e-14 * sig.norm());
}

TEST(SampleCovariance, NoNoiseNoTargetsIsZero) {
  Scene s = disc_scene();
  s.fovs.push_back({0, kPi, kPi / 2});
  const auto cloud = sample_cloud(s, 10.0, 6);
  const Pilot p = make_pilot(PilotKind::orthogonal, 4, 4, 0.01);
  const auto sc = simulate_frames(cloud, p, s, 0, NoiseModel{0.0}, 5, 1);
  EXPECT_EQ(sc.matrix.norm(), 0.0);
}

TEST(SampleCovariance, LawOfLargeNumbers) {
  Scene s = testing::reference_scene(2, 2, 1);
  s.beta0_sq = 1e4;  // comparable signal and noise
  s.targets.push_back(DiscShape{{7.5, 7.5}, 1.0});
  const auto cloud = sample_cloud(s, 20.0, 7);
  const Pilot p = make_pilot(PilotKind::orthogonal, 2, 2, 1.0);
  const NoiseModel noise{1.0};
  const CMat truth = true_covariance(cloud, p, s, 0, noise);
  const auto sc = simulate_frames(cloud, p, s, 0, noise, 4096, 11);
  EXPECT_LT(testing::rel_err(sc.matrix, truth), 0.1);
}

TEST(SampleCovariance, DeterministicPerSeed) {
  const Scene s = disc_scene();
  const auto cloud = sample_cloud(s, 10.0, 8);
  const Pilot p = make_pilot(PilotKind::orthogonal, 4, 4, 0.01);
  const auto a = simulate_frames(cloud, p, s, 0, NoiseModel{1e-12}, 10, 99);
  const auto b = simulate_frames(cloud, p, s, 0, NoiseModel{1e-12}, 10, 99);
  const auto c = simulate_frames(cloud, p, s, 0, NoiseModel{1e-12}, 10, 100);
  EXPECT_EQ((a.matrix - b.matrix).norm(), 0.0);
  EXPECT_GT((a.matrix - c.matrix).norm(), 0.0);
  EXPECT_LT((a.matrix - a.matrix.adjoint()).norm(), 1e-14 * a.matrix.norm());
}

TEST(Noise, PsdConversion) {
  EXPECT_NEAR(noise_variance_from_psd(-169, 1e6), std::pow(10.0, -13.9), 1e-27);
  EXPECT_NEAR(noise_variance_from_psd(0, 1), 1e-3, 1e-18);
  EXPECT_NEAR(noise_variance_from_psd(-169, 1), std::pow(10.0, -19.9), 1e-33);
}

}  // namespace
}  // namespace netimg
