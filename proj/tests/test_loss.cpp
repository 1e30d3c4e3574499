#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "surfdist/errors.hpp"
#include "surfdist/loss.hpp"

using namespace surfdist;

namespace {

std::shared_ptr<const Lattice> lattice(int v) { return make_lattice({default_lattice_kind(v), v, {1, 1, 1}}); }

double central(const std::function<double(double)>& f, double x, double h) { return (f(x + h) - f(x - h)) / (2 * h); }

}  // namespace

TEST(ObjectLoss, HandCases) {
  EXPECT_NEAR(object_loss(1.0, 1.0), -std::log(1.0 - kProbabilityEpsilon), 1e-15);
  EXPECT_LT(object_loss(1.0, 1.0), 2e-7);
  EXPECT_NEAR(object_loss(0.0, 0.5), std::log(2.0), 1e-15);
  EXPECT_NEAR(object_loss(0.5, 0.5), std::log(2.0), 1e-15);
  EXPECT_TRUE(std::isfinite(object_loss(1.0, 0.0)));
  EXPECT_TRUE(std::isfinite(object_loss(0.0, 1.0)));
}

TEST(DistanceLoss, HandCases) {
  LossConfig cfg;
  const std::vector<double> same{1.0, 2.0, 3.0};
  EXPECT_EQ(distance_loss(0.7, same, same, cfg), 0.0);

  cfg.lambda_reg = 0.1;
  const std::vector<double> zeros{0.0, 0.0}, two_four{2.0, 4.0};
  EXPECT_NEAR(distance_loss(0.0, zeros, two_four, cfg), 0.3, 1e-12);

  const std::vector<double> d{1.0, 2.0, 3.0}, d_hat{2.0, 2.0, 2.0};
  EXPECT_NEAR(distance_loss(0.5, d, d_hat, cfg), 1.0 / 3.0, 1e-12);
}

TEST(DistanceLoss, RejectsMismatchedLengths) {
  const std::vector<double> a{1.0, 2.0}, b{1.0};
  EXPECT_THROW(distance_loss(0.5, a, b, {}), InvalidArgument);
  EXPECT_THROW(distance_loss(0.5, {}, {}, {}), InvalidArgument);
}

TEST(DistanceLossGradient, ConstantBackgroundVector) {
  LossConfig cfg;
  cfg.lambda_reg = 0.2;
  const std::vector<double> d(4, 0.0), d_hat{1.0, 2.0, 0.5, 3.0};
  for (double g : distance_loss_gradient(0.0, d, d_hat, cfg)) EXPECT_NEAR(g, 0.2 / 4, 1e-15);
}

TEST(DistanceLossGradient, ZeroAtKink) {
  const std::vector<double> d{1.0, 2.0, 3.0};
  for (double g : distance_loss_gradient(0.8, d, d, {})) EXPECT_EQ(g, 0.0);
}

TEST(DistanceLossGradient, MatchesCentralDifferences) {
  std::mt19937_64 rng(31);
  LossConfig cfg;
  for (int trial = 0; trial < 100; ++trial) {
    const double p = trial % 3 == 0 ? 0.0 : oracle::uniform(rng, 0.05, 1.0);
    const std::size_t n = 1 + rng() % 20;
    std::vector<double> d(n), d_hat(n);
    for (std::size_t k = 0; k < n; ++k) {
      d_hat[k] = oracle::uniform(rng, 0.1, 5.0);
      const double gap = oracle::uniform(rng, 0.01, 1.0);
      d[k] = d_hat[k] + (rng() & 1 ? gap : -gap);
    }
    const auto g = distance_loss_gradient(p, d, d_hat, cfg);
    for (std::size_t k = 0; k < n; ++k) {
      auto f = [&](double x) {
        auto q = d_hat;
        q[k] = x;
        return distance_loss(p, d, q, cfg);
      };
      const double num = central(f, d_hat[k], 1e-5);
      EXPECT_LE(std::abs(g[k] - num), 1e-4 * std::max(std::abs(num), 1e-12)) << trial << "," << k;
    }
  }
}

TEST(ObjectLossGradient, MatchesCentralDifferences) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 100; ++trial) {
    const double p = oracle::uniform(rng, 0.0, 1.0), q = oracle::uniform(rng, 0.01, 0.99);
    const double num = central([&](double x) { return object_loss(p, x); }, q, 1e-5);
    EXPECT_LE(std::abs(object_loss_gradient(p, q) - num), 1e-4 * std::max(std::abs(num), 1e-12));
  }
}

TEST(ControlDistanceGradient, MatchesCentralDifferences) {
  std::mt19937_64 rng(33);
  const auto lat = lattice(12);
  LossConfig cfg;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(lat->parameter_count());
    for (auto& v : x) v = oracle::uniform(rng, 1.0, 3.0);
    const InstanceShape shape(lat, {}, x);
    const auto d_hat = sample_distances(shape, cfg.sample_level);
    std::vector<double> d(d_hat.size());
    for (std::size_t s = 0; s < d.size(); ++s) d[s] = d_hat[s] + (rng() & 1 ? 0.3 : -0.3);
    const double p = trial % 2 ? 0.0 : 0.6;
    const auto g = control_distance_gradient(p, d, shape, cfg);
    double worst = 0.0, scale = 0.0;
    for (std::size_t e = 0; e < x.size(); ++e) {
      auto f = [&](double v) {
        auto q = x;
        q[e] = v;
        return distance_loss(p, d, sample_distances(InstanceShape(lat, {}, q), cfg.sample_level), cfg);
      };
      const double num = central(f, x[e], 1e-5);
      worst = std::max(worst, std::abs(num - g[e]));
      scale = std::max(scale, std::abs(num));
    }
    EXPECT_LE(worst, 1e-4 * scale);
  }
}

TEST(VoxelLoss, BackgroundZeroShape) {
  LabelVolume vol(Grid{5, 5, 5, {1, 1, 1}});
  const VoxelIndex v{2, 2, 2};
  const VoxelPrediction pred{kProbabilityEpsilon, InstanceShape::uniform(lattice(6), vol.grid.world(v), 0.0)};
  EXPECT_LT(voxel_loss(0.0, pred, vol, v, {}), 1e-6);
}

TEST(VoxelLoss, LambdaZeroIsObjectLoss) {
  const auto vol = [] {
    LabelVolume v(Grid{7, 7, 7, {1, 1, 1}});
    for (long z = 1; z < 6; ++z)
      for (long y = 1; y < 6; ++y)
        for (long x = 1; x < 6; ++x) v.at({z, y, x}) = 1;
    return v;
  }();
  const VoxelIndex v{3, 3, 3};
  const VoxelPrediction pred{0.37, InstanceShape::uniform(lattice(6), vol.grid.world(v), 1.7)};
  LossConfig cfg;
  cfg.lambda_d = 0.0;
  EXPECT_EQ(voxel_loss(0.8, pred, vol, v, cfg), object_loss(0.8, 0.37));
}

TEST(VoxelLoss, SelfConsistentOctahedron) {
  const double r = 8.0;
  const Grid g{21, 21, 21, {1, 1, 1}};
  const VoxelIndex v{10, 10, 10};
  const auto shape = InstanceShape::uniform(lattice(6), g.world(v), r);
  const auto vol = voxelize(shape, g, 3);
  const auto terms = voxel_loss_terms(1.0, {0.9, shape}, vol, v, {});
  EXPECT_LT(terms.distance, 0.1 * r);
  EXPECT_NEAR(terms.total, terms.object + 0.1 * terms.distance, 1e-15);
}

TEST(VolumeLoss, AggregatesPerVoxelInOrder) {
  std::mt19937_64 rng(34);
  LabelVolume vol(Grid{4, 4, 4, {1, 1, 1}});
  for (long z = 1; z < 3; ++z)
    for (long y = 0; y < 3; ++y)
      for (long x = 1; x < 4; ++x) vol.at({z, y, x}) = 1;
  const auto targets = object_probabilities(vol);
  const auto lat = lattice(6);
  std::vector<VoxelPrediction> preds;
  for (std::size_t i = 0; i < vol.grid.size(); ++i)
    preds.push_back({oracle::uniform(rng, 0.05, 0.95),
                     InstanceShape::uniform(lat, vol.grid.world(vol.grid.index_of(i)), oracle::uniform(rng, 0.0, 2.0))});
  const LossConfig cfg;
  double sum = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i)
    sum += voxel_loss(targets.p[i], preds[i], vol, vol.grid.index_of(i), cfg);
  EXPECT_EQ(volume_loss(preds, vol, targets, cfg), sum / 64.0);
}

TEST(VolumeLoss, IdenticalAndPairCases) {
  LabelVolume vol(Grid{1, 1, 2, {1, 1, 1}});
  const auto lat = lattice(6);
  TargetVolume t{vol.grid, {0.0, 0.0}};
  const LossConfig cfg;
  std::vector<VoxelPrediction> same{{0.3, InstanceShape::uniform(lat, vol.grid.world({0, 0, 0}), 0.5)},
                                    {0.3, InstanceShape::uniform(lat, vol.grid.world({0, 0, 1}), 0.5)}};
  const double a = voxel_loss(0.0, same[0], vol, {0, 0, 0}, cfg);
  EXPECT_EQ(volume_loss(same, vol, t, cfg), a);

  std::vector<VoxelPrediction> pair{same[0], {0.6, InstanceShape::uniform(lat, vol.grid.world({0, 0, 1}), 1.5)}};
  const double b = voxel_loss(0.0, pair[1], vol, {0, 0, 1}, cfg);
  EXPECT_NEAR(volume_loss(pair, vol, t, cfg), (a + b) / 2, 1e-15);
}

TEST(VolumeLoss, RejectsEmptyAndMismatched) {
  LabelVolume vol(Grid{1, 1, 2, {1, 1, 1}});
  TargetVolume t{vol.grid, {0.0, 0.0}};
  EXPECT_THROW(volume_loss({}, vol, t, {}), InvalidArgument);
}

TEST(LossConfig, Validation) {
  LossConfig cfg;
  cfg.lambda_d = -1.0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.sample_level = -1;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
}
