#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "surfdist/errors.hpp"
#include "surfdist/fitting.hpp"
#include "surfdist/matching.hpp"

using namespace surfdist;

namespace {

std::shared_ptr<const Lattice> lattice(int v) { return make_lattice({default_lattice_kind(v), v, {1, 1, 1}}); }

std::size_t count(const LabelVolume& v) {
  std::size_t n = 0;
  for (auto l : v.labels) n += l != 0;
  return n;
}

}  // namespace

TEST(SphereMask, RadiusOneIsPlusSign) {
  const auto m = sphere_mask(1);
  EXPECT_EQ(m.grid.nz, 3u);
  EXPECT_EQ(count(m), 7u);
  EXPECT_EQ(m.at({1, 1, 1}), 1u);
  EXPECT_EQ(m.at({0, 1, 1}), 1u);
  EXPECT_EQ(m.at({0, 0, 1}), 0u);
}

TEST(SphereMask, SymmetricUnderAxisPermutationsAndReflections) {
  const auto m = sphere_mask(2);
  const long n = 5;
  for (long z = 0; z < n; ++z)
    for (long y = 0; y < n; ++y)
      for (long x = 0; x < n; ++x) {
        const auto l = m.at({z, y, x});
        EXPECT_EQ(l, m.at({x, y, z}));
        EXPECT_EQ(l, m.at({y, z, x}));
        EXPECT_EQ(l, m.at({n - 1 - z, y, x}));
        EXPECT_EQ(l, m.at({z, n - 1 - y, n - 1 - x}));
      }
}

TEST(SphereMask, CenterAlwaysSet) {
  for (int r = 1; r <= 6; ++r) EXPECT_EQ(sphere_mask(r).at({r, r, r}), 1u);
  EXPECT_THROW(sphere_mask(0), InvalidArgument);
}

TEST(StarDistBaseline, SmallSphereManyRays) {
  const auto report = reconstruct_sphere_stardist(4, 96);
  EXPECT_GE(report.iou, 0.85);
  EXPECT_EQ(report.params, 96u);
}

// Only the 6-ray octahedron is monotone: the 12-ray ball samples dip at r = 8
// where the oblique icosahedral rays leave the discrete ball early.
TEST(StarDistBaseline, IouNonIncreasingInRadiusForSixRays) {
  double prev = 2.0;
  for (int r : {4, 8, 16, 32}) {
    const double iou = reconstruct_sphere_stardist(r, 6).iou;
    EXPECT_LE(iou, prev) << r;
    prev = iou;
  }
}

TEST(SurfDistReconstruction, BeatsStarDistAtEqualRays) {
  for (int r : {8, 16, 32})
    for (int v : {6, 12})
      EXPECT_LE(reconstruct_sphere_surfdist(r, v).rms_radial_error, reconstruct_sphere_stardist(r, v).rms_radial_error)
          << r << "," << v;
}

TEST(SurfDistReconstruction, ScalarsBulgePastRadius) {
  for (int r : {8, 16, 32})
    for (int v : {6, 12}) {
      const auto rep = reconstruct_sphere_surfdist(r, v);
      EXPECT_TRUE(rep.converged);
      EXPECT_GT(rep.edge_scalar, r);
      EXPECT_GT(rep.face_scalar, r);
      EXPECT_EQ(rep.params, static_cast<std::size_t>(9 * v - 16));
    }
}

TEST(SurfDistReconstruction, FreeScalarsDoNoWorse) {
  SphereFitOptions shared, free;
  free.share_scalars = false;
  const auto a = reconstruct_sphere_surfdist(16, 6, shared);
  const auto b = reconstruct_sphere_surfdist(16, 6, free);
  EXPECT_LE(b.rms_radial_error, a.rms_radial_error + 1e-9);
}

TEST(SurfDistReconstruction, RejectsTooFewRays) {
  EXPECT_THROW(reconstruct_sphere_surfdist(8, 3), InvalidArgument);
  EXPECT_THROW(reconstruct_sphere_stardist(8, 3), InvalidArgument);
}

TEST(FitMask, RecoversVoxelizedShape) {
  std::mt19937_64 rng(41);
  const auto lat = lattice(6);
  const Grid g{41, 41, 41, {1, 1, 1}};
  const Vec3 c = g.world({20, 20, 20});
  std::vector<double> truth(lat->parameter_count());
  for (auto& x : truth) x = oracle::uniform(rng, 11.0, 15.0);
  const InstanceShape target(lat, c, truth);
  const auto vol = voxelize(target, g, 3);
  const auto fitted = fit_mask(InstanceShape::uniform(lat, c, 13.0), vol, 1);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    num += (fitted.distances[k] - truth[k]) * (fitted.distances[k] - truth[k]);
    den += truth[k] * truth[k];
  }
  EXPECT_LT(std::sqrt(num / den), 0.05);
  EXPECT_GE(pair_iou(voxelize(fitted, g, 3), vol), 0.9);
}

TEST(FitMask, RecoversVoxelizedSurface) {
  // Samples of the fitted surface stay within 5% of the target surface radially.
  std::mt19937_64 rng(41);
  const auto lat = lattice(6);
  const Grid g{41, 41, 41, {1, 1, 1}};
  const Vec3 c = g.world({20, 20, 20});
  std::vector<double> truth(lat->parameter_count());
  for (auto& x : truth) x = oracle::uniform(rng, 11.0, 15.0);
  const InstanceShape target(lat, c, truth);
  const auto fitted = fit_mask(InstanceShape::uniform(lat, c, 13.0), voxelize(target, g, 3), 1);
  const auto want = surface_samples(target, 3), got = surface_samples(fitted, 3);
  double num = 0.0, den = 0.0;
  for (std::size_t s = 0; s < want.size(); ++s) {
    const double a = norm(want.points[s] - c), b = norm(got.points[s] - c);
    num += (a - b) * (a - b);
    den += a * a;
  }
  EXPECT_LT(std::sqrt(num / den), 0.05);
}

TEST(FitMask, SphereFromUnitInit) {
  const auto ball = sphere_mask(8);
  const auto lat = lattice(12);
  const auto fitted = fit_mask(InstanceShape::uniform(lat, ball.grid.world({8, 8, 8}), 1.0), ball, 1);
  for (double d : fitted.distances) EXPECT_GE(d, 0.0);
  EXPECT_GE(pair_iou(voxelize(fitted, ball.grid, 3), ball), 0.9);
}

TEST(FitMask, ProjectsToNonNegative) {
  // A thin slab forces some rays to tiny distances.
  LabelVolume slab(Grid{3, 21, 21, {1, 1, 1}});
  for (long y = 0; y < 21; ++y)
    for (long x = 0; x < 21; ++x) slab.at({1, y, x}) = 4;
  MaskFitOptions opts;
  opts.iterations = 100;
  const auto fitted = fit_mask(InstanceShape::uniform(lattice(12), slab.grid.world({1, 10, 10}), 3.0), slab, 4, opts);
  for (double d : fitted.distances) EXPECT_GE(d, 0.0);
}

TEST(FitMask, CenterOutsideInstance) {
  const auto ball = sphere_mask(3);
  EXPECT_THROW(fit_mask(InstanceShape::uniform(lattice(6), ball.grid.world({0, 0, 0}), 1.0), ball, 1), InvalidArgument);
  EXPECT_THROW(fit_mask(InstanceShape::uniform(lattice(6), ball.grid.world({3, 3, 3}), 1.0), ball, 2), InvalidArgument);
}

TEST(FitMask, Deterministic) {
  const auto ball = sphere_mask(5);
  MaskFitOptions opts;
  opts.iterations = 40;
  const auto init = InstanceShape::uniform(lattice(6), ball.grid.world({5, 5, 5}), 2.0);
  EXPECT_EQ(fit_mask(init, ball, 1, opts).distances, fit_mask(init, ball, 1, opts).distances);
}

TEST(Sweep, CrossProductAndCsv) {
  const auto reports = sweep({4, 8}, {6, 12}, {ModelKind::surfdist, ModelKind::stardist});
  ASSERT_EQ(reports.size(), 8u);
  EXPECT_EQ(reports[0].radius, 4);
  EXPECT_EQ(reports[0].kind, ModelKind::surfdist);
  EXPECT_EQ(reports[1].rays, 12);
  EXPECT_EQ(reports[2].kind, ModelKind::stardist);
  EXPECT_EQ(reports[4].radius, 8);

  std::ostringstream a, b;
  write_sweep_csv(a, reports);
  write_sweep_csv(b, sweep({4, 8}, {6, 12}, {ModelKind::surfdist, ModelKind::stardist}));
  EXPECT_EQ(a.str(), b.str());
  const std::string csv = a.str();
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 9);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "radius,kind,rays,params,iou,rms_radial_error,converged");
  EXPECT_EQ(csv.find('\r'), std::string::npos);
}

TEST(Sweep, ValidatesBeforeRunning) {
  EXPECT_THROW(sweep({4}, {3}, {ModelKind::surfdist}), InvalidArgument);
  EXPECT_THROW(sweep({0}, {6}, {ModelKind::surfdist}), InvalidArgument);
}

TEST(ModelKind, ParseRoundTrip) {
  EXPECT_EQ(parse_model_kind("surfdist"), ModelKind::surfdist);
  EXPECT_EQ(parse_model_kind(to_string(ModelKind::stardist)), ModelKind::stardist);
  EXPECT_THROW(parse_model_kind("voxel"), InvalidArgument);
}
