#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "surfdist/bezier_patch.hpp"
#include "surfdist/errors.hpp"

using namespace surfdist;

namespace {

BarycentricCoord random_bc(std::mt19937_64& rng) {
  double a = oracle::uniform(rng, 0, 1), b = oracle::uniform(rng, 0, 1);
  if (a + b > 1.0) {
    a = 1.0 - a;
    b = 1.0 - b;
  }
  return {a, b, 1.0 - a - b};
}

BezierTriangle random_patch(std::mt19937_64& rng) {
  BezierTriangle p;
  for (auto& q : p.b) q = {oracle::uniform(rng, -5, 5), oracle::uniform(rng, -5, 5), oracle::uniform(rng, -5, 5)};
  return p;
}

// Direct multinomial expansion, independent of the library's weight table.
Vec3 expand(const BezierTriangle& p, const BarycentricCoord& bc) {
  const int fact[4] = {1, 1, 2, 6};
  Vec3 out;
  for (std::size_t s = 0; s < BezierTriangle::kControlCount; ++s) {
    const auto [i, j, k] = BezierTriangle::kIndices[s];
    const double c = 6.0 / (fact[i] * fact[j] * fact[k]);
    out += (c * std::pow(bc.u, i) * std::pow(bc.v, j) * std::pow(bc.w, k)) * p.b[s];
  }
  return out;
}

}  // namespace

TEST(Bezier, CornerInterpolation) {
  std::mt19937_64 rng(1);
  const auto p = random_patch(rng);
  EXPECT_EQ(norm(evaluate(p, {1, 0, 0}) - p.b[BezierTriangle::slot(3, 0, 0)]), 0.0);
  EXPECT_EQ(norm(evaluate(p, {0, 1, 0}) - p.b[BezierTriangle::slot(0, 3, 0)]), 0.0);
  EXPECT_EQ(norm(evaluate(p, {0, 0, 1}) - p.b[BezierTriangle::slot(0, 0, 3)]), 0.0);
}

TEST(Bezier, MatchesMultinomialExpansion) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 1000; ++t) {
    const auto p = random_patch(rng);
    const auto bc = random_bc(rng);
    EXPECT_LT(norm(evaluate(p, bc) - expand(p, bc)), 1e-9);
  }
}

TEST(Bezier, PartitionOfUnity) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 1000; ++t) {
    const auto bc = random_bc(rng);
    const auto w = bernstein_weights(bc);
    double sum = 0.0;
    for (double x : w) {
      EXPECT_GE(x, 0.0);
      sum += x;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    const Vec3 q{oracle::uniform(rng, -3, 3), 2.0, -1.5};
    BezierTriangle p;
    p.b.fill(q);
    EXPECT_LT(norm(evaluate(p, bc) - q), 1e-9);
  }
}

TEST(Bezier, LinearPrecision) {
  std::mt19937_64 rng(4);
  const Vec3 a{1, 2, 3}, b{-4, 0.5, 2}, c{0, -3, 7};
  const auto p = flat_patch(a, b, c);
  for (std::size_t s = 0; s < BezierTriangle::kControlCount; ++s) {
    const auto [i, j, k] = BezierTriangle::kIndices[s];
    EXPECT_LT(norm(p.b[s] - (i / 3.0 * a + j / 3.0 * b + k / 3.0 * c)), 1e-12);
  }
  for (int t = 0; t < 50; ++t) {
    const auto bc = random_bc(rng);
    EXPECT_LT(norm(evaluate(p, bc) - (bc.u * a + bc.v * b + bc.w * c)), 1e-12);
  }
}

TEST(Bezier, AffineInvariance) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 1000; ++t) {
    double m[3][3];
    for (auto& row : m)
      for (auto& x : row) x = oracle::uniform(rng, -2, 2);
    const Vec3 shift{oracle::uniform(rng, -4, 4), oracle::uniform(rng, -4, 4), oracle::uniform(rng, -4, 4)};
    auto map = [&](const Vec3& v) {
      return Vec3{m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z, m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
                  m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z} +
             shift;
    };
    const auto p = random_patch(rng);
    auto q = p;
    for (auto& x : q.b) x = map(x);
    const auto bc = random_bc(rng);
    EXPECT_LT(norm(evaluate(q, bc) - map(evaluate(p, bc))), 1e-9);
  }
}

TEST(Bezier, BlossomDiagonalIsEvaluation) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 100; ++t) {
    const auto p = random_patch(rng);
    const auto bc = random_bc(rng);
    EXPECT_LT(norm(blossom(p, bc, bc, bc) - evaluate(p, bc)), 1e-9);
    // Symmetric in its arguments.
    const auto b2 = random_bc(rng), b3 = random_bc(rng);
    EXPECT_LT(norm(blossom(p, bc, b2, b3) - blossom(p, b3, bc, b2)), 1e-9);
  }
}

TEST(Subdivision, ChildCornerAtEdgeMidpoint) {
  std::mt19937_64 rng(7);
  const auto p = random_patch(rng);
  const auto kids = subdivide(p);
  // Child 0 has corners (A, mid AB, mid CA).
  EXPECT_LT(norm(kids[0].b[BezierTriangle::slot(0, 3, 0)] - evaluate(p, {0.5, 0.5, 0})), 1e-12);
  EXPECT_LT(norm(kids[0].b[BezierTriangle::slot(0, 0, 3)] - evaluate(p, {0.5, 0, 0.5})), 1e-12);
  EXPECT_LT(norm(kids[1].b[BezierTriangle::slot(0, 0, 3)] - evaluate(p, {0, 0.5, 0.5})), 1e-12);
}

TEST(Subdivision, ChildPointsLieOnParent) {
  std::mt19937_64 rng(8);
  const auto p = random_patch(rng);
  const auto kids = subdivide(p);
  const auto corners = subdivision_corners();
  for (std::size_t c = 0; c < 4; ++c)
    for (int t = 0; t < 200; ++t) {
      const auto bc = random_bc(rng);
      const auto& k = corners[c];
      const BarycentricCoord parent{bc.u * k[0].u + bc.v * k[1].u + bc.w * k[2].u,
                                    bc.u * k[0].v + bc.v * k[1].v + bc.w * k[2].v,
                                    bc.u * k[0].w + bc.v * k[1].w + bc.w * k[2].w};
      EXPECT_LT(norm(evaluate(kids[c], bc) - evaluate(p, parent)), 1e-9);
    }
}

TEST(Subdivision, FlatPatchStaysFlat) {
  const Vec3 a{0, 0, 1}, b{2, 0, 1}, c{0, 3, 1};
  for (const auto& kid : subdivide(flat_patch(a, b, c)))
    for (const auto& q : kid.b) EXPECT_NEAR(q.z, 1.0, 1e-12);
  const Vec3 n = normalized(cross(b - a, c - a));
  for (const auto& kid : subdivide(flat_patch(a, b, c))) {
    // Children keep the parent orientation.
    const Vec3 kn = cross(kid.b[1] - kid.b[0], kid.b[2] - kid.b[0]);
    EXPECT_GT(dot(kn, n), 0.0);
  }
}

TEST(Subdivision, RecursiveCornersMatchGridSamples) {
  std::mt19937_64 rng(9);
  const auto p = random_patch(rng);
  std::vector<Vec3> corners;
  for (const auto& k1 : subdivide(p))
    for (const auto& k2 : subdivide(k1))
      for (std::size_t s = 0; s < 3; ++s) corners.push_back(k2.b[s]);
  for (const auto& s : sample_grid(p, 2)) {
    double best = 1e9;
    for (const auto& c : corners) best = std::min(best, norm(c - s.point));
    EXPECT_LT(best, 1e-9);
  }
}

TEST(Grid, Counts) {
  EXPECT_EQ(barycentric_grid(0).size(), 3u);
  EXPECT_EQ(barycentric_grid(2).size(), 15u);
  for (int l = 0; l <= 6; ++l) {
    const std::size_t m = std::size_t{1} << l;
    EXPECT_EQ(barycentric_grid(l).size(), (m + 1) * (m + 2) / 2);
  }
  EXPECT_THROW(barycentric_grid(-1), InvalidArgument);
}

TEST(Grid, OrderingAndCoordinates) {
  const auto g = barycentric_grid(2);
  for (std::size_t n = 0; n < g.size(); ++n) {
    EXPECT_EQ(g[n].i + g[n].j + g[n].k, 4);
    if (n > 0) {
      EXPECT_TRUE(g[n - 1].i < g[n].i || (g[n - 1].i == g[n].i && g[n - 1].j < g[n].j));
    }
  }
  EXPECT_EQ(g.front().k, 4);
  EXPECT_EQ(g.back().i, 4);
  EXPECT_TRUE(grid_coord(g[7], 4).valid());
}

TEST(Grid, CornerSamplesAreCornerControlPoints) {
  std::mt19937_64 rng(10);
  const auto p = random_patch(rng);
  for (const auto& s : sample_grid(p, 3)) {
    if (s.bc.u == 1.0) {
      EXPECT_EQ(norm(s.point - p.b[0]), 0.0);
    }
    if (s.bc.v == 1.0) {
      EXPECT_EQ(norm(s.point - p.b[1]), 0.0);
    }
    if (s.bc.w == 1.0) {
      EXPECT_EQ(norm(s.point - p.b[2]), 0.0);
    }
  }
}

TEST(Barycentric, Validity) {
  EXPECT_TRUE((BarycentricCoord{0.2, 0.3, 0.5}).valid());
  EXPECT_FALSE((BarycentricCoord{0.6, 0.6, -0.2}).valid());
  EXPECT_FALSE((BarycentricCoord{0.5, 0.5, 0.5}).valid());
}
