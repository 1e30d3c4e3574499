#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "surfdist/geometry.hpp"

namespace surfdist {

struct BarycentricCoord {
  double u = 1.0;
  double v = 0.0;
  double w = 0.0;

  bool valid(double tolerance = 1e-12) const;
  friend constexpr bool operator==(const BarycentricCoord&, const BarycentricCoord&) = default;
};

// Cubic Bezier triangle. Control points b_ijk (i + j + k = 3) are stored as
//   b300 b030 b003 b210 b201 b120 b021 b102 b012 b111
// so that u weights the first corner, v the second, w the third.
struct BezierTriangle {
  static constexpr std::size_t kControlCount = 10;
  static constexpr std::array<std::array<int, 3>, kControlCount> kIndices{{
      {3, 0, 0}, {0, 3, 0}, {0, 0, 3}, {2, 1, 0}, {2, 0, 1},
      {1, 2, 0}, {0, 2, 1}, {1, 0, 2}, {0, 1, 2}, {1, 1, 1},
  }};

  std::array<Vec3, kControlCount> b;

  // Slot of b_ijk in `b`.
  static constexpr std::size_t slot(int i, int j, int k) {
    for (std::size_t s = 0; s < kControlCount; ++s)
      if (kIndices[s][0] == i && kIndices[s][1] == j && kIndices[s][2] == k) return s;
    return kControlCount;
  }
};

// Bernstein weights 3!/(i!j!k!) u^i v^j w^k in control-slot order. They sum to one.
std::array<double, BezierTriangle::kControlCount> bernstein_weights(const BarycentricCoord& bc);

Vec3 evaluate(const BezierTriangle& patch, const BarycentricCoord& bc);

// Polar form of the patch: the symmetric multi-affine map whose diagonal is
// evaluate(). Child control points of any sub-triangle are blossom values.
Vec3 blossom(const BezierTriangle& patch, const BarycentricCoord& t1, const BarycentricCoord& t2,
             const BarycentricCoord& t3);

// Corners, in parent barycentric coordinates, of the four children produced by
// subdivide(): three corner children and the inverted middle one. Every child
// keeps the parent's orientation.
std::array<std::array<BarycentricCoord, 3>, 4> subdivision_corners();

// Midpoint 1-to-4 split. Child c at coordinate bc traces the parent at
// bc.u * corners[c][0] + bc.v * corners[c][1] + bc.w * corners[c][2].
std::array<BezierTriangle, 4> subdivide(const BezierTriangle& patch);

// Integer grid coordinate (i, j, k) with i + j + k = m.
struct GridIndex {
  int i = 0;
  int j = 0;
  int k = 0;
};

// Grid points of level `level` (m = 2^level) ordered by i ascending, then j
// ascending: (0,0,m), (0,1,m-1), ..., (m,0,0). (m+1)(m+2)/2 entries.
std::vector<GridIndex> barycentric_grid(int level);

inline BarycentricCoord grid_coord(const GridIndex& g, int m) {
  return {static_cast<double>(g.i) / m, static_cast<double>(g.j) / m, static_cast<double>(g.k) / m};
}

struct PatchSample {
  BarycentricCoord bc;
  Vec3 point;
};

std::vector<PatchSample> sample_grid(const BezierTriangle& patch, int level);

// Bezier triangle reproducing the flat triangle (a, b, c) exactly.
BezierTriangle flat_patch(const Vec3& a, const Vec3& b, const Vec3& c);

}  // namespace surfdist
