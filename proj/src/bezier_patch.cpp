#include "surfdist/bezier_patch.hpp"

#include <cmath>

#include "surfdist/errors.hpp"

namespace surfdist {

bool BarycentricCoord::valid(double tolerance) const {
  return u >= -tolerance && v >= -tolerance && w >= -tolerance && u <= 1.0 + tolerance && v <= 1.0 + tolerance &&
         w <= 1.0 + tolerance && std::abs(u + v + w - 1.0) <= tolerance;
}

std::array<double, BezierTriangle::kControlCount> bernstein_weights(const BarycentricCoord& bc) {
  const double u = bc.u, v = bc.v, w = bc.w;
  return {
      u * u * u,       v * v * v,       w * w * w,       3.0 * u * u * v, 3.0 * u * u * w,
      3.0 * u * v * v, 3.0 * v * v * w, 3.0 * u * w * w, 3.0 * v * w * w, 6.0 * u * v * w,
  };
}

Vec3 evaluate(const BezierTriangle& patch, const BarycentricCoord& bc) {
  const auto weights = bernstein_weights(bc);
  Vec3 p;
  for (std::size_t s = 0; s < BezierTriangle::kControlCount; ++s) p += weights[s] * patch.b[s];
  return p;
}

Vec3 blossom(const BezierTriangle& patch, const BarycentricCoord& t1, const BarycentricCoord& t2,
             const BarycentricCoord& t3) {
  // net[i][j] holds b_{i,j,n-i-j} of the current degree n.
  std::array<std::array<Vec3, 4>, 4> net{};
  for (std::size_t s = 0; s < BezierTriangle::kControlCount; ++s) {
    const auto& idx = BezierTriangle::kIndices[s];
    net[idx[0]][idx[1]] = patch.b[s];
  }
  const std::array<const BarycentricCoord*, 3> params{&t1, &t2, &t3};
  for (int n = 3; n > 0; --n) {
    const BarycentricCoord& t = *params[3 - n];
    std::array<std::array<Vec3, 4>, 4> next{};
    for (int i = 0; i < n; ++i)
      for (int j = 0; i + j < n; ++j) next[i][j] = t.u * net[i + 1][j] + t.v * net[i][j + 1] + t.w * net[i][j];
    net = next;
  }
  return net[0][0];
}

std::array<std::array<BarycentricCoord, 3>, 4> subdivision_corners() {
  const BarycentricCoord a{1.0, 0.0, 0.0}, b{0.0, 1.0, 0.0}, c{0.0, 0.0, 1.0};
  const BarycentricCoord ab{0.5, 0.5, 0.0}, bc{0.0, 0.5, 0.5}, ca{0.5, 0.0, 0.5};
  return {{{a, ab, ca}, {ab, b, bc}, {ca, bc, c}, {bc, ca, ab}}};
}

std::array<BezierTriangle, 4> subdivide(const BezierTriangle& patch) {
  const auto corners = subdivision_corners();
  std::array<BezierTriangle, 4> children;
  for (std::size_t c = 0; c < 4; ++c) {
    const auto& q = corners[c];
    for (std::size_t s = 0; s < BezierTriangle::kControlCount; ++s) {
      const auto& idx = BezierTriangle::kIndices[s];
      std::array<const BarycentricCoord*, 3> args{};
      std::size_t n = 0;
      for (int r = 0; r < idx[0]; ++r) args[n++] = &q[0];
      for (int r = 0; r < idx[1]; ++r) args[n++] = &q[1];
      for (int r = 0; r < idx[2]; ++r) args[n++] = &q[2];
      children[c].b[s] = blossom(patch, *args[0], *args[1], *args[2]);
    }
  }
  return children;
}

std::vector<GridIndex> barycentric_grid(int level) {
  if (level < 0) throw InvalidArgument("sampling level must be nonnegative");
  if (level > 12) throw InvalidArgument("sampling level too large");
  const int m = 1 << level;
  std::vector<GridIndex> grid;
  grid.reserve(static_cast<std::size_t>((m + 1) * (m + 2) / 2));
  for (int i = 0; i <= m; ++i)
    for (int j = 0; i + j <= m; ++j) grid.push_back({i, j, m - i - j});
  return grid;
}

std::vector<PatchSample> sample_grid(const BezierTriangle& patch, int level) {
  const int m = 1 << level;
  const auto grid = barycentric_grid(level);
  std::vector<PatchSample> out;
  out.reserve(grid.size());
  for (const auto& g : grid) {
    const auto bc = grid_coord(g, m);
    out.push_back({bc, evaluate(patch, bc)});
  }
  return out;
}

BezierTriangle flat_patch(const Vec3& a, const Vec3& b, const Vec3& c) {
  BezierTriangle patch;
  for (std::size_t s = 0; s < BezierTriangle::kControlCount; ++s) {
    const auto& idx = BezierTriangle::kIndices[s];
    patch.b[s] = (idx[0] * a + idx[1] * b + idx[2] * c) / 3.0;
  }
  return patch;
}

}  // namespace surfdist
