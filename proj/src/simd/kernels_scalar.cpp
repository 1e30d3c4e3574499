#include <cmath>

#include "surfdist/simd/kernels.hpp"

namespace surfdist::simd {

void TriangleBatch::add(const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  v0x.push_back(a.x);
  v0y.push_back(a.y);
  v0z.push_back(a.z);
  e1x.push_back(e1.x);
  e1y.push_back(e1.y);
  e1z.push_back(e1.z);
  e2x.push_back(e2.x);
  e2y.push_back(e2.y);
  e2z.push_back(e2.z);
  ++count;
}

void TriangleBatch::pad() {
  const std::size_t padded = (count + kLanes - 1) / kLanes * kLanes;
  for (auto* v : {&v0x, &v0y, &v0z, &e1x, &e1y, &e1z, &e2x, &e2y, &e2z}) v->resize(padded, 0.0);
}

double farthest_hit_scalar(const TriangleBatch& tris, const Vec3& origin, const Vec3& dir) {
  const double dx = dir.x, dy = dir.y, dz = dir.z;
  const double tol_lo = -kEdgeTolerance;
  const double tol_hi = 1.0 + kEdgeTolerance;
  double best = 0.0;
  const std::size_t n = tris.padded_size();
  for (std::size_t i = 0; i < n; ++i) {
    const double e1x = tris.e1x[i], e1y = tris.e1y[i], e1z = tris.e1z[i];
    const double e2x = tris.e2x[i], e2y = tris.e2y[i], e2z = tris.e2z[i];
    const double px = dy * e2z - dz * e2y;
    const double py = dz * e2x - dx * e2z;
    const double pz = dx * e2y - dy * e2x;
    const double det = e1x * px + e1y * py + e1z * pz;
    if (!(std::abs(det) > kDeterminantEpsilon)) continue;
    const double inv = 1.0 / det;
    const double tx = origin.x - tris.v0x[i];
    const double ty = origin.y - tris.v0y[i];
    const double tz = origin.z - tris.v0z[i];
    const double u = (tx * px + ty * py + tz * pz) * inv;
    const double qx = ty * e1z - tz * e1y;
    const double qy = tz * e1x - tx * e1z;
    const double qz = tx * e1y - ty * e1x;
    const double v = (dx * qx + dy * qy + dz * qz) * inv;
    const double t = (e2x * qx + e2y * qy + e2z * qz) * inv;
    if (u >= tol_lo && v >= tol_lo && u + v <= tol_hi && t >= 0.0 && t > best) best = t;
  }
  return best;
}

std::size_t count_overlap_scalar(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  const std::size_t n = std::min(a.size(), b.size());
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) count += (a[i] != 0 && b[i] != 0) ? 1 : 0;
  return count;
}

}  // namespace surfdist::simd
