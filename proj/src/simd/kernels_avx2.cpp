// Compiled with -mavx2. Only reached through the runtime dispatcher after a CPU check.
#include <immintrin.h>

#include <bit>

#include "surfdist/simd/kernels.hpp"

namespace surfdist::simd {

double farthest_hit_avx2(const TriangleBatch& tris, const Vec3& origin, const Vec3& dir) {
  const __m256d dx = _mm256_set1_pd(dir.x);
  const __m256d dy = _mm256_set1_pd(dir.y);
  const __m256d dz = _mm256_set1_pd(dir.z);
  const __m256d ox = _mm256_set1_pd(origin.x);
  const __m256d oy = _mm256_set1_pd(origin.y);
  const __m256d oz = _mm256_set1_pd(origin.z);
  const __m256d tol_lo = _mm256_set1_pd(-kEdgeTolerance);
  const __m256d tol_hi = _mm256_set1_pd(1.0 + kEdgeTolerance);
  const __m256d det_eps = _mm256_set1_pd(kDeterminantEpsilon);
  const __m256d sign = _mm256_set1_pd(-0.0);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d zero = _mm256_setzero_pd();
  __m256d best = zero;

  const std::size_t n = tris.padded_size();
  for (std::size_t i = 0; i < n; i += TriangleBatch::kLanes) {
    const __m256d e1x = _mm256_loadu_pd(&tris.e1x[i]);
    const __m256d e1y = _mm256_loadu_pd(&tris.e1y[i]);
    const __m256d e1z = _mm256_loadu_pd(&tris.e1z[i]);
    const __m256d e2x = _mm256_loadu_pd(&tris.e2x[i]);
    const __m256d e2y = _mm256_loadu_pd(&tris.e2y[i]);
    const __m256d e2z = _mm256_loadu_pd(&tris.e2z[i]);

    const __m256d px = _mm256_sub_pd(_mm256_mul_pd(dy, e2z), _mm256_mul_pd(dz, e2y));
    const __m256d py = _mm256_sub_pd(_mm256_mul_pd(dz, e2x), _mm256_mul_pd(dx, e2z));
    const __m256d pz = _mm256_sub_pd(_mm256_mul_pd(dx, e2y), _mm256_mul_pd(dy, e2x));
    const __m256d det =
        _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(e1x, px), _mm256_mul_pd(e1y, py)), _mm256_mul_pd(e1z, pz));
    const __m256d usable = _mm256_cmp_pd(_mm256_andnot_pd(sign, det), det_eps, _CMP_GT_OQ);
    if (_mm256_movemask_pd(usable) == 0) continue;
    // Lanes with a tiny determinant divide by 1 instead and are masked out below.
    const __m256d inv = _mm256_div_pd(one, _mm256_blendv_pd(one, det, usable));

    const __m256d tx = _mm256_sub_pd(ox, _mm256_loadu_pd(&tris.v0x[i]));
    const __m256d ty = _mm256_sub_pd(oy, _mm256_loadu_pd(&tris.v0y[i]));
    const __m256d tz = _mm256_sub_pd(oz, _mm256_loadu_pd(&tris.v0z[i]));
    const __m256d u = _mm256_mul_pd(
        _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(tx, px), _mm256_mul_pd(ty, py)), _mm256_mul_pd(tz, pz)), inv);

    const __m256d qx = _mm256_sub_pd(_mm256_mul_pd(ty, e1z), _mm256_mul_pd(tz, e1y));
    const __m256d qy = _mm256_sub_pd(_mm256_mul_pd(tz, e1x), _mm256_mul_pd(tx, e1z));
    const __m256d qz = _mm256_sub_pd(_mm256_mul_pd(tx, e1y), _mm256_mul_pd(ty, e1x));
    const __m256d v = _mm256_mul_pd(
        _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(dx, qx), _mm256_mul_pd(dy, qy)), _mm256_mul_pd(dz, qz)), inv);
    const __m256d t = _mm256_mul_pd(
        _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(e2x, qx), _mm256_mul_pd(e2y, qy)), _mm256_mul_pd(e2z, qz)), inv);

    __m256d hit = _mm256_and_pd(usable, _mm256_cmp_pd(u, tol_lo, _CMP_GE_OQ));
    hit = _mm256_and_pd(hit, _mm256_cmp_pd(v, tol_lo, _CMP_GE_OQ));
    hit = _mm256_and_pd(hit, _mm256_cmp_pd(_mm256_add_pd(u, v), tol_hi, _CMP_LE_OQ));
    hit = _mm256_and_pd(hit, _mm256_cmp_pd(t, zero, _CMP_GE_OQ));
    best = _mm256_max_pd(best, _mm256_blendv_pd(zero, t, hit));
  }

  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, best);
  double out = lanes[0];
  for (int k = 1; k < 4; ++k)
    if (lanes[k] > out) out = lanes[k];
  return out;
}

std::size_t count_overlap_avx2(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  const std::size_t n = std::min(a.size(), b.size());
  const __m256i zero = _mm256_setzero_si256();
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a.data() + i));
    const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b.data() + i));
    const __m256i empty = _mm256_or_si256(_mm256_cmpeq_epi8(va, zero), _mm256_cmpeq_epi8(vb, zero));
    const auto bits = static_cast<std::uint32_t>(_mm256_movemask_epi8(empty));
    count += static_cast<std::size_t>(std::popcount(~bits));
  }
  for (; i < n; ++i) count += (a[i] != 0 && b[i] != 0) ? 1 : 0;
  return count;
}

}  // namespace surfdist::simd
