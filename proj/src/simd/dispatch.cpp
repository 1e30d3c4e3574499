#include <cstdlib>
#include <string_view>

#include "surfdist/simd/kernels.hpp"

namespace surfdist::simd {

#if !SURFDIST_HAVE_AVX2
double farthest_hit_avx2(const TriangleBatch& tris, const Vec3& origin, const Vec3& dir) {
  return farthest_hit_scalar(tris, origin, dir);
}
std::size_t count_overlap_avx2(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  return count_overlap_scalar(a, b);
}
#endif

std::string to_string(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if SURFDIST_HAVE_AVX2
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

namespace {

Isa select_isa() {
  if (const char* env = std::getenv("SURFDIST_SIMD")) {
    const std::string_view want(env);
    if (want == "scalar") return Isa::scalar;
    if (want == "avx2") return isa_available(Isa::avx2) ? Isa::avx2 : Isa::scalar;
  }
  return isa_available(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

}  // namespace

Isa active_isa() {
  static const Isa isa = select_isa();
  return isa;
}

double farthest_hit(const TriangleBatch& tris, const Vec3& origin, const Vec3& dir) {
  return active_isa() == Isa::avx2 ? farthest_hit_avx2(tris, origin, dir) : farthest_hit_scalar(tris, origin, dir);
}

std::size_t count_overlap(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  return active_isa() == Isa::avx2 ? count_overlap_avx2(a, b) : count_overlap_scalar(a, b);
}

}  // namespace surfdist::simd
