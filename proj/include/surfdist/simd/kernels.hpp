#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "surfdist/geometry.hpp"

namespace surfdist::simd {

// Triangles in structure-of-arrays form: first vertex plus the two edge
// vectors. Padded with degenerate triangles (zero edges, never hit) to a
// multiple of kLanes.
struct TriangleBatch {
  static constexpr std::size_t kLanes = 4;

  std::vector<double> v0x, v0y, v0z;
  std::vector<double> e1x, e1y, e1z;
  std::vector<double> e2x, e2y, e2z;
  std::size_t count = 0;

  // Call pad() once after the last add().
  void add(const Vec3& a, const Vec3& b, const Vec3& c);
  void pad();
  std::size_t padded_size() const { return v0x.size(); }
};

// Barycentric slack that closes cracks between adjacent triangles.
inline constexpr double kEdgeTolerance = 1e-9;
// Rays this close to parallel with a triangle's plane are treated as misses.
inline constexpr double kDeterminantEpsilon = 1e-14;

// Largest t >= 0 with origin + t * dir on some triangle, or 0 if none.
// Both variants use the same operation order and return bit-identical results.
double farthest_hit_scalar(const TriangleBatch& tris, const Vec3& origin, const Vec3& dir);
double farthest_hit_avx2(const TriangleBatch& tris, const Vec3& origin, const Vec3& dir);

// Number of positions where both masks are nonzero.
std::size_t count_overlap_scalar(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);
std::size_t count_overlap_avx2(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

enum class Isa { scalar, avx2 };

std::string to_string(Isa isa);

// True when the variant was compiled in and the CPU can run it.
bool isa_available(Isa isa);

// Chosen once per process: SURFDIST_SIMD=scalar|avx2 forces a variant (an
// unavailable request falls back to scalar), otherwise the best available.
Isa active_isa();

double farthest_hit(const TriangleBatch& tris, const Vec3& origin, const Vec3& dir);
std::size_t count_overlap(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

}  // namespace surfdist::simd
