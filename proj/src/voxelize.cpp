#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "surfdist/errors.hpp"
#include "surfdist/instance_model.hpp"
#include "surfdist/parallel.hpp"
#include "surfdist/volume.hpp"

namespace surfdist {

double ray_cast_mask_distance(const LabelVolume& vol, std::uint32_t instance_id, const Vec3& origin,
                              const Vec3& direction, const RayMarchOptions& options) {
  const Grid& g = vol.grid;
  auto inside = [&](double t) { return vol.label_or_background(g.voxel_at(origin + t * direction)) == instance_id; };
  if (!inside(0.0)) return 0.0;

  const double h = options.step * g.min_spacing();
  const double tol = options.tolerance * g.min_spacing();
  const Vec3 extent = hadamard(Vec3{static_cast<double>(g.nx), static_cast<double>(g.ny), static_cast<double>(g.nz)},
                               g.anisotropy);
  const double limit = norm(extent) + norm(origin) + 2.0 * h;

  double t = 0.0;
  while (t < limit) {
    const double next = t + h;
    if (!inside(next)) {
      double lo = t, hi = next;
      while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (inside(mid) ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    }
    t = next;
  }
  return t;
}

double ray_cast_mask_distance(const LabelVolume& vol, std::uint32_t instance_id, const VoxelIndex& origin,
                              const Vec3& direction, const RayMarchOptions& options) {
  if (vol.label_or_background(origin) != instance_id || instance_id == 0)
    throw InvalidArgument("origin voxel (" + std::to_string(origin.z) + "," + std::to_string(origin.y) + "," +
                          std::to_string(origin.x) + ") is not part of instance " + std::to_string(instance_id));
  return ray_cast_mask_distance(vol, instance_id, vol.grid.world(origin), direction, options);
}

std::vector<double> ground_truth_distances(const LabelVolume& vol, std::uint32_t instance_id, const VoxelIndex& voxel,
                                           const std::vector<Vec3>& directions, const RayMarchOptions& options) {
  std::vector<double> out;
  out.reserve(directions.size());
  for (const auto& k : directions) out.push_back(ray_cast_mask_distance(vol, instance_id, voxel, k, options));
  return out;
}

bool BoxMask::test(const VoxelIndex& v) const {
  if (v.z < lo.z || v.y < lo.y || v.x < lo.x || v.z >= hi.z || v.y >= hi.y || v.x >= hi.x) return false;
  const auto off = ((v.z - lo.z) * extent_y() + (v.y - lo.y)) * extent_x() + (v.x - lo.x);
  return bits[static_cast<std::size_t>(off)] != 0;
}

BoxMask rasterize(const TriangleMesh& mesh, const Vec3& center, const Grid& grid) {
  grid.validate();
  BoxMask mask;
  if (mesh.vertices.empty()) return mask;

  Vec3 lo = center, hi = center;
  double r_max = 0.0;
  for (const auto& v : mesh.vertices) {
    lo = {std::min(lo.x, v.x), std::min(lo.y, v.y), std::min(lo.z, v.z)};
    hi = {std::max(hi.x, v.x), std::max(hi.y, v.y), std::max(hi.z, v.z)};
    r_max = std::max(r_max, norm(v - center));
  }
  auto clamp_lo = [](double w, double a) { return std::max(0L, static_cast<long>(std::ceil(w / a - 1e-9))); };
  auto clamp_hi = [](double w, double a, std::size_t n) {
    return std::min(static_cast<long>(n), static_cast<long>(std::floor(w / a + 1e-9)) + 1);
  };
  mask.lo = {clamp_lo(lo.z, grid.anisotropy.z), clamp_lo(lo.y, grid.anisotropy.y), clamp_lo(lo.x, grid.anisotropy.x)};
  mask.hi = {clamp_hi(hi.z, grid.anisotropy.z, grid.nz), clamp_hi(hi.y, grid.anisotropy.y, grid.ny),
             clamp_hi(hi.x, grid.anisotropy.x, grid.nx)};
  if (mask.hi.z <= mask.lo.z || mask.hi.y <= mask.lo.y || mask.hi.x <= mask.lo.x) {
    mask.hi = mask.lo;
    return mask;
  }
  mask.bits.assign(static_cast<std::size_t>(mask.extent_z() * mask.extent_y() * mask.extent_x()), 0);

  // Voxels closer to the center than the nearest surface point are inside
  // whenever the center is enclosed; every ray from it then hits the surface.
  const bool enclosed = winding_number(mesh, center) > 0.5;
  const double r_in = enclosed ? distance_to_mesh(mesh, center) * (1.0 - 1e-9) : -1.0;
  const SurfaceRayCaster caster(mesh);

  const long ny = mask.extent_y(), nx = mask.extent_x();
  parallel_for(0, static_cast<std::size_t>(mask.extent_z()), [&](std::size_t dz) {
    for (long dy = 0; dy < ny; ++dy)
      for (long dx = 0; dx < nx; ++dx) {
        const VoxelIndex v{mask.lo.z + static_cast<long>(dz), mask.lo.y + dy, mask.lo.x + dx};
        const Vec3 offset = grid.world(v) - center;
        const double len = norm(offset);
        bool in = false;
        if (len > r_max) {
          in = false;
        } else if (len == 0.0) {
          in = r_max > 0.0;
        } else if (len <= r_in) {
          in = true;
        } else {
          in = len <= caster.distance(center, offset / len);
        }
        mask.bits[static_cast<std::size_t>((static_cast<long>(dz) * ny + dy) * nx + dx)] = in ? 1 : 0;
      }
  });
  mask.count = static_cast<std::size_t>(std::count(mask.bits.begin(), mask.bits.end(), std::uint8_t{1}));
  return mask;
}

BoxMask rasterize(const InstanceShape& shape, const Grid& grid, int subdiv) {
  return rasterize(to_triangle_mesh(shape, subdiv), shape.center, grid);
}

BoxMask rasterize(const PolyhedralInstance& poly, const Grid& grid) {
  return rasterize(to_triangle_mesh(poly), poly.center, grid);
}

LabelVolume to_label_volume(const BoxMask& mask, const Grid& grid, std::uint32_t label) {
  LabelVolume vol(grid, label > 0xffffu ? Dtype::u32 : Dtype::u16);
  for (long z = mask.lo.z; z < mask.hi.z; ++z)
    for (long y = mask.lo.y; y < mask.hi.y; ++y)
      for (long x = mask.lo.x; x < mask.hi.x; ++x)
        if (mask.test({z, y, x})) vol.at({z, y, x}) = label;
  return vol;
}

LabelVolume voxelize(const InstanceShape& shape, const Grid& grid, int subdiv, std::uint32_t label) {
  return to_label_volume(rasterize(shape, grid, subdiv), grid, label);
}

LabelVolume voxelize(const PolyhedralInstance& poly, const Grid& grid, std::uint32_t label) {
  return to_label_volume(rasterize(poly, grid), grid, label);
}

}  // namespace surfdist
