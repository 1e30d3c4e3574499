#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "surfdist/geometry.hpp"
#include "surfdist/mesh.hpp"

namespace surfdist {

struct InstanceShape;
struct PolyhedralInstance;

// Integer voxel coordinate in (z, y, x) order. Signed so boxes can be clipped.
struct VoxelIndex {
  long z = 0;
  long y = 0;
  long x = 0;

  friend constexpr bool operator==(const VoxelIndex&, const VoxelIndex&) = default;
};

// Voxel lattice with per-axis voxel size. Voxel i spans world [i - 0.5, i + 0.5)
// times the voxel size on each axis; centers sit at integer multiples.
struct Grid {
  std::size_t nz = 1, ny = 1, nx = 1;
  Vec3 anisotropy{1.0, 1.0, 1.0};  // voxel spacing per world axis (x, y, z)

  std::size_t size() const { return nz * ny * nx; }
  std::size_t offset(std::size_t z, std::size_t y, std::size_t x) const { return (z * ny + y) * nx + x; }
  VoxelIndex index_of(std::size_t offset) const;
  bool contains(const VoxelIndex& v) const;
  Vec3 world(const VoxelIndex& v) const;
  // Voxel whose support contains world point p (may lie outside the grid).
  VoxelIndex voxel_at(const Vec3& p) const;
  double min_spacing() const;

  void validate() const;
  friend bool operator==(const Grid&, const Grid&) = default;
};

enum class Dtype { u8, u16, u32 };

std::string to_string(Dtype dtype);
Dtype parse_dtype(const std::string& s);
std::uint32_t dtype_max(Dtype dtype);

// Labeled voxels (0 = background), C-order with z slowest.
struct LabelVolume {
  Grid grid;
  std::vector<std::uint32_t> labels;
  Dtype dtype = Dtype::u16;

  LabelVolume() = default;
  explicit LabelVolume(const Grid& grid, Dtype dtype = Dtype::u16);

  std::uint32_t at(const VoxelIndex& v) const {
    return labels[grid.offset(static_cast<std::size_t>(v.z), static_cast<std::size_t>(v.y), static_cast<std::size_t>(v.x))];
  }
  std::uint32_t& at(const VoxelIndex& v) {
    return labels[grid.offset(static_cast<std::size_t>(v.z), static_cast<std::size_t>(v.y), static_cast<std::size_t>(v.x))];
  }
  // Label at v, or 0 outside the grid.
  std::uint32_t label_or_background(const VoxelIndex& v) const { return grid.contains(v) ? at(v) : 0; }

  // Distinct nonzero labels, ascending.
  std::vector<std::uint32_t> instance_ids() const;
};

// Writes `<base>.json` and `<base>.raw`; `path` may name either file or the base.
void save_volume(const LabelVolume& vol, const std::string& path);
LabelVolume load_volume(const std::string& path);

// Per-voxel normalized object probability in [0, 1].
struct TargetVolume {
  Grid grid;
  std::vector<double> p;
};

// Euclidean (world-unit, center-to-center) distance from every voxel to the
// nearest in-grid voxel carrying a different label. Only when the whole grid
// is one label do out-of-grid positions count as exterior. Exact separable
// transform; background voxels get their distance to the nearest foreground.
std::vector<double> exterior_distance(const LabelVolume& vol);

// exterior_distance divided by its per-instance maximum; background is 0.
TargetVolume object_probabilities(const LabelVolume& vol);

struct RayMarchOptions {
  double step = 0.25;        // in units of the smallest voxel spacing
  double tolerance = 1e-3;   // bisection stop, same units
};

// Distance from world point `origin` along unit `direction` to the first exit
// from the voxel support of `instance_id`. Fixed-step march then bisection.
double ray_cast_mask_distance(const LabelVolume& vol, std::uint32_t instance_id, const Vec3& origin,
                              const Vec3& direction, const RayMarchOptions& options = {});

// Same, starting at a voxel center. Throws InvalidArgument when the voxel is
// not part of the instance.
double ray_cast_mask_distance(const LabelVolume& vol, std::uint32_t instance_id, const VoxelIndex& origin,
                              const Vec3& direction, const RayMarchOptions& options = {});

std::vector<double> ground_truth_distances(const LabelVolume& vol, std::uint32_t instance_id, const VoxelIndex& voxel,
                                           const std::vector<Vec3>& directions, const RayMarchOptions& options = {});

// Binary mask restricted to a box [lo, hi) of a grid.
struct BoxMask {
  VoxelIndex lo;
  VoxelIndex hi;
  std::vector<std::uint8_t> bits;
  std::size_t count = 0;

  bool empty() const { return count == 0; }
  long extent_z() const { return hi.z - lo.z; }
  long extent_y() const { return hi.y - lo.y; }
  long extent_x() const { return hi.x - lo.x; }
  bool test(const VoxelIndex& v) const;
};

// Voxels v of `grid` with |v - center| <= farthest hit of the ray from
// `center` toward v. Only the mesh bounding box is scanned.
BoxMask rasterize(const TriangleMesh& mesh, const Vec3& center, const Grid& grid);

BoxMask rasterize(const InstanceShape& shape, const Grid& grid, int subdiv);
BoxMask rasterize(const PolyhedralInstance& poly, const Grid& grid);

LabelVolume to_label_volume(const BoxMask& mask, const Grid& grid, std::uint32_t label = 1);

LabelVolume voxelize(const InstanceShape& shape, const Grid& grid, int subdiv, std::uint32_t label = 1);
LabelVolume voxelize(const PolyhedralInstance& poly, const Grid& grid, std::uint32_t label = 1);

}  // namespace surfdist
