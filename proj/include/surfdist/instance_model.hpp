#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <vector>

#include "surfdist/bezier_patch.hpp"
#include "surfdist/geometry.hpp"
#include "surfdist/mesh.hpp"
#include "surfdist/simd/kernels.hpp"
#include "surfdist/sphere_lattice.hpp"

namespace surfdist {

// SurfDist instance: a center plus one radial distance per control entry of
// the lattice layout (9V - 16 values, layout order).
struct InstanceShape {
  std::shared_ptr<const Lattice> lattice;
  Vec3 center;
  std::vector<double> distances;

  // Throws InvalidArgument on a count mismatch or negative/non-finite distance.
  InstanceShape(std::shared_ptr<const Lattice> lattice, const Vec3& center, std::vector<double> distances);
  // Every control distance set to `radius`.
  static InstanceShape uniform(std::shared_ptr<const Lattice> lattice, const Vec3& center, double radius);

  Vec3 control_point(std::size_t entry) const;
};

// StarDist-3D baseline: one distance per vertex ray, flat faces.
struct PolyhedralInstance {
  std::shared_ptr<const Lattice> lattice;
  Vec3 center;
  std::vector<double> distances;

  PolyhedralInstance(std::shared_ptr<const Lattice> lattice, const Vec3& center, std::vector<double> distances);

  Vec3 vertex(std::size_t v) const;
};

struct SampleProvenance {
  std::size_t triangle = 0;
  BarycentricCoord bc;
};

// Mesh-wide surface samples; points on shared vertices and edges appear once,
// attributed to the first triangle (in topology order) that contains them.
struct SurfaceSampleSet {
  Vec3 center;
  std::vector<Vec3> points;
  std::vector<SampleProvenance> provenance;

  std::size_t size() const { return points.size(); }
};

// Layout entry feeding each control slot of triangle `tri` (BezierTriangle order).
std::array<std::size_t, BezierTriangle::kControlCount> patch_entries(const Lattice& lattice, std::size_t tri);

std::vector<BezierTriangle> assemble_patches(const InstanceShape& shape);

struct GridSite {
  std::size_t triangle = 0;
  GridIndex index;
};

// Unique grid sites of every triangle at `level`, deduplicated across shared
// vertices and edges. Order: triangle order, then barycentric_grid order.
std::vector<GridSite> unique_grid_sites(const MeshTopology& topo, int level);

inline constexpr int kDefaultSampleLevel = 2;

SurfaceSampleSet surface_samples(const InstanceShape& shape, int level = kDefaultSampleLevel);
SurfaceSampleSet polyhedron_samples(const PolyhedralInstance& poly, int level = kDefaultSampleLevel);

// Each surface sample as a fixed linear combination of control entries:
// sample = center + sum_k weight[k] * distance[entry[k]] * direction[entry[k]].
struct SampleStencil {
  std::array<std::size_t, BezierTriangle::kControlCount> entry;
  std::array<double, BezierTriangle::kControlCount> weight;
};

std::vector<SampleStencil> sample_stencils(const Lattice& lattice, int level);

// Unit vectors from `voxel` to each sample. Throws InvalidArgument
// ("degenerate radial direction") if a sample coincides with the voxel.
std::vector<Vec3> radial_directions(const SurfaceSampleSet& samples, const Vec3& voxel);

// Flat triangulation after `subdiv` midpoint subdivisions of every patch:
// T * 4^subdiv faces, shared vertices welded, outward winding.
TriangleMesh to_triangle_mesh(const InstanceShape& shape, int subdiv);
TriangleMesh to_triangle_mesh(const PolyhedralInstance& poly);

// Ray caster over a fixed triangulation. Returns the farthest intersection
// distance along `dir` from `origin`, or 0 when the ray misses.
class SurfaceRayCaster {
 public:
  explicit SurfaceRayCaster(const TriangleMesh& mesh);

  double distance(const Vec3& origin, const Vec3& dir) const { return simd::farthest_hit(batch_, origin, dir); }
  const simd::TriangleBatch& batch() const { return batch_; }

 private:
  simd::TriangleBatch batch_;
};

double radial_surface_distance(const InstanceShape& shape, const Vec3& origin, const Vec3& direction, int subdiv);

}  // namespace surfdist
