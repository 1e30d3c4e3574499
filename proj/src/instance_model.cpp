#include "surfdist/instance_model.hpp"

#include <cmath>
#include <map>
#include <string>
#include <tuple>
#include <utility>

#include "surfdist/errors.hpp"

namespace surfdist {

namespace {

void check_distances(const std::vector<double>& d) {
  for (std::size_t i = 0; i < d.size(); ++i)
    if (!std::isfinite(d[i]) || d[i] < 0.0)
      throw InvalidArgument("distance " + std::to_string(i) + " must be finite and nonnegative");
}

// Identity of a grid site independent of which triangle reaches it.
using SiteKey = std::tuple<int, int, int, int>;

SiteKey site_key(const MeshTopology& topo, std::size_t tri, const GridIndex& g) {
  const auto& t = topo.triangles[tri];
  const std::array<int, 3> coord{g.i, g.j, g.k};
  int nonzero = 0;
  for (int c : coord) nonzero += c != 0;
  if (nonzero == 1) {
    for (int c = 0; c < 3; ++c)
      if (coord[c] != 0) return {0, t[c], 0, 0};
  }
  if (nonzero == 2) {
    int ca = -1, cb = -1;
    for (int c = 0; c < 3; ++c)
      if (coord[c] != 0) (ca < 0 ? ca : cb) = c;
    int lo = t[ca], hi = t[cb];
    int lo_weight = coord[ca];
    if (lo > hi) {
      std::swap(lo, hi);
      lo_weight = coord[cb];
    }
    return {1, lo, hi, lo_weight};
  }
  return {2, static_cast<int>(tri), g.i, g.j};
}

}  // namespace

InstanceShape::InstanceShape(std::shared_ptr<const Lattice> lattice_, const Vec3& center_,
                             std::vector<double> distances_)
    : lattice(std::move(lattice_)), center(center_), distances(std::move(distances_)) {
  if (!lattice) throw InvalidArgument("instance shape requires a lattice");
  if (distances.size() != lattice->parameter_count())
    throw InvalidArgument("expected " + std::to_string(lattice->parameter_count()) + " control distances, got " +
                          std::to_string(distances.size()));
  check_distances(distances);
}

InstanceShape InstanceShape::uniform(std::shared_ptr<const Lattice> lattice, const Vec3& center, double radius) {
  const std::size_t n = lattice ? lattice->parameter_count() : 0;
  return InstanceShape(std::move(lattice), center, std::vector<double>(n, radius));
}

Vec3 InstanceShape::control_point(std::size_t entry) const {
  return center + distances[entry] * lattice->layout.entries[entry].direction;
}

PolyhedralInstance::PolyhedralInstance(std::shared_ptr<const Lattice> lattice_, const Vec3& center_,
                                       std::vector<double> distances_)
    : lattice(std::move(lattice_)), center(center_), distances(std::move(distances_)) {
  if (!lattice) throw InvalidArgument("polyhedral instance requires a lattice");
  if (distances.size() != lattice->directions.size())
    throw InvalidArgument("expected " + std::to_string(lattice->directions.size()) + " ray distances, got " +
                          std::to_string(distances.size()));
  check_distances(distances);
}

Vec3 PolyhedralInstance::vertex(std::size_t v) const {
  return center + distances[v] * lattice->directions.directions[v];
}

std::array<std::size_t, BezierTriangle::kControlCount> patch_entries(const Lattice& lattice, std::size_t tri) {
  const auto& topo = lattice.topology;
  const auto& layout = lattice.layout;
  const auto& t = topo.triangles[tri];
  // Entry for the edge third of {from, to} lying nearer `from`.
  auto edge_third = [&](int from, int to) {
    const int e = topo.edge_index(from, to);
    return layout.edge_entry(static_cast<std::size_t>(e), from == topo.edges[e][0] ? 0 : 1);
  };
  const int a = t[0], b = t[1], c = t[2];
  return {
      layout.vertex_entry(a), layout.vertex_entry(b), layout.vertex_entry(c),
      edge_third(a, b),       edge_third(a, c),       edge_third(b, a),
      edge_third(b, c),       edge_third(c, a),       edge_third(c, b),
      layout.interior_entry(tri),
  };
}

std::vector<BezierTriangle> assemble_patches(const InstanceShape& shape) {
  const auto& lattice = *shape.lattice;
  std::vector<BezierTriangle> patches(lattice.topology.triangles.size());
  for (std::size_t t = 0; t < patches.size(); ++t) {
    const auto entries = patch_entries(lattice, t);
    for (std::size_t s = 0; s < BezierTriangle::kControlCount; ++s) patches[t].b[s] = shape.control_point(entries[s]);
  }
  return patches;
}

std::vector<GridSite> unique_grid_sites(const MeshTopology& topo, int level) {
  const auto grid = barycentric_grid(level);
  std::map<SiteKey, std::size_t> seen;
  std::vector<GridSite> sites;
  for (std::size_t t = 0; t < topo.triangles.size(); ++t)
    for (const auto& g : grid)
      if (seen.emplace(site_key(topo, t, g), sites.size()).second) sites.push_back({t, g});
  return sites;
}

SurfaceSampleSet surface_samples(const InstanceShape& shape, int level) {
  const auto patches = assemble_patches(shape);
  const auto sites = unique_grid_sites(shape.lattice->topology, level);
  const int m = 1 << level;
  SurfaceSampleSet out;
  out.center = shape.center;
  out.points.reserve(sites.size());
  out.provenance.reserve(sites.size());
  for (const auto& site : sites) {
    const auto bc = grid_coord(site.index, m);
    out.points.push_back(evaluate(patches[site.triangle], bc));
    out.provenance.push_back({site.triangle, bc});
  }
  return out;
}

SurfaceSampleSet polyhedron_samples(const PolyhedralInstance& poly, int level) {
  const auto& topo = poly.lattice->topology;
  const auto sites = unique_grid_sites(topo, level);
  const int m = 1 << level;
  SurfaceSampleSet out;
  out.center = poly.center;
  out.points.reserve(sites.size());
  out.provenance.reserve(sites.size());
  for (const auto& site : sites) {
    const auto& t = topo.triangles[site.triangle];
    const auto bc = grid_coord(site.index, m);
    out.points.push_back(bc.u * poly.vertex(t[0]) + bc.v * poly.vertex(t[1]) + bc.w * poly.vertex(t[2]));
    out.provenance.push_back({site.triangle, bc});
  }
  return out;
}

std::vector<SampleStencil> sample_stencils(const Lattice& lattice, int level) {
  const auto sites = unique_grid_sites(lattice.topology, level);
  const int m = 1 << level;
  std::vector<SampleStencil> out;
  out.reserve(sites.size());
  for (const auto& site : sites) out.push_back({patch_entries(lattice, site.triangle), bernstein_weights(grid_coord(site.index, m))});
  return out;
}

std::vector<Vec3> radial_directions(const SurfaceSampleSet& samples, const Vec3& voxel) {
  std::vector<Vec3> out;
  out.reserve(samples.size());
  for (const auto& s : samples.points) {
    const Vec3 offset = s - voxel;
    const double len = norm(offset);
    if (!(len > 0.0)) throw InvalidArgument("degenerate radial direction: sample coincides with voxel");
    out.push_back(offset / len);
  }
  return out;
}

namespace {

// Welds per-triangle grids at `level` into one mesh; `position(tri, bc)` gives the surface point.
template <typename PositionFn>
TriangleMesh grid_mesh(const MeshTopology& topo, int level, PositionFn&& position) {
  const int m = 1 << level;
  const auto grid = barycentric_grid(level);
  std::map<SiteKey, int> welded;
  TriangleMesh mesh;
  std::vector<int> local(static_cast<std::size_t>((m + 1) * (m + 1)), -1);
  auto at = [&](int i, int j) -> int& { return local[static_cast<std::size_t>(i * (m + 1) + j)]; };

  for (std::size_t t = 0; t < topo.triangles.size(); ++t) {
    for (const auto& g : grid) {
      const auto [it, fresh] = welded.emplace(site_key(topo, t, g), static_cast<int>(mesh.vertices.size()));
      if (fresh) mesh.vertices.push_back(position(t, grid_coord(g, m)));
      at(g.i, g.j) = it->second;
    }
    // Upward triangles (i+1,j,k), (i,j+1,k), (i,j,k+1) for i+j+k = m-1.
    for (int i = 0; i < m; ++i)
      for (int j = 0; i + j < m; ++j) mesh.faces.push_back({at(i + 1, j), at(i, j + 1), at(i, j)});
    // Inverted triangles (i,j+1,k+1), (i+1,j,k+1), (i+1,j+1,k) for i+j+k = m-2.
    for (int i = 0; i + 1 < m; ++i)
      for (int j = 0; i + j + 1 < m; ++j) mesh.faces.push_back({at(i, j + 1), at(i + 1, j), at(i + 1, j + 1)});
  }
  return mesh;
}

}  // namespace

TriangleMesh to_triangle_mesh(const InstanceShape& shape, int subdiv) {
  if (subdiv < 0) throw InvalidArgument("subdivision level must be nonnegative");
  const auto patches = assemble_patches(shape);
  return grid_mesh(shape.lattice->topology, subdiv,
                   [&](std::size_t t, const BarycentricCoord& bc) { return evaluate(patches[t], bc); });
}

TriangleMesh to_triangle_mesh(const PolyhedralInstance& poly) {
  const auto& topo = poly.lattice->topology;
  return grid_mesh(topo, 0, [&](std::size_t t, const BarycentricCoord& bc) {
    const auto& tri = topo.triangles[t];
    return bc.u * poly.vertex(tri[0]) + bc.v * poly.vertex(tri[1]) + bc.w * poly.vertex(tri[2]);
  });
}

SurfaceRayCaster::SurfaceRayCaster(const TriangleMesh& mesh) {
  for (const auto& f : mesh.faces) batch_.add(mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]);
  batch_.pad();
}

double radial_surface_distance(const InstanceShape& shape, const Vec3& origin, const Vec3& direction, int subdiv) {
  return SurfaceRayCaster(to_triangle_mesh(shape, subdiv)).distance(origin, direction);
}

}  // namespace surfdist
