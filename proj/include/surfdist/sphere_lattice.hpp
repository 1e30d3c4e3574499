#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "surfdist/geometry.hpp"

namespace surfdist {

struct UnitDirectionSet {
  std::vector<Vec3> directions;

  std::size_t size() const { return directions.size(); }
};

// Closed triangulated sphere. Edges are (lo, hi) with lo < hi, sorted.
// Triangles are wound outward, rotated so the smallest index comes first, sorted.
struct MeshTopology {
  std::size_t vertex_count = 0;
  std::vector<std::array<int, 2>> edges;
  std::vector<std::array<int, 3>> triangles;

  // Index of edge {a, b} in `edges`, or -1.
  int edge_index(int a, int b) const;
};

enum class ControlRole { vertex, edge, interior };

struct ControlEntry {
  ControlRole role = ControlRole::vertex;
  // Vertex index, edge index or triangle index depending on role.
  int owner = 0;
  // Edge entries only: 0 for the third nearest edges[owner][0], 1 for the other.
  int third = 0;
  Vec3 direction;
};

// All vertex entries, then two entries per edge, then one per triangle.
struct ControlLayout {
  std::vector<ControlEntry> entries;
  std::size_t vertex_count = 0;
  std::size_t edge_count = 0;
  std::size_t triangle_count = 0;

  std::size_t size() const { return entries.size(); }
  std::size_t vertex_entry(std::size_t v) const { return v; }
  std::size_t edge_entry(std::size_t e, int third) const { return vertex_count + 2 * e + static_cast<std::size_t>(third); }
  std::size_t interior_entry(std::size_t t) const { return vertex_count + 2 * edge_count + t; }
};

// Spherical Fibonacci lattice: z_i = 1 - (2i+1)/n, golden-angle longitudes.
UnitDirectionSet fibonacci_directions(int n);

// Regular tetrahedron (4), octahedron (6) or icosahedron (12) vertices.
UnitDirectionSet canonical_directions(int n);

// Convex hull of the directions after the optional per-axis scale.
// Throws InvalidArgument for fewer than 4 points, duplicates, coplanar input,
// or direction sets that do not surround the origin.
MeshTopology build_topology(const UnitDirectionSet& dirs, const Vec3& anisotropy = {1.0, 1.0, 1.0});

// Edge-third and face-center rays are formed on the scaled sphere and mapped
// back through the inverse scale. Vertex entries reuse `dirs` unchanged.
ControlLayout control_layout(const MeshTopology& topo, const UnitDirectionSet& dirs,
                             const Vec3& anisotropy = {1.0, 1.0, 1.0});

enum class LatticeKind { canonical, fibonacci };

std::string to_string(LatticeKind kind);
LatticeKind parse_lattice_kind(const std::string& s);

// Canonical for 4, 6 and 12 rays, Fibonacci otherwise.
LatticeKind default_lattice_kind(int rays);

struct LatticeSpec {
  LatticeKind kind = LatticeKind::canonical;
  int rays = 6;
  Vec3 anisotropy{1.0, 1.0, 1.0};

  friend bool operator==(const LatticeSpec&, const LatticeSpec&) = default;
};

// Everything derived from a LatticeSpec. Immutable and shared between shapes.
struct Lattice {
  LatticeSpec spec;
  UnitDirectionSet directions;
  MeshTopology topology;
  ControlLayout layout;

  // 9V - 16 for any closed triangulation.
  std::size_t parameter_count() const { return layout.size(); }
};

std::shared_ptr<const Lattice> make_lattice(const LatticeSpec& spec);

}  // namespace surfdist
