#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "surfdist/geometry.hpp"

namespace surfdist {

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
};

struct MeshAudit {
  bool closed = false;           // every undirected edge used by exactly two faces
  bool consistently_wound = false;  // every directed edge used exactly once
  std::size_t boundary_edges = 0;
  std::size_t nonmanifold_edges = 0;

  bool watertight() const { return closed && consistently_wound; }
};

MeshAudit audit_mesh(const TriangleMesh& mesh);

// Generalized winding number of `point` with respect to a closed mesh:
// ~1 inside an outward-wound mesh, ~0 outside.
double winding_number(const TriangleMesh& mesh, const Vec3& point);

// Smallest distance from `point` to any face.
double distance_to_mesh(const TriangleMesh& mesh, const Vec3& point);

// ASCII Wavefront OBJ: a comment header, `v x y z` lines, 1-indexed `f a b c` lines.
void write_obj(std::ostream& out, const TriangleMesh& mesh, const std::string& comment = {});
void save_obj(const std::string& path, const TriangleMesh& mesh, const std::string& comment = {});

// Minimal reader for the subset write_obj emits (v and f records).
TriangleMesh read_obj(std::istream& in);

}  // namespace surfdist
