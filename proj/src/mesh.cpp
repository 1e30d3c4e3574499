#include "surfdist/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <utility>

#include "surfdist/errors.hpp"

namespace surfdist {

MeshAudit audit_mesh(const TriangleMesh& mesh) {
  std::map<std::pair<int, int>, int> undirected;
  std::map<std::pair<int, int>, int> directed;
  for (const auto& f : mesh.faces)
    for (int k = 0; k < 3; ++k) {
      const int a = f[k];
      const int b = f[(k + 1) % 3];
      ++undirected[{std::min(a, b), std::max(a, b)}];
      ++directed[{a, b}];
    }
  MeshAudit audit;
  for (const auto& [edge, uses] : undirected) {
    if (uses == 1) ++audit.boundary_edges;
    if (uses > 2) ++audit.nonmanifold_edges;
  }
  audit.closed = !mesh.faces.empty() && audit.boundary_edges == 0 && audit.nonmanifold_edges == 0;
  audit.consistently_wound =
      std::all_of(directed.begin(), directed.end(), [](const auto& kv) { return kv.second == 1; });
  return audit;
}

double winding_number(const TriangleMesh& mesh, const Vec3& point) {
  double total = 0.0;
  for (const auto& f : mesh.faces) {
    const Vec3 a = mesh.vertices[f[0]] - point;
    const Vec3 b = mesh.vertices[f[1]] - point;
    const Vec3 c = mesh.vertices[f[2]] - point;
    const double la = norm(a), lb = norm(b), lc = norm(c);
    const double numerator = dot(a, cross(b, c));
    const double denominator = la * lb * lc + dot(a, b) * lc + dot(b, c) * la + dot(c, a) * lb;
    total += 2.0 * std::atan2(numerator, denominator);
  }
  return total / (4.0 * std::numbers::pi);
}

namespace {

// Closest point on triangle abc to p (Ericson, Real-Time Collision Detection 5.1.5).
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = dot(ab, ap), d2 = dot(ac, ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;
  const Vec3 bp = p - b;
  const double d3 = dot(ab, bp), d4 = dot(ac, bp);
  if (d3 >= 0.0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;
  const Vec3 cp = p - c;
  const double d5 = dot(ab, cp), d6 = dot(ac, cp);
  if (d6 >= 0.0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

}  // namespace

double distance_to_mesh(const TriangleMesh& mesh, const Vec3& point) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& f : mesh.faces) {
    const Vec3 q = closest_point_on_triangle(point, mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]);
    best = std::min(best, norm(q - point));
  }
  return best;
}

void write_obj(std::ostream& out, const TriangleMesh& mesh, const std::string& comment) {
  out << "# surfdist triangle mesh\n";
  out << "# vertex coordinates are world x y z (volume axes z,y,x reversed)\n";
  if (!comment.empty()) {
    std::istringstream lines(comment);
    for (std::string line; std::getline(lines, line);) out << "# " << line << '\n';
  }
  out << "# " << mesh.vertices.size() << " vertices, " << mesh.faces.size() << " faces\n";
  char buf[128];
  for (const auto& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v.x, v.y, v.z);
    out << buf;
  }
  for (const auto& f : mesh.faces) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
}

void save_obj(const std::string& path, const TriangleMesh& mesh, const std::string& comment) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_obj(out, mesh, comment);
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

TriangleMesh read_obj(std::istream& in) {
  TriangleMesh mesh;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 v;
      if (!(ls >> v.x >> v.y >> v.z)) throw FormatError("obj line " + std::to_string(line_no) + ": bad vertex");
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::array<int, 3> f{};
      for (auto& idx : f) {
        std::string tok;
        if (!(ls >> tok)) throw FormatError("obj line " + std::to_string(line_no) + ": bad face");
        idx = std::stoi(tok.substr(0, tok.find('/'))) - 1;
        if (idx < 0) throw FormatError("obj line " + std::to_string(line_no) + ": bad face index");
      }
      mesh.faces.push_back(f);
    }
  }
  for (const auto& f : mesh.faces)
    for (int idx : f)
      if (static_cast<std::size_t>(idx) >= mesh.vertices.size()) throw FormatError("obj face index out of range");
  return mesh;
}

}  // namespace surfdist
