#include "surfdist/sphere_lattice.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>

#include "surfdist/errors.hpp"

namespace surfdist {

namespace {

constexpr double kDuplicateTolerance = 1e-9;
constexpr double kPlaneTolerance = 1e-10;

bool is_isotropic(const Vec3& s) { return s.x == 1.0 && s.y == 1.0 && s.z == 1.0; }

void check_anisotropy(const Vec3& s) {
  if (!(s.x > 0.0 && s.y > 0.0 && s.z > 0.0) || !std::isfinite(s.x) || !std::isfinite(s.y) ||
      !std::isfinite(s.z))
    throw InvalidArgument("anisotropy components must be finite and positive");
}

std::vector<Vec3> scaled_points(const UnitDirectionSet& dirs, const Vec3& anisotropy) {
  if (is_isotropic(anisotropy)) return dirs.directions;
  std::vector<Vec3> out;
  out.reserve(dirs.size());
  for (const auto& d : dirs.directions) out.push_back(normalized(hadamard(d, anisotropy)));
  return out;
}

Vec3 unscale(const Vec3& q, const Vec3& anisotropy) {
  if (is_isotropic(anisotropy)) return normalized(q);
  return normalized(divide(q, anisotropy));
}

struct HullFace {
  std::array<int, 3> v;
  Vec3 normal;
  double offset = 0.0;
  bool alive = true;
};

HullFace make_face(const std::vector<Vec3>& p, int a, int b, int c) {
  HullFace f{{a, b, c}, {}, 0.0, true};
  f.normal = normalized(cross(p[b] - p[a], p[c] - p[a]));
  f.offset = dot(f.normal, p[a]);
  return f;
}

double signed_distance(const HullFace& f, const Vec3& q) { return dot(f.normal, q) - f.offset; }

// Incremental hull, points inserted in index order. A face counts as visible when
// the new point lies on or above its plane: for points on a sphere, coplanar
// means cocircular and the point must still become a vertex.
std::vector<std::array<int, 3>> incremental_hull(const std::vector<Vec3>& p) {
  const int n = static_cast<int>(p.size());

  int i2 = -1;
  for (int i = 2; i < n && i2 < 0; ++i)
    if (norm(cross(p[1] - p[0], p[i] - p[0])) > kPlaneTolerance) i2 = i;
  if (i2 < 0) throw InvalidArgument("degenerate directions: all points collinear");
  int i3 = -1;
  for (int i = 2; i < n && i3 < 0; ++i) {
    if (i == i2) continue;
    if (std::abs(dot(cross(p[1] - p[0], p[i2] - p[0]), p[i] - p[0])) > kPlaneTolerance) i3 = i;
  }
  if (i3 < 0) throw InvalidArgument("degenerate directions: all points coplanar");

  std::vector<HullFace> faces;
  const Vec3 inner = (p[0] + p[1] + p[i2] + p[i3]) * 0.25;
  auto add_oriented = [&](int a, int b, int c) {
    HullFace f = make_face(p, a, b, c);
    if (signed_distance(f, inner) > 0.0) f = make_face(p, a, c, b);
    faces.push_back(f);
  };
  add_oriented(0, 1, i2);
  add_oriented(0, 1, i3);
  add_oriented(0, i2, i3);
  add_oriented(1, i2, i3);

  // Directed edge (a, b) -> face that contains it in that winding.
  std::map<std::pair<int, int>, int> edge_face;
  auto register_face = [&](int fi) {
    const auto& v = faces[fi].v;
    for (int k = 0; k < 3; ++k) edge_face[{v[k], v[(k + 1) % 3]}] = fi;
  };
  for (int fi = 0; fi < 4; ++fi) register_face(fi);

  for (int pi = 0; pi < n; ++pi) {
    if (pi == 0 || pi == 1 || pi == i2 || pi == i3) continue;
    std::vector<char> visible(faces.size(), 0);
    bool any = false;
    for (std::size_t fi = 0; fi < faces.size(); ++fi) {
      if (faces[fi].alive && signed_distance(faces[fi], p[pi]) > -kPlaneTolerance) {
        visible[fi] = 1;
        any = true;
      }
    }
    if (!any) throw InvalidArgument("direction " + std::to_string(pi) + " is not a hull vertex");

    std::vector<std::pair<int, int>> horizon;
    for (std::size_t fi = 0; fi < faces.size(); ++fi) {
      if (!visible[fi]) continue;
      const auto& v = faces[fi].v;
      for (int k = 0; k < 3; ++k) {
        const int a = v[k];
        const int b = v[(k + 1) % 3];
        const auto twin = edge_face.find({b, a});
        if (twin == edge_face.end() || !visible[twin->second]) horizon.emplace_back(a, b);
      }
    }
    for (std::size_t fi = 0; fi < faces.size(); ++fi) {
      if (!visible[fi]) continue;
      faces[fi].alive = false;
      const auto& v = faces[fi].v;
      for (int k = 0; k < 3; ++k) edge_face.erase({v[k], v[(k + 1) % 3]});
    }
    for (const auto& [a, b] : horizon) {
      faces.push_back(make_face(p, a, b, pi));
      register_face(static_cast<int>(faces.size()) - 1);
    }
  }

  std::vector<std::array<int, 3>> out;
  for (const auto& f : faces)
    if (f.alive) out.push_back(f.v);
  return out;
}

}  // namespace

int MeshTopology::edge_index(int a, int b) const {
  const std::array<int, 2> key{std::min(a, b), std::max(a, b)};
  const auto it = std::lower_bound(edges.begin(), edges.end(), key);
  if (it == edges.end() || *it != key) return -1;
  return static_cast<int>(it - edges.begin());
}

UnitDirectionSet fibonacci_directions(int n) {
  if (n < 4) throw InvalidArgument("insufficient vertices for a closed surface (need at least 4 rays)");
  const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
  UnitDirectionSet out;
  out.directions.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden_angle * i;
    out.directions.push_back(normalized({r * std::cos(phi), r * std::sin(phi), z}));
  }
  return out;
}

UnitDirectionSet canonical_directions(int n) {
  UnitDirectionSet out;
  auto& d = out.directions;
  switch (n) {
    case 4:
      d = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
      break;
    case 6:
      d = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
      break;
    case 12: {
      const double phi = std::numbers::phi;
      for (double s1 : {1.0, -1.0})
        for (double s2 : {1.0, -1.0}) {
          d.push_back({0.0, s1, s2 * phi});
          d.push_back({s1, s2 * phi, 0.0});
          d.push_back({s2 * phi, 0.0, s1});
        }
      break;
    }
    default:
      throw InvalidArgument("no canonical lattice with " + std::to_string(n) +
                            " rays (supported: 4, 6, 12); use the fibonacci lattice");
  }
  for (auto& v : d) v = normalized(v);
  return out;
}

MeshTopology build_topology(const UnitDirectionSet& dirs, const Vec3& anisotropy) {
  check_anisotropy(anisotropy);
  const std::size_t n = dirs.size();
  if (n < 4) throw InvalidArgument("insufficient vertices for a closed surface (need at least 4 rays)");
  const auto p = scaled_points(dirs, anisotropy);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (norm(p[i] - p[j]) < kDuplicateTolerance)
        throw InvalidArgument("degenerate directions: " + std::to_string(i) + " and " + std::to_string(j) +
                              " coincide");

  auto tris = incremental_hull(p);

  std::vector<char> used(n, 0);
  for (const auto& t : tris)
    for (int v : t) used[static_cast<std::size_t>(v)] = 1;
  for (std::size_t i = 0; i < n; ++i)
    if (!used[i]) throw InvalidArgument("direction " + std::to_string(i) + " is not a hull vertex");

  for (const auto& t : tris) {
    const Vec3 centroid = p[t[0]] + p[t[1]] + p[t[2]];
    const Vec3 normal = cross(p[t[1]] - p[t[0]], p[t[2]] - p[t[0]]);
    if (!(dot(normal, centroid) > 0.0))
      throw InvalidArgument("degenerate directions: hull does not enclose the origin");
  }

  MeshTopology topo;
  topo.vertex_count = n;
  for (auto& t : tris) {
    const auto m = std::min_element(t.begin(), t.end()) - t.begin();
    std::rotate(t.begin(), t.begin() + m, t.end());
  }
  std::sort(tris.begin(), tris.end());
  topo.triangles = std::move(tris);
  for (const auto& t : topo.triangles)
    for (int k = 0; k < 3; ++k) {
      const int a = t[k];
      const int b = t[(k + 1) % 3];
      topo.edges.push_back({std::min(a, b), std::max(a, b)});
    }
  std::sort(topo.edges.begin(), topo.edges.end());
  topo.edges.erase(std::unique(topo.edges.begin(), topo.edges.end()), topo.edges.end());

  const auto V = static_cast<long>(n);
  const auto E = static_cast<long>(topo.edges.size());
  const auto T = static_cast<long>(topo.triangles.size());
  if (V - E + T != 2 || 2 * E != 3 * T)
    throw InvalidArgument("degenerate directions: hull is not a closed triangulated sphere");
  return topo;
}

ControlLayout control_layout(const MeshTopology& topo, const UnitDirectionSet& dirs, const Vec3& anisotropy) {
  check_anisotropy(anisotropy);
  if (dirs.size() != topo.vertex_count) throw InvalidArgument("topology was not built from these directions");
  const auto p = scaled_points(dirs, anisotropy);

  ControlLayout layout;
  layout.vertex_count = topo.vertex_count;
  layout.edge_count = topo.edges.size();
  layout.triangle_count = topo.triangles.size();
  layout.entries.reserve(topo.vertex_count + 2 * topo.edges.size() + topo.triangles.size());

  for (std::size_t v = 0; v < topo.vertex_count; ++v)
    layout.entries.push_back({ControlRole::vertex, static_cast<int>(v), 0, dirs.directions[v]});

  for (std::size_t e = 0; e < topo.edges.size(); ++e) {
    const Vec3& a = p[topo.edges[e][0]];
    const Vec3& b = p[topo.edges[e][1]];
    layout.entries.push_back({ControlRole::edge, static_cast<int>(e), 0, unscale((2.0 * a + b) / 3.0, anisotropy)});
    layout.entries.push_back({ControlRole::edge, static_cast<int>(e), 1, unscale((a + 2.0 * b) / 3.0, anisotropy)});
  }

  for (std::size_t t = 0; t < topo.triangles.size(); ++t) {
    const auto& tri = topo.triangles[t];
    const Vec3 centroid = (p[tri[0]] + p[tri[1]] + p[tri[2]]) / 3.0;
    layout.entries.push_back({ControlRole::interior, static_cast<int>(t), 0, unscale(centroid, anisotropy)});
  }
  return layout;
}

std::string to_string(LatticeKind kind) { return kind == LatticeKind::canonical ? "canonical" : "fibonacci"; }

LatticeKind parse_lattice_kind(const std::string& s) {
  if (s == "canonical") return LatticeKind::canonical;
  if (s == "fibonacci") return LatticeKind::fibonacci;
  throw InvalidArgument("unknown lattice kind '" + s + "' (expected canonical or fibonacci)");
}

LatticeKind default_lattice_kind(int rays) {
  return (rays == 4 || rays == 6 || rays == 12) ? LatticeKind::canonical : LatticeKind::fibonacci;
}

std::shared_ptr<const Lattice> make_lattice(const LatticeSpec& spec) {
  // Lattices are pure functions of their LatticeSpec; cache them for repeated fits.
  static std::mutex mutex;
  static std::vector<std::shared_ptr<const Lattice>> cache;
  {
    std::lock_guard lock(mutex);
    for (const auto& l : cache)
      if (l->spec == spec) return l;
  }

  auto lattice = std::make_shared<Lattice>();
  lattice->spec = spec;
  lattice->directions =
      spec.kind == LatticeKind::canonical ? canonical_directions(spec.rays) : fibonacci_directions(spec.rays);
  lattice->topology = build_topology(lattice->directions, spec.anisotropy);
  lattice->layout = control_layout(lattice->topology, lattice->directions, spec.anisotropy);

  std::lock_guard lock(mutex);
  for (const auto& l : cache)
    if (l->spec == spec) return l;
  cache.push_back(lattice);
  return lattice;
}

}  // namespace surfdist
