#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "surfdist/parallel.hpp"
#include "surfdist/volume.hpp"

namespace surfdist {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One line of the separable transform. `labels` and `f` are the line's
// labels and incoming squared distances; the result replaces `f`. Each run of
// equal labels is handled independently: a voxel's candidates are the run's
// own entries (through the lower parabola envelope) and the voxels just past
// either end of the run, which carry a different label by construction.
// With `first` set there is no incoming distance: only run ends count.
void transform_line(const std::vector<std::uint32_t>& labels, std::vector<double>& f, double weight, bool first,
                    bool pad, std::vector<int>& sites, std::vector<double>& bounds, std::vector<double>& out) {
  const long n = static_cast<long>(labels.size());
  out.assign(labels.size(), kInf);
  long s = 0;
  while (s < n) {
    long e = s;
    while (e + 1 < n && labels[e + 1] == labels[s]) ++e;
    const bool has_lo = s > 0 || pad;
    const bool has_hi = e < n - 1 || pad;

    if (!first) {
      sites.clear();
      bounds.clear();
      for (long q = s; q <= e; ++q) {
        if (!std::isfinite(f[q])) continue;
        const double fq = f[q] + weight * static_cast<double>(q * q);
        while (!sites.empty()) {
          const long p = sites.back();
          const double x = (fq - (f[p] + weight * static_cast<double>(p * p))) / (2.0 * weight * static_cast<double>(q - p));
          if (x <= bounds.back()) {
            sites.pop_back();
            bounds.pop_back();
          } else {
            sites.push_back(static_cast<int>(q));
            bounds.push_back(x);
            break;
          }
        }
        if (sites.empty()) {
          sites.push_back(static_cast<int>(q));
          bounds.push_back(-kInf);
        }
      }
      std::size_t k = 0;
      for (long q = s; q <= e && !sites.empty(); ++q) {
        while (k + 1 < sites.size() && bounds[k + 1] < static_cast<double>(q)) ++k;
        const long d = q - sites[k];
        out[q] = f[sites[k]] + weight * static_cast<double>(d * d);
      }
    }

    for (long q = s; q <= e; ++q) {
      if (has_lo) {
        const long d = q - (s - 1);
        out[q] = std::min(out[q], weight * static_cast<double>(d * d));
      }
      if (has_hi) {
        const long d = (e + 1) - q;
        out[q] = std::min(out[q], weight * static_cast<double>(d * d));
      }
    }
    s = e + 1;
  }
  f.swap(out);
}

// Applies transform_line along one axis of the volume, in parallel over lines.
void transform_axis(const LabelVolume& vol, std::vector<double>& d2, int axis, bool pad) {
  const Grid& g = vol.grid;
  const std::size_t n = axis == 0 ? g.nx : axis == 1 ? g.ny : g.nz;
  const std::size_t stride = axis == 0 ? 1 : axis == 1 ? g.nx : g.nx * g.ny;
  const double spacing = axis == 0 ? g.anisotropy.x : axis == 1 ? g.anisotropy.y : g.anisotropy.z;
  const double weight = spacing * spacing;
  const std::size_t lines = g.size() / n;

  // Line l starts at the l-th offset whose coordinate along `axis` is zero.
  auto line_start = [&](std::size_t l) -> std::size_t {
    if (axis == 0) return l * g.nx;
    if (axis == 1) return (l / g.nx) * g.nx * g.ny + (l % g.nx);
    return l;
  };

  parallel_for(0, lines, [&](std::size_t l) {
    thread_local std::vector<std::uint32_t> labels;
    thread_local std::vector<double> f, out, bounds;
    thread_local std::vector<int> sites;
    labels.resize(n);
    f.resize(n);
    const std::size_t start = line_start(l);
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = vol.labels[start + i * stride];
      f[i] = d2[start + i * stride];
    }
    transform_line(labels, f, weight, axis == 0, pad, sites, bounds, out);
    for (std::size_t i = 0; i < n; ++i) d2[start + i * stride] = f[i];
  });
}

}  // namespace

std::vector<double> exterior_distance(const LabelVolume& vol) {
  vol.grid.validate();
  const bool uniform =
      std::all_of(vol.labels.begin(), vol.labels.end(), [&](std::uint32_t l) { return l == vol.labels.front(); });
  std::vector<double> d2(vol.grid.size(), kInf);
  transform_axis(vol, d2, 0, uniform);
  transform_axis(vol, d2, 1, uniform);
  transform_axis(vol, d2, 2, uniform);
  for (auto& v : d2) v = std::sqrt(v);
  return d2;
}

TargetVolume object_probabilities(const LabelVolume& vol) {
  const auto dist = exterior_distance(vol);
  std::map<std::uint32_t, double> peak;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const auto l = vol.labels[i];
    if (l == 0) continue;
    auto [it, fresh] = peak.emplace(l, dist[i]);
    if (!fresh) it->second = std::max(it->second, dist[i]);
  }
  TargetVolume out{vol.grid, std::vector<double>(dist.size(), 0.0)};
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const auto l = vol.labels[i];
    if (l != 0) out.p[i] = dist[i] / peak.at(l);
  }
  return out;
}

}  // namespace surfdist
