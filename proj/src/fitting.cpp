#include "surfdist/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "surfdist/errors.hpp"
#include "surfdist/least_squares.hpp"
#include "surfdist/loss.hpp"
#include "surfdist/matching.hpp"
#include "surfdist/parallel.hpp"

namespace surfdist {

std::string to_string(ModelKind kind) { return kind == ModelKind::surfdist ? "surfdist" : "stardist"; }

ModelKind parse_model_kind(const std::string& s) {
  if (s == "surfdist") return ModelKind::surfdist;
  if (s == "stardist") return ModelKind::stardist;
  throw InvalidArgument("unknown model kind '" + s + "' (expected surfdist or stardist)");
}

LabelVolume sphere_mask(int radius) {
  if (radius < 1) throw InvalidArgument("sphere radius must be at least 1");
  const auto n = static_cast<std::size_t>(2 * radius + 1);
  LabelVolume vol(Grid{n, n, n, {1.0, 1.0, 1.0}}, Dtype::u8);
  const long r2 = static_cast<long>(radius) * radius;
  for (long z = 0; z < static_cast<long>(n); ++z)
    for (long y = 0; y < static_cast<long>(n); ++y)
      for (long x = 0; x < static_cast<long>(n); ++x) {
        const long dz = z - radius, dy = y - radius, dx = x - radius;
        if (dz * dz + dy * dy + dx * dx <= r2) vol.at({z, y, x}) = 1;
      }
  return vol;
}

namespace {

std::shared_ptr<const Lattice> sphere_lattice_for(int rays) {
  if (rays < 4) throw InvalidArgument("insufficient vertices for a closed surface (need at least 4 rays)");
  return make_lattice({default_lattice_kind(rays), rays, {1.0, 1.0, 1.0}});
}

double rms_radial_error(const SurfaceSampleSet& samples, double radius) {
  double sum = 0.0;
  for (const auto& s : samples.points) {
    const double e = norm(s - samples.center) - radius;
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(samples.size()));
}

// Measured center-to-boundary length along each vertex ray of the lattice.
std::vector<double> vertex_radial_lengths(const LabelVolume& mask, const Lattice& lattice, const VoxelIndex& center) {
  return ground_truth_distances(mask, 1, center, lattice.directions.directions);
}

}  // namespace

ReconstructionReport reconstruct_sphere_stardist(int radius, int rays, const SphereFitOptions& options) {
  const auto mask = sphere_mask(radius);
  const auto lattice = sphere_lattice_for(rays);
  const VoxelIndex center_voxel{radius, radius, radius};
  const Vec3 center = mask.grid.world(center_voxel);

  const PolyhedralInstance poly(lattice, center, vertex_radial_lengths(mask, *lattice, center_voxel));

  ReconstructionReport report;
  report.radius = radius;
  report.kind = ModelKind::stardist;
  report.rays = rays;
  report.params = static_cast<std::size_t>(rays);
  report.iou = pair_iou(voxelize(poly, mask.grid), mask);
  report.rms_radial_error = rms_radial_error(polyhedron_samples(poly, options.sample_level), radius);
  report.converged = true;
  return report;
}

ReconstructionReport reconstruct_sphere_surfdist(int radius, int rays, const SphereFitOptions& options) {
  const auto mask = sphere_mask(radius);
  const auto lattice = sphere_lattice_for(rays);
  const auto& layout = lattice->layout;
  const VoxelIndex center_voxel{radius, radius, radius};
  const Vec3 center = mask.grid.world(center_voxel);

  const auto vertex_lengths = vertex_radial_lengths(mask, *lattice, center_voxel);
  double mean_vertex = 0.0;
  for (double d : vertex_lengths) mean_vertex += d;
  mean_vertex /= static_cast<double>(vertex_lengths.size());

  // Free parameters: [edge, face] when shared, else one per edge entry then one per face entry.
  const std::size_t n_edge = 2 * layout.edge_count;
  const std::size_t n_face = layout.triangle_count;
  auto expand = [&](const std::vector<double>& x) {
    std::vector<double> d(layout.size());
    for (std::size_t v = 0; v < layout.vertex_count; ++v) d[v] = vertex_lengths[v];
    for (std::size_t k = 0; k < n_edge; ++k) d[layout.vertex_count + k] = options.share_scalars ? x[0] : x[k];
    for (std::size_t k = 0; k < n_face; ++k)
      d[layout.vertex_count + n_edge + k] = options.share_scalars ? x[1] : x[n_edge + k];
    return d;
  };

  const auto stencils = sample_stencils(*lattice, options.sample_level);
  const double r = static_cast<double>(radius);
  auto residuals = [&](const std::vector<double>& x) {
    const auto d = expand(x);
    std::vector<double> res(stencils.size());
    for (std::size_t s = 0; s < stencils.size(); ++s) {
      Vec3 offset;
      for (std::size_t k = 0; k < BezierTriangle::kControlCount; ++k) {
        const auto e = stencils[s].entry[k];
        offset += stencils[s].weight[k] * (d[e] * layout.entries[e].direction);
      }
      res[s] = norm(offset) - r;
    }
    return res;
  };

  const std::size_t n_params = options.share_scalars ? 2 : n_edge + n_face;
  LeastSquaresOptions ls;
  ls.max_iterations = options.max_iterations;
  const auto fit = levenberg_marquardt(residuals, std::vector<double>(n_params, mean_vertex), ls);

  auto distances = expand(fit.x);
  for (auto& d : distances) d = std::max(d, 0.0);
  const InstanceShape shape(lattice, center, std::move(distances));

  ReconstructionReport report;
  report.radius = radius;
  report.kind = ModelKind::surfdist;
  report.rays = rays;
  report.params = lattice->parameter_count();
  report.iou = pair_iou(voxelize(shape, mask.grid, options.subdiv), mask);
  report.rms_radial_error = rms_radial_error(surface_samples(shape, options.sample_level), r);
  report.converged = fit.converged;
  report.iterations = fit.iterations;
  if (options.share_scalars) {
    report.edge_scalar = fit.x[0];
    report.face_scalar = fit.x[1];
  }
  return report;
}

InstanceShape fit_mask(const InstanceShape& init, const LabelVolume& vol, std::uint32_t instance_id,
                       const MaskFitOptions& options) {
  const Vec3 c = init.center;
  if (instance_id == 0 || vol.label_or_background(vol.grid.voxel_at(c)) != instance_id)
    throw InvalidArgument("fit center lies outside instance " + std::to_string(instance_id));
  if (options.iterations < 0) throw InvalidArgument("iteration count must be nonnegative");

  const auto& lattice = *init.lattice;
  const auto& layout = lattice.layout;
  const auto stencils = sample_stencils(lattice, options.sample_level);
  const std::size_t n = stencils.size();
  const std::size_t params = layout.size();

  // Fallback rays for samples that collapse onto the center.
  std::vector<Vec3> unit_rays(n);
  for (std::size_t s = 0; s < n; ++s) {
    Vec3 offset;
    for (std::size_t k = 0; k < BezierTriangle::kControlCount; ++k)
      offset += stencils[s].weight[k] * layout.entries[stencils[s].entry[k]].direction;
    unit_rays[s] = normalized(offset);
  }

  double scale = 0.0;
  for (const auto& ray : unit_rays) scale += ray_cast_mask_distance(vol, instance_id, c, ray);
  scale = std::max(scale / static_cast<double>(n), vol.grid.min_spacing());

  std::vector<double> x = init.distances;
  std::vector<double> m1(params, 0.0), m2(params, 0.0), grad(params);
  std::vector<double> d(n), d_hat(n);
  std::vector<Vec3> rays(n);
  constexpr double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-12;
  const LossConfig cfg;

  for (int t = 1; t <= options.iterations; ++t) {
    for (std::size_t s = 0; s < n; ++s) {
      Vec3 offset;
      for (std::size_t k = 0; k < BezierTriangle::kControlCount; ++k) {
        const auto e = stencils[s].entry[k];
        offset += stencils[s].weight[k] * (x[e] * layout.entries[e].direction);
      }
      d_hat[s] = norm(offset);
      rays[s] = d_hat[s] > 0.0 ? offset / d_hat[s] : unit_rays[s];
      d[s] = ray_cast_mask_distance(vol, instance_id, c, rays[s]);
    }
    const auto g_hat = distance_loss_gradient(1.0, d, d_hat, cfg);
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t s = 0; s < n; ++s)
      for (std::size_t k = 0; k < BezierTriangle::kControlCount; ++k) {
        const auto e = stencils[s].entry[k];
        grad[e] += g_hat[s] * stencils[s].weight[k] * dot(layout.entries[e].direction, rays[s]);
      }

    const double progress = options.iterations > 1 ? static_cast<double>(t - 1) / (options.iterations - 1) : 0.0;
    const double step =
        scale * options.initial_step * std::pow(options.final_step / options.initial_step, progress);
    const double bias1 = 1.0 - std::pow(beta1, t), bias2 = 1.0 - std::pow(beta2, t);
    for (std::size_t e = 0; e < params; ++e) {
      m1[e] = beta1 * m1[e] + (1.0 - beta1) * grad[e];
      m2[e] = beta2 * m2[e] + (1.0 - beta2) * grad[e] * grad[e];
      const double update = step * (m1[e] / bias1) / (std::sqrt(m2[e] / bias2) + adam_eps);
      x[e] = std::max(0.0, x[e] - update);
    }
  }
  return InstanceShape(init.lattice, c, std::move(x));
}

std::vector<ReconstructionReport> sweep(const std::vector<int>& radii, const std::vector<int>& rays,
                                        const std::vector<ModelKind>& kinds, const SphereFitOptions& options) {
  struct Config {
    int radius;
    ModelKind kind;
    int rays;
  };
  std::vector<Config> configs;
  for (int r : radii)
    for (auto k : kinds)
      for (int v : rays) configs.push_back({r, k, v});
  // Validate up front so a bad entry fails before any work starts.
  for (const auto& c : configs) {
    if (c.radius < 1) throw InvalidArgument("sphere radius must be at least 1");
    sphere_lattice_for(c.rays);
  }
  std::vector<ReconstructionReport> reports(configs.size());
  parallel_for(0, configs.size(), [&](std::size_t i) {
    const auto& c = configs[i];
    reports[i] = c.kind == ModelKind::surfdist ? reconstruct_sphere_surfdist(c.radius, c.rays, options)
                                               : reconstruct_sphere_stardist(c.radius, c.rays, options);
  });
  return reports;
}

void write_sweep_csv(std::ostream& out, const std::vector<ReconstructionReport>& reports) {
  out << "radius,kind,rays,params,iou,rms_radial_error,converged\n";
  char buf[256];
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, "%d,%s,%d,%zu,%.6f,%.6f,%s\n", r.radius, to_string(r.kind).c_str(), r.rays, r.params,
                  r.iou, r.rms_radial_error, r.converged ? "true" : "false");
    out << buf;
  }
}

}  // namespace surfdist
