#include "surfdist/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "surfdist/errors.hpp"
#include "surfdist/parallel.hpp"

namespace surfdist {

void LossConfig::validate() const {
  if (!(lambda_d >= 0.0) || !std::isfinite(lambda_d)) throw InvalidArgument("lambda_d must be finite and >= 0");
  if (!(lambda_reg >= 0.0) || !std::isfinite(lambda_reg)) throw InvalidArgument("lambda_reg must be finite and >= 0");
  if (sample_level < 0) throw InvalidArgument("sample level must be >= 0");
}

double object_loss(double p, double p_hat) {
  const double q = std::clamp(p_hat, kProbabilityEpsilon, 1.0 - kProbabilityEpsilon);
  return -(p * std::log(q) + (1.0 - p) * std::log(1.0 - q));
}

namespace {

void check_lengths(std::span<const double> d, std::span<const double> d_hat) {
  if (d.size() != d_hat.size())
    throw InvalidArgument("distance vectors differ in length (" + std::to_string(d.size()) + " vs " +
                          std::to_string(d_hat.size()) + ")");
  if (d.empty()) throw InvalidArgument("distance vectors must not be empty");
}

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

double distance_loss(double p, std::span<const double> d, std::span<const double> d_hat, const LossConfig& cfg) {
  check_lengths(d, d_hat);
  const double n = static_cast<double>(d.size());
  double sum = 0.0;
  if (p > 0.0) {
    for (std::size_t k = 0; k < d.size(); ++k) sum += std::abs(d[k] - d_hat[k]);
    return p * (sum / n);
  }
  for (double v : d_hat) sum += std::abs(v);
  return cfg.lambda_reg * (sum / n);
}

std::vector<double> distance_loss_gradient(double p, std::span<const double> d, std::span<const double> d_hat,
                                           const LossConfig& cfg) {
  check_lengths(d, d_hat);
  const double n = static_cast<double>(d.size());
  std::vector<double> g(d.size());
  for (std::size_t k = 0; k < d.size(); ++k)
    g[k] = p > 0.0 ? p * sign(d_hat[k] - d[k]) / n : cfg.lambda_reg * sign(d_hat[k]) / n;
  return g;
}

double object_loss_gradient(double p, double p_hat) {
  if (p_hat < kProbabilityEpsilon || p_hat > 1.0 - kProbabilityEpsilon) return 0.0;
  return (p_hat - p) / (p_hat * (1.0 - p_hat));
}

namespace {

Vec3 stencil_offset(const SampleStencil& st, const InstanceShape& shape) {
  const auto& entries = shape.lattice->layout.entries;
  Vec3 offset;
  for (std::size_t k = 0; k < BezierTriangle::kControlCount; ++k)
    offset += st.weight[k] * (shape.distances[st.entry[k]] * entries[st.entry[k]].direction);
  return offset;
}

}  // namespace

std::vector<double> sample_distances(const InstanceShape& shape, int level) {
  const auto stencils = sample_stencils(*shape.lattice, level);
  std::vector<double> out(stencils.size());
  for (std::size_t s = 0; s < stencils.size(); ++s) out[s] = norm(stencil_offset(stencils[s], shape));
  return out;
}

std::vector<double> control_distance_gradient(double p, std::span<const double> d, const InstanceShape& shape,
                                              const LossConfig& cfg) {
  const auto& entries = shape.lattice->layout.entries;
  const auto stencils = sample_stencils(*shape.lattice, cfg.sample_level);
  std::vector<Vec3> rays(stencils.size());
  std::vector<double> d_hat(stencils.size());
  for (std::size_t s = 0; s < stencils.size(); ++s) {
    const Vec3 offset = stencil_offset(stencils[s], shape);
    d_hat[s] = norm(offset);
    // |offset| is not differentiable at 0; use the zero subgradient there.
    rays[s] = d_hat[s] > 0.0 ? offset / d_hat[s] : Vec3{};
  }
  const auto g_hat = distance_loss_gradient(p, d, d_hat, cfg);
  std::vector<double> grad(entries.size(), 0.0);
  for (std::size_t s = 0; s < stencils.size(); ++s)
    for (std::size_t k = 0; k < BezierTriangle::kControlCount; ++k) {
      const auto e = stencils[s].entry[k];
      grad[e] += g_hat[s] * stencils[s].weight[k] * dot(entries[e].direction, rays[s]);
    }
  return grad;
}

VoxelLossTerms voxel_loss_terms(double p, const VoxelPrediction& pred, const LabelVolume& vol, const VoxelIndex& voxel,
                                const LossConfig& cfg) {
  cfg.validate();
  VoxelLossTerms terms;
  terms.object = object_loss(p, pred.p_hat);
  if (cfg.lambda_d == 0.0) {
    terms.total = terms.object;
    return terms;
  }

  const Vec3 c = pred.shape.center;
  const auto samples = surface_samples(pred.shape, cfg.sample_level);
  std::vector<double> d_hat(samples.size());
  std::vector<Vec3> rays(samples.size());
  bool degenerate = false;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const Vec3 offset = samples.points[k] - c;
    d_hat[k] = norm(offset);
    if (d_hat[k] > 0.0)
      rays[k] = offset / d_hat[k];
    else
      degenerate = true;
  }
  if (degenerate) {
    const auto unit = surface_samples(InstanceShape::uniform(pred.shape.lattice, c, 1.0), cfg.sample_level);
    for (std::size_t k = 0; k < samples.size(); ++k)
      if (!(d_hat[k] > 0.0)) rays[k] = normalized(unit.points[k] - c);
  }

  std::vector<double> d(samples.size(), 0.0);
  if (p > 0.0) {
    const std::uint32_t id = vol.at(voxel);
    d = ground_truth_distances(vol, id, voxel, rays);
  }
  terms.distance = distance_loss(p, d, d_hat, cfg);
  terms.total = terms.object + cfg.lambda_d * terms.distance;
  return terms;
}

double voxel_loss(double p, const VoxelPrediction& pred, const LabelVolume& vol, const VoxelIndex& voxel,
                  const LossConfig& cfg) {
  return voxel_loss_terms(p, pred, vol, voxel, cfg).total;
}

double volume_loss(std::span<const VoxelPrediction> preds, const LabelVolume& vol, const TargetVolume& targets,
                   const LossConfig& cfg) {
  const std::size_t n = vol.grid.size();
  if (n == 0 || vol.labels.empty()) throw InvalidArgument("volume loss of an empty volume");
  if (preds.size() != n || targets.p.size() != n)
    throw InvalidArgument("expected one prediction and one target per voxel");
  std::vector<double> per_voxel(n);
  parallel_for(0, n, [&](std::size_t i) {
    per_voxel[i] = voxel_loss(targets.p[i], preds[i], vol, vol.grid.index_of(i), cfg);
  });
  double sum = 0.0;
  for (double v : per_voxel) sum += v;
  return sum / static_cast<double>(n);
}

}  // namespace surfdist
