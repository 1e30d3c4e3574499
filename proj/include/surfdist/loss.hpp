#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "surfdist/instance_model.hpp"
#include "surfdist/volume.hpp"

namespace surfdist {

struct LossConfig {
  double lambda_d = 0.1;
  double lambda_reg = 1e-4;
  int sample_level = kDefaultSampleLevel;

  void validate() const;
};

// Predicted probability is clamped to [eps, 1 - eps] before taking logs.
inline constexpr double kProbabilityEpsilon = 1e-7;

// Binary cross-entropy between the target probability and the prediction.
double object_loss(double p, double p_hat);

// p * mean|d - d_hat| when p > 0, lambda_reg * mean|d_hat| when p == 0.
double distance_loss(double p, std::span<const double> d, std::span<const double> d_hat, const LossConfig& cfg);

// d/d(d_hat) of distance_loss. The subgradient of |x| at 0 is taken as 0.
std::vector<double> distance_loss_gradient(double p, std::span<const double> d, std::span<const double> d_hat,
                                           const LossConfig& cfg);

// d/d(p_hat) of object_loss; 0 where the clamp is active.
double object_loss_gradient(double p, double p_hat);

// Distance of every surface sample (at `level`) from the shape's center.
std::vector<double> sample_distances(const InstanceShape& shape, int level);

// d/d(distances) of distance_loss(p, d, sample_distances(shape, cfg.sample_level)),
// with d held fixed.
std::vector<double> control_distance_gradient(double p, std::span<const double> d, const InstanceShape& shape,
                                              const LossConfig& cfg);

// Network output at one voxel: probability plus a shape centered on the voxel.
struct VoxelPrediction {
  double p_hat = 0.0;
  InstanceShape shape;
};

struct VoxelLossTerms {
  double object = 0.0;
  double distance = 0.0;
  double total = 0.0;
};

// Loss at `voxel`. The predicted shape is sampled at cfg.sample_level; rays K
// run from the voxel through every sample, d_hat is each sample's distance
// from the voxel and d is the mask distance along the same ray. Samples that
// coincide with the voxel (zero distances) take their ray from the
// unit-distance shape and keep d_hat = 0. `p` is the target at the voxel.
VoxelLossTerms voxel_loss_terms(double p, const VoxelPrediction& pred, const LabelVolume& vol, const VoxelIndex& voxel,
                                const LossConfig& cfg);

double voxel_loss(double p, const VoxelPrediction& pred, const LabelVolume& vol, const VoxelIndex& voxel,
                  const LossConfig& cfg);

// Mean voxel_loss over the volume. `preds` and `targets` are in voxel order.
// Per-voxel terms are summed in voxel order regardless of thread count.
double volume_loss(std::span<const VoxelPrediction> preds, const LabelVolume& vol, const TargetVolume& targets,
                   const LossConfig& cfg);

}  // namespace surfdist
