#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "surfdist/instance_model.hpp"
#include "surfdist/volume.hpp"

namespace surfdist {

enum class ModelKind { surfdist, stardist };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& s);

struct ReconstructionReport {
  int radius = 0;
  ModelKind kind = ModelKind::surfdist;
  int rays = 0;
  std::size_t params = 0;
  double iou = 0.0;
  double rms_radial_error = 0.0;
  bool converged = true;
  // SurfDist only: the shared edge and face control distances after fitting.
  double edge_scalar = 0.0;
  double face_scalar = 0.0;
  int iterations = 0;
};

// (2r+1)^3 grid, label 1 wherever the center-to-center distance from the
// middle voxel is at most r.
LabelVolume sphere_mask(int radius);

struct SphereFitOptions {
  int sample_level = 3;  // residual / RMS samples
  int subdiv = 3;        // voxelization mesh
  // false: every edge and face entry gets its own free distance.
  bool share_scalars = true;
  int max_iterations = 200;
};

ReconstructionReport reconstruct_sphere_stardist(int radius, int rays, const SphereFitOptions& options = {});
ReconstructionReport reconstruct_sphere_surfdist(int radius, int rays, const SphereFitOptions& options = {});

struct MaskFitOptions {
  int iterations = 300;
  int sample_level = 2;
  // Adam step decays geometrically from initial to final, both relative to
  // the mean mask radius seen from the center.
  double initial_step = 0.1;
  double final_step = 1e-3;
};

// Projected Adam descent on mean |d - d_hat| with per-iteration rays from the
// center through the current surface samples. Deterministic. Throws
// InvalidArgument when the center is not inside the instance.
InstanceShape fit_mask(const InstanceShape& init, const LabelVolume& vol, std::uint32_t instance_id,
                       const MaskFitOptions& options = {});

// Cross product radii x kinds x rays, in that nesting order.
std::vector<ReconstructionReport> sweep(const std::vector<int>& radii, const std::vector<int>& rays,
                                        const std::vector<ModelKind>& kinds, const SphereFitOptions& options = {});

// Header `radius,kind,rays,params,iou,rms_radial_error,converged`, LF endings.
void write_sweep_csv(std::ostream& out, const std::vector<ReconstructionReport>& reports);

}  // namespace surfdist
