// surfdist command-line driver. Exit codes: 0 ok, 2 usage or schema error,
// 3 I/O error, 4 numerical non-convergence.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "surfdist/errors.hpp"
#include "surfdist/fitting.hpp"
#include "surfdist/instance_model.hpp"
#include "surfdist/loss.hpp"
#include "surfdist/matching.hpp"
#include "surfdist/mesh.hpp"
#include "surfdist/serialization.hpp"
#include "surfdist/sphere_lattice.hpp"
#include "surfdist/volume.hpp"

namespace fs = std::filesystem;
using namespace surfdist;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitNonConvergence = 4;

struct NonConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Fails before any work when the output cannot be created.
void check_output_path(const std::string& path) {
  if (path.empty() || path == "-") return;
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty() && !fs::is_directory(parent))
    throw IoError("output directory '" + parent.string() + "' does not exist");
  if (fs::is_directory(path)) throw IoError("output path '" + path + "' is a directory");
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-")
    std::cout << text;
  else
    write_text_file(path, text);
}

ZyxTriple triple(const std::vector<double>& v) { return {v[0], v[1], v[2]}; }

Grid grid_from(const std::vector<std::size_t>& shape, const std::vector<double>& voxel_size) {
  Grid g{shape[0], shape[1], shape[2], from_zyx(triple(voxel_size))};
  g.validate();
  return g;
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

// Uniform in [lo, hi) from the raw 64-bit engine output, identical on every platform.
double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// ---------------------------------------------------------------- lattice

struct LatticeArgs {
  int rays = 6;
  std::string kind;
  std::vector<double> anisotropy{1.0, 1.0, 1.0};
  std::string out;
};

int run_lattice(const LatticeArgs& a) {
  check_output_path(a.out);
  LatticeSpec spec;
  spec.rays = a.rays;
  spec.kind = a.kind.empty() ? default_lattice_kind(a.rays) : parse_lattice_kind(a.kind);
  spec.anisotropy = from_zyx(triple(a.anisotropy));
  emit(a.out, lattice_to_json(*make_lattice(spec)));
  return 0;
}

// ---------------------------------------------------- reconstruct-sphere

struct ReconstructArgs {
  std::vector<int> radii{4, 8, 16, 32};
  std::vector<int> rays{6, 12, 96};
  std::vector<std::string> kinds{"surfdist", "stardist"};
  int level = 3;
  int subdiv = 3;
  std::string out;
};

int run_reconstruct(const ReconstructArgs& a) {
  check_output_path(a.out);
  std::vector<ModelKind> kinds;
  for (const auto& k : a.kinds) kinds.push_back(parse_model_kind(k));
  SphereFitOptions opts;
  opts.sample_level = a.level;
  opts.subdiv = a.subdiv;
  const auto reports = sweep(a.radii, a.rays, kinds, opts);
  std::ostringstream csv;
  write_sweep_csv(csv, reports);
  emit(a.out, csv.str());
  for (const auto& r : reports)
    if (!r.converged)
      throw NonConvergence("fit did not converge for radius " + std::to_string(r.radius) + ", " + std::to_string(r.rays) +
                           " rays");
  return 0;
}

// -------------------------------------------------------------------- fit

struct FitArgs {
  std::string volume;
  std::uint32_t instance_id = 1;
  int rays = 6;
  std::string kind;
  int level = kDefaultSampleLevel;
  int iterations = 300;
  std::string out;
};

// Innermost voxel of the instance; the first in C order on ties.
VoxelIndex innermost_voxel(const LabelVolume& vol, std::uint32_t id) {
  const auto edt = exterior_distance(vol);
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < vol.labels.size(); ++i)
    if (vol.labels[i] == id && (!best || edt[i] > edt[*best])) best = i;
  if (!best) throw InvalidArgument("instance " + std::to_string(id) + " does not occur in the volume");
  return vol.grid.index_of(*best);
}

int run_fit(const FitArgs& a) {
  check_output_path(a.out);
  const auto vol = load_volume(a.volume);
  LatticeSpec spec;
  spec.rays = a.rays;
  spec.kind = a.kind.empty() ? default_lattice_kind(a.rays) : parse_lattice_kind(a.kind);
  const auto lattice = make_lattice(spec);

  const VoxelIndex center_voxel = innermost_voxel(vol, a.instance_id);
  const Vec3 center = vol.grid.world(center_voxel);
  std::vector<double> init;
  for (const auto& e : lattice->layout.entries)
    init.push_back(ray_cast_mask_distance(vol, a.instance_id, center, e.direction));

  MaskFitOptions opts;
  opts.iterations = a.iterations;
  opts.sample_level = a.level;
  const auto shape = fit_mask(InstanceShape(lattice, center, init), vol, a.instance_id, opts);
  emit(a.out, instance_to_json(shape));
  return 0;
}

// --------------------------------------------------------------- voxelize

struct VoxelizeArgs {
  std::string instance;
  std::vector<std::size_t> grid;
  std::vector<double> voxel_size{1.0, 1.0, 1.0};
  int subdiv = 3;
  std::uint32_t label = 1;
  std::string dtype = "u16";
  std::string out;
};

int run_voxelize(const VoxelizeArgs& a) {
  check_output_path(a.out + ".json");
  const auto shape = instance_from_json(read_text_file(a.instance), a.instance);
  const Grid grid = grid_from(a.grid, a.voxel_size);
  auto vol = voxelize(shape, grid, a.subdiv, a.label);
  vol.dtype = parse_dtype(a.dtype);
  save_volume(vol, a.out);
  return 0;
}

// ------------------------------------------------------------- export-obj

struct ExportArgs {
  std::string instance;
  int subdiv = 2;
  std::string out;
};

int run_export(const ExportArgs& a) {
  check_output_path(a.out);
  const auto shape = instance_from_json(read_text_file(a.instance), a.instance);
  const auto mesh = to_triangle_mesh(shape, a.subdiv);
  std::ostringstream obj;
  write_obj(obj, mesh, "surfdist instance, subdiv " + std::to_string(a.subdiv));
  emit(a.out, obj.str());
  return 0;
}

// --------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string truth;
  std::string pred;
  std::vector<double> thresholds = default_thresholds();
  std::string out;
};

std::string metrics_row(const std::string& tau, const Metrics& m) {
  return tau + "," + fmt("%.6f", m.precision) + "," + fmt("%.6f", m.recall) + "," + fmt("%.6f", m.accuracy) + "," +
         fmt("%.6f", m.f1) + "," + fmt("%.6f", m.panoptic_quality) + "\n";
}

int run_evaluate(const EvaluateArgs& a) {
  check_output_path(a.out);
  const auto truth = load_volume(a.truth);
  const auto pred = load_volume(a.pred);
  const auto result = metrics_over_thresholds(truth, pred, a.thresholds);
  std::string csv = "tau,precision,recall,accuracy,f1,pq\n";
  for (const auto& [tau, m] : result.per_threshold) csv += metrics_row(fmt("%g", tau), m);
  csv += metrics_row("mean", result.mean);
  emit(a.out, csv);
  return 0;
}

// -------------------------------------------------------------------- nms

struct NmsArgs {
  std::string candidates;
  std::vector<std::size_t> grid;
  std::vector<double> voxel_size{1.0, 1.0, 1.0};
  double prob_threshold = 0.5;
  double iou_threshold = 0.5;
  int subdiv = 2;
  std::string out;
};

int run_nms(const NmsArgs& a) {
  check_output_path(a.out);
  const auto candidates = candidates_from_json(read_text_file(a.candidates), a.candidates);
  const Grid grid = grid_from(a.grid, a.voxel_size);
  const auto kept = nms(candidates, grid, a.prob_threshold, a.iou_threshold, a.subdiv);

  std::vector<Candidate> survivors;
  for (auto i : kept) survivors.push_back(candidates[i]);
  auto doc = nlohmann::ordered_json::parse(candidates_to_json(survivors));
  doc["kept"] = kept;
  emit(a.out, doc.dump(2) + "\n");
  return 0;
}

// --------------------------------------------------------------- gradcheck

struct GradcheckArgs {
  std::uint64_t seed = 0;
  int trials = 100;
  int rays = 6;
  int level = kDefaultSampleLevel;
  std::string out;
};

constexpr double kGradTolerance = 1e-4;

double relative_error(const std::vector<double>& analytic, const std::vector<double>& numeric) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    diff = std::max(diff, std::abs(analytic[i] - numeric[i]));
    scale = std::max({scale, std::abs(analytic[i]), std::abs(numeric[i])});
  }
  return scale > 0.0 ? diff / scale : diff;
}

template <class F>
std::vector<double> central_difference(const std::vector<double>& x, F&& f, double h) {
  std::vector<double> g(x.size());
  auto probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// Even trials use the foreground branch, odd trials the background branch.
int run_gradcheck(const GradcheckArgs& a) {
  check_output_path(a.out);
  if (a.trials < 1) throw InvalidArgument("at least one trial is required");
  LossConfig cfg;
  cfg.sample_level = a.level;
  cfg.validate();
  const auto lattice = make_lattice({default_lattice_kind(a.rays), a.rays, {1.0, 1.0, 1.0}});
  std::mt19937_64 rng(a.seed);
  constexpr double h = 1e-6;

  double worst_object = 0.0, worst_sample = 0.0, worst_control = 0.0;
  int failures = 0;
  std::string report = "trial,branch,object_rel_error,sample_rel_error,control_rel_error\n";
  for (int t = 0; t < a.trials; ++t) {
    const bool foreground = t % 2 == 0;
    const double p = foreground ? uniform(rng, 0.05, 1.0) : 0.0;
    const double p_hat = uniform(rng, 0.02, 0.98);

    std::vector<double> x(lattice->parameter_count());
    for (auto& v : x) v = uniform(rng, 1.0, 3.0);
    const InstanceShape shape(lattice, {}, x);
    const auto d_hat = sample_distances(shape, cfg.sample_level);
    // Targets stay clear of the |d - d_hat| kink so central differences are valid.
    std::vector<double> d(d_hat.size());
    for (std::size_t s = 0; s < d.size(); ++s) {
      const double gap = uniform(rng, 0.05, 0.5);
      d[s] = d_hat[s] + (rng() & 1 ? gap : -gap);
    }

    const double e_object = relative_error(
        {object_loss_gradient(p, p_hat)},
        central_difference({p_hat}, [&](const std::vector<double>& q) { return object_loss(p, q[0]); }, h));
    const double e_sample = relative_error(
        distance_loss_gradient(p, d, d_hat, cfg),
        central_difference(d_hat, [&](const std::vector<double>& q) { return distance_loss(p, d, q, cfg); }, h));
    const double e_control = relative_error(
        control_distance_gradient(p, d, shape, cfg), central_difference(x, [&](const std::vector<double>& q) {
          return distance_loss(p, d, sample_distances(InstanceShape(lattice, {}, q), cfg.sample_level), cfg);
        }, h));

    worst_object = std::max(worst_object, e_object);
    worst_sample = std::max(worst_sample, e_sample);
    worst_control = std::max(worst_control, e_control);
    if (std::max({e_object, e_sample, e_control}) > kGradTolerance) ++failures;
    report += std::to_string(t) + "," + (foreground ? "foreground" : "background") + "," + fmt("%.3e", e_object) +
              "," + fmt("%.3e", e_sample) + "," + fmt("%.3e", e_control) + "\n";
  }
  if (!a.out.empty()) write_text_file(a.out, report);
  std::cout << "gradcheck trials=" << a.trials << " seed=" << a.seed << " max_rel_error object=" << fmt("%.3e", worst_object)
            << " sample=" << fmt("%.3e", worst_sample) << " control=" << fmt("%.3e", worst_control)
            << " tolerance=" << fmt("%.0e", kGradTolerance) << " failures=" << failures << "\n";
  if (failures > 0) throw NonConvergence(std::to_string(failures) + " gradient trials exceeded the tolerance");
  return 0;
}

// --------------------------------------------------------------- loss-eval

struct LossEvalArgs {
  std::string volume;
  std::string instance;
  double prob = 0.5;
  double lambda_d = 0.1;
  double lambda_reg = 1e-4;
  int level = kDefaultSampleLevel;
  std::vector<long> voxel;
  std::string out;
};

int run_loss_eval(const LossEvalArgs& a) {
  check_output_path(a.out);
  const auto vol = load_volume(a.volume);
  const auto shape = instance_from_json(read_text_file(a.instance), a.instance);
  if (!(a.prob >= 0.0 && a.prob <= 1.0)) throw InvalidArgument("--prob must lie in [0, 1]");
  LossConfig cfg{a.lambda_d, a.lambda_reg, a.level};
  cfg.validate();

  const VoxelIndex voxel = a.voxel.empty() ? vol.grid.voxel_at(shape.center) : VoxelIndex{a.voxel[0], a.voxel[1], a.voxel[2]};
  if (!vol.grid.contains(voxel)) throw InvalidArgument("evaluation voxel lies outside the volume");
  const auto targets = object_probabilities(vol);
  const double p = targets.p[vol.grid.offset(static_cast<std::size_t>(voxel.z), static_cast<std::size_t>(voxel.y),
                                             static_cast<std::size_t>(voxel.x))];
  // The prediction is anchored at the evaluated voxel.
  const VoxelPrediction pred{a.prob, InstanceShape(shape.lattice, vol.grid.world(voxel), shape.distances)};
  const auto terms = voxel_loss_terms(p, pred, vol, voxel, cfg);

  std::string csv = "z,y,x,p,p_hat,object,distance,total\n";
  csv += std::to_string(voxel.z) + "," + std::to_string(voxel.y) + "," + std::to_string(voxel.x) + "," +
         fmt("%.17g", p) + "," + fmt("%.17g", a.prob) + "," + fmt("%.17g", terms.object) + "," +
         fmt("%.17g", terms.distance) + "," + fmt("%.17g", terms.total) + "\n";
  emit(a.out, csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SurfDist star-convex Bezier-surface instances: lattices, fitting, voxelization and evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "surfdist 1.0.0");
  std::function<int()> action;
  auto bind = [&action](CLI::App* sub, std::function<int()> fn) { sub->callback([&action, fn] { action = fn; }); };

  LatticeArgs lat;
  auto* s_lat = app.add_subcommand("lattice", "Emit lattice topology and control layout as JSON");
  s_lat->add_option("--rays", lat.rays, "Number of vertex rays V (>= 4)")->required();
  s_lat->add_option("--kind", lat.kind, "canonical (V in 4, 6, 12) or fibonacci; default by V");
  s_lat->add_option("--anisotropy", lat.anisotropy, "Voxel size z,y,x")->expected(3)->delimiter(',');
  s_lat->add_option("--out", lat.out, "Output JSON (default stdout)");
  bind(s_lat, [&] { return run_lattice(lat); });

  ReconstructArgs rec;
  auto* s_rec = app.add_subcommand("reconstruct-sphere", "Sphere reconstruction sweep, CSV output");
  s_rec->add_option("--radius", rec.radii, "Sphere radii in voxels")->delimiter(',');
  s_rec->add_option("--rays", rec.rays, "Vertex ray counts")->delimiter(',');
  s_rec->add_option("--kinds", rec.kinds, "Model kinds: surfdist, stardist")->delimiter(',');
  s_rec->add_option("--level", rec.level, "Surface sample level for residuals and RMS");
  s_rec->add_option("--subdiv", rec.subdiv, "Mesh subdivision for voxelization");
  s_rec->add_option("--out", rec.out, "Output CSV (default stdout)");
  bind(s_rec, [&] { return run_reconstruct(rec); });

  FitArgs fit;
  auto* s_fit = app.add_subcommand("fit", "Fit an instance shape to one labeled object");
  s_fit->add_option("--volume", fit.volume, "Label volume (.json/.raw pair)")->required();
  s_fit->add_option("--instance-id", fit.instance_id, "Label to fit")->required();
  s_fit->add_option("--rays", fit.rays, "Number of vertex rays V");
  s_fit->add_option("--kind", fit.kind, "canonical or fibonacci; default by V");
  s_fit->add_option("--level", fit.level, "Surface sample level");
  s_fit->add_option("--iterations", fit.iterations, "Descent iterations");
  s_fit->add_option("--out", fit.out, "Output instance JSON (default stdout)");
  bind(s_fit, [&] { return run_fit(fit); });

  VoxelizeArgs vox;
  auto* s_vox = app.add_subcommand("voxelize", "Rasterize an instance into a label volume");
  s_vox->add_option("--instance", vox.instance, "Instance JSON")->required();
  s_vox->add_option("--grid", vox.grid, "Grid shape z,y,x")->required()->expected(3)->delimiter(',');
  s_vox->add_option("--voxel-size", vox.voxel_size, "Voxel size z,y,x")->expected(3)->delimiter(',');
  s_vox->add_option("--subdiv", vox.subdiv, "Mesh subdivision");
  s_vox->add_option("--label", vox.label, "Label written inside the instance");
  s_vox->add_option("--dtype", vox.dtype, "u8, u16 or u32");
  s_vox->add_option("--out", vox.out, "Output volume base path")->required();
  bind(s_vox, [&] { return run_voxelize(vox); });

  ExportArgs exp;
  auto* s_exp = app.add_subcommand("export-obj", "Export an instance surface as Wavefront OBJ");
  s_exp->add_option("--instance", exp.instance, "Instance JSON")->required();
  s_exp->add_option("--subdiv", exp.subdiv, "Mesh subdivision");
  s_exp->add_option("--out", exp.out, "Output OBJ (default stdout)");
  bind(s_exp, [&] { return run_export(exp); });

  EvaluateArgs ev;
  auto* s_ev = app.add_subcommand("evaluate", "Matching metrics between two label volumes, CSV output");
  s_ev->add_option("--truth", ev.truth, "Ground-truth label volume")->required();
  s_ev->add_option("--pred", ev.pred, "Predicted label volume")->required();
  s_ev->add_option("--thresholds", ev.thresholds, "IoU thresholds")->delimiter(',');
  s_ev->add_option("--out", ev.out, "Output CSV (default stdout)");
  bind(s_ev, [&] { return run_evaluate(ev); });

  NmsArgs nm;
  auto* s_nms = app.add_subcommand("nms", "Non-maximum suppression of candidate instances");
  s_nms->add_option("--candidates", nm.candidates, "Candidates JSON")->required();
  s_nms->add_option("--grid", nm.grid, "Grid shape z,y,x")->required()->expected(3)->delimiter(',');
  s_nms->add_option("--voxel-size", nm.voxel_size, "Voxel size z,y,x")->expected(3)->delimiter(',');
  s_nms->add_option("--prob-threshold", nm.prob_threshold, "Minimum candidate probability");
  s_nms->add_option("--iou-threshold", nm.iou_threshold, "Suppress when voxel IoU exceeds this");
  s_nms->add_option("--subdiv", nm.subdiv, "Mesh subdivision for rasterization");
  s_nms->add_option("--out", nm.out, "Output JSON (default stdout)");
  bind(s_nms, [&] { return run_nms(nm); });

  GradcheckArgs gc;
  auto* s_gc = app.add_subcommand("gradcheck", "Analytic loss gradients against central differences");
  s_gc->add_option("--seed", gc.seed, "Random seed");
  s_gc->add_option("--trials", gc.trials, "Number of randomized trials");
  s_gc->add_option("--rays", gc.rays, "Number of vertex rays V");
  s_gc->add_option("--level", gc.level, "Surface sample level");
  s_gc->add_option("--out", gc.out, "Optional per-trial CSV");
  bind(s_gc, [&] { return run_gradcheck(gc); });

  LossEvalArgs le;
  auto* s_le = app.add_subcommand("loss-eval", "Per-voxel loss of a predicted shape against a label volume");
  s_le->add_option("--volume", le.volume, "Label volume")->required();
  s_le->add_option("--instance", le.instance, "Predicted instance JSON")->required();
  s_le->add_option("--prob", le.prob, "Predicted object probability");
  s_le->add_option("--lambda-d", le.lambda_d, "Distance loss weight");
  s_le->add_option("--lambda-reg", le.lambda_reg, "Background regularization weight");
  s_le->add_option("--level", le.level, "Surface sample level");
  s_le->add_option("--voxel", le.voxel, "Voxel z,y,x (default: the instance center)")->expected(3)->delimiter(',');
  s_le->add_option("--out", le.out, "Output CSV (default stdout)");
  bind(s_le, [&] { return run_loss_eval(le); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    return action();
  } catch (const SchemaError& e) {
    std::cerr << "surfdist: " << e.what() << "\n";
    return kExitUsage;
  } catch (const FormatError& e) {
    std::cerr << "surfdist: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    std::cerr << "surfdist: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "surfdist: " << e.what() << "\n";
    return kExitIo;
  } catch (const NonConvergence& e) {
    std::cerr << "surfdist: " << e.what() << "\n";
    return kExitNonConvergence;
  } catch (const std::exception& e) {
    std::cerr << "surfdist: internal error: " << e.what() << "\n";
    return 1;
  }
}
