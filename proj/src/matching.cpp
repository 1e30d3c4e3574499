#include "surfdist/matching.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include "surfdist/errors.hpp"
#include "surfdist/simd/kernels.hpp"

namespace surfdist {

namespace {

void check_same_grid(const LabelVolume& a, const LabelVolume& b) {
  if (a.grid.nz != b.grid.nz || a.grid.ny != b.grid.ny || a.grid.nx != b.grid.nx)
    throw InvalidArgument("volume shapes differ");
  if (a.labels.size() != a.grid.size() || b.labels.size() != b.grid.size())
    throw InvalidArgument("label count does not match volume shape");
}

std::vector<std::uint8_t> binary(const LabelVolume& v) {
  std::vector<std::uint8_t> out(v.labels.size());
  std::transform(v.labels.begin(), v.labels.end(), out.begin(), [](std::uint32_t l) { return l != 0 ? 1 : 0; });
  return out;
}

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

}  // namespace

double pair_iou(const LabelVolume& a, const LabelVolume& b) {
  check_same_grid(a, b);
  const auto ma = binary(a);
  const auto mb = binary(b);
  const auto inter = simd::count_overlap(ma, mb);
  const auto na = simd::count_overlap(ma, ma);
  const auto nb = simd::count_overlap(mb, mb);
  const auto uni = na + nb - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

IouMatrix iou_matrix(const LabelVolume& truth, const LabelVolume& pred) {
  check_same_grid(truth, pred);
  std::map<std::uint32_t, std::size_t> truth_area, pred_area;
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> overlap;
  for (std::size_t i = 0; i < truth.labels.size(); ++i) {
    const auto t = truth.labels[i];
    const auto p = pred.labels[i];
    if (t != 0) ++truth_area[t];
    if (p != 0) ++pred_area[p];
    if (t != 0 && p != 0) ++overlap[{t, p}];
  }
  IouMatrix m;
  for (const auto& [id, area] : truth_area) m.truth_ids.push_back(id);
  for (const auto& [id, area] : pred_area) m.pred_ids.push_back(id);
  m.iou.assign(m.truth_ids.size() * m.pred_ids.size(), 0.0);
  for (std::size_t ti = 0; ti < m.truth_ids.size(); ++ti)
    for (std::size_t pi = 0; pi < m.pred_ids.size(); ++pi) {
      const auto it = overlap.find({m.truth_ids[ti], m.pred_ids[pi]});
      if (it == overlap.end()) continue;
      const double inter = static_cast<double>(it->second);
      const double uni =
          static_cast<double>(truth_area[m.truth_ids[ti]] + pred_area[m.pred_ids[pi]]) - inter;
      m.iou[ti * m.pred_ids.size() + pi] = inter / uni;
    }
  return m;
}

std::vector<int> max_weight_assignment(std::span<const double> weights, std::size_t rows, std::size_t cols) {
  if (weights.size() != rows * cols) throw InvalidArgument("weight matrix size mismatch");
  std::vector<int> assignment(rows, -1);
  if (rows == 0 || cols == 0) return assignment;

  // Square min-cost problem; padded cells and non-positive weights cost 0.
  const std::size_t n = std::max(rows, cols);
  auto cost = [&](std::size_t i, std::size_t j) -> double {
    if (i >= rows || j >= cols) return 0.0;
    const double w = weights[i * cols + j];
    return w > 0.0 ? -w : 0.0;
  };
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  for (std::size_t j = 1; j <= n; ++j) {
    const std::size_t i = p[j] - 1;
    if (i < rows && j - 1 < cols && weights[i * cols + (j - 1)] > 0.0) assignment[i] = static_cast<int>(j - 1);
  }
  return assignment;
}

MatchReport match_instances(const IouMatrix& m, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw InvalidArgument("IoU threshold must lie in (0, 1]");
  const std::size_t rows = m.truth_ids.size(), cols = m.pred_ids.size();
  std::vector<double> w(m.iou);
  for (auto& x : w)
    if (x < threshold) x = 0.0;
  const auto assignment = max_weight_assignment(w, rows, cols);

  MatchReport report;
  report.threshold = threshold;
  for (std::size_t t = 0; t < rows; ++t)
    if (assignment[t] >= 0)
      report.pairs.push_back({m.truth_ids[t], m.pred_ids[static_cast<std::size_t>(assignment[t])],
                              m.at(t, static_cast<std::size_t>(assignment[t]))});
  report.tp = report.pairs.size();
  report.fp = cols - report.tp;
  report.fn = rows - report.tp;
  return report;
}

MatchReport match_instances(const LabelVolume& truth, const LabelVolume& pred, double threshold) {
  return match_instances(iou_matrix(truth, pred), threshold);
}

Metrics metrics(const MatchReport& r) {
  const double tp = static_cast<double>(r.tp), fp = static_cast<double>(r.fp), fn = static_cast<double>(r.fn);
  double iou_sum = 0.0;
  for (const auto& pair : r.pairs) iou_sum += pair.iou;
  return {ratio(tp, tp + fp), ratio(tp, tp + fn), ratio(tp, tp + fp + fn), ratio(2.0 * tp, 2.0 * tp + fp + fn),
          ratio(iou_sum, tp + 0.5 * fp + 0.5 * fn)};
}

std::vector<double> default_thresholds() {
  std::vector<double> t;
  for (int k = 1; k <= 9; ++k) t.push_back(k / 10.0);
  return t;
}

ThresholdMetrics metrics_over_thresholds(const LabelVolume& truth, const LabelVolume& pred,
                                         const std::vector<double>& thresholds) {
  if (thresholds.empty()) throw InvalidArgument("at least one IoU threshold is required");
  const auto m = iou_matrix(truth, pred);
  ThresholdMetrics out;
  for (double tau : thresholds) {
    const auto met = metrics(match_instances(m, tau));
    out.per_threshold.emplace_back(tau, met);
    out.mean.precision += met.precision;
    out.mean.recall += met.recall;
    out.mean.accuracy += met.accuracy;
    out.mean.f1 += met.f1;
    out.mean.panoptic_quality += met.panoptic_quality;
  }
  const double n = static_cast<double>(thresholds.size());
  out.mean.precision /= n;
  out.mean.recall /= n;
  out.mean.accuracy /= n;
  out.mean.f1 /= n;
  out.mean.panoptic_quality /= n;
  return out;
}

double mask_iou(const BoxMask& a, const BoxMask& b) {
  const std::size_t uni_base = a.count + b.count;
  if (uni_base == 0) return 0.0;
  const VoxelIndex lo{std::max(a.lo.z, b.lo.z), std::max(a.lo.y, b.lo.y), std::max(a.lo.x, b.lo.x)};
  const VoxelIndex hi{std::min(a.hi.z, b.hi.z), std::min(a.hi.y, b.hi.y), std::min(a.hi.x, b.hi.x)};
  std::size_t inter = 0;
  if (a.count > 0 && b.count > 0 && lo.z < hi.z && lo.y < hi.y && lo.x < hi.x) {
    const auto width = static_cast<std::size_t>(hi.x - lo.x);
    for (long z = lo.z; z < hi.z; ++z)
      for (long y = lo.y; y < hi.y; ++y) {
        const auto row_a = static_cast<std::size_t>(((z - a.lo.z) * a.extent_y() + (y - a.lo.y)) * a.extent_x() + (lo.x - a.lo.x));
        const auto row_b = static_cast<std::size_t>(((z - b.lo.z) * b.extent_y() + (y - b.lo.y)) * b.extent_x() + (lo.x - b.lo.x));
        inter += simd::count_overlap(std::span(a.bits).subspan(row_a, width), std::span(b.bits).subspan(row_b, width));
      }
  }
  return static_cast<double>(inter) / static_cast<double>(uni_base - inter);
}

std::vector<std::size_t> nms(std::span<const Candidate> candidates, const Grid& grid, double prob_threshold,
                             double iou_threshold, int subdiv) {
  if (!(prob_threshold >= 0.0 && prob_threshold <= 1.0) || !(iou_threshold >= 0.0 && iou_threshold <= 1.0))
    throw InvalidArgument("NMS thresholds must lie in [0, 1]");
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double p = candidates[i].probability;
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("candidate " + std::to_string(i) + " probability outside [0, 1]");
    if (p >= prob_threshold) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return candidates[a].probability > candidates[b].probability;
  });

  std::vector<std::size_t> kept;
  std::vector<BoxMask> kept_masks;
  for (std::size_t idx : order) {
    BoxMask mask = rasterize(candidates[idx].shape, grid, subdiv);
    bool suppressed = false;
    for (const auto& other : kept_masks) {
      const bool boxes_meet = mask.lo.z < other.hi.z && other.lo.z < mask.hi.z && mask.lo.y < other.hi.y &&
                              other.lo.y < mask.hi.y && mask.lo.x < other.hi.x && other.lo.x < mask.hi.x;
      if (boxes_meet && mask_iou(mask, other) > iou_threshold) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) {
      kept.push_back(idx);
      kept_masks.push_back(std::move(mask));
    }
  }
  return kept;
}

}  // namespace surfdist
