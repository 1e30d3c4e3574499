#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "surfdist/instance_model.hpp"
#include "surfdist/volume.hpp"

namespace surfdist {

// Intersection over union of the nonzero voxels; 0 when both are empty.
double pair_iou(const LabelVolume& a, const LabelVolume& b);

struct IouMatrix {
  std::vector<std::uint32_t> truth_ids;
  std::vector<std::uint32_t> pred_ids;
  std::vector<double> iou;  // row-major, truth x pred

  double at(std::size_t t, std::size_t p) const { return iou[t * pred_ids.size() + p]; }
};

IouMatrix iou_matrix(const LabelVolume& truth, const LabelVolume& pred);

// Maximum-weight assignment of rows to columns (Hungarian method). Entries
// with weight <= 0 are never assigned. Returns the column per row, or -1.
std::vector<int> max_weight_assignment(std::span<const double> weights, std::size_t rows, std::size_t cols);

struct MatchedPair {
  std::uint32_t truth_id = 0;
  std::uint32_t pred_id = 0;
  double iou = 0.0;
};

struct MatchReport {
  double threshold = 0.5;
  std::vector<MatchedPair> pairs;  // ordered by truth id
  std::size_t tp = 0, fp = 0, fn = 0;
};

// Optimal matching restricted to pairs with IoU >= threshold.
MatchReport match_instances(const IouMatrix& m, double threshold);
MatchReport match_instances(const LabelVolume& truth, const LabelVolume& pred, double threshold);

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double accuracy = 0.0;
  double f1 = 0.0;
  double panoptic_quality = 0.0;
};

// Ratios with a zero denominator evaluate to 0.
Metrics metrics(const MatchReport& report);

// 0.1, 0.2, ..., 0.9.
std::vector<double> default_thresholds();

struct ThresholdMetrics {
  std::vector<std::pair<double, Metrics>> per_threshold;
  Metrics mean;
};

ThresholdMetrics metrics_over_thresholds(const LabelVolume& truth, const LabelVolume& pred,
                                         const std::vector<double>& thresholds);

double mask_iou(const BoxMask& a, const BoxMask& b);

struct Candidate {
  InstanceShape shape;
  double probability = 0.0;
};

// Greedy suppression: candidates below prob_threshold are dropped, the rest are
// visited by descending probability (ties by index) and kept unless their
// voxel IoU with an already kept candidate exceeds iou_threshold.
// Returns indices of kept candidates in visiting order.
std::vector<std::size_t> nms(std::span<const Candidate> candidates, const Grid& grid, double prob_threshold,
                             double iou_threshold, int subdiv);

}  // namespace surfdist
