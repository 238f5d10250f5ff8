// Copyright 2026 The ddsmc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ddsmc/ddpmo.hpp"
#include "ddsmc/ddpmo_smc.hpp"

namespace ddsmc {

struct Box {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double area() const { return (x_max - x_min) * (y_max - y_min); }
  bool operator==(const Box &) const = default;
};

/// Intersection over union; 0 when the union has no area.
double iou(const Box &a, const Box &b);

struct Detection {
  int t = 0;
  int k = 0;
  Box box;
};

struct GtTrack {
  int id = 0;
  std::map<int, Box> frames;
};

/// Maximum-weight one-to-one assignment for a rectangular weight matrix.
/// Returns, for each row, the matched column or -1.
std::vector<int> max_weight_assignment(const Eigen::MatrixXd &weights);

/// One detection per cluster with ms[k] >= min_size, box mu +- 2 sd per axis.
std::vector<Detection> extract_detections(const FramePrediction &prediction, int min_size);

/// Matched IoU over the mean of the two set sizes; 0 when exactly one side
/// is empty and 1 when both are.
double frame_detection_accuracy(const std::vector<Box> &dets, const std::vector<Box> &gts);

struct FrameBoxes {
  std::vector<Box> dets;
  std::vector<Box> gts;
};

/// Mean FDA over frames where either side has a box; 0 when no such frame.
double sfda(const std::vector<FrameBoxes> &frames);

/// Track-level accuracy with an optimal one-to-one track matching.
double ata(const std::vector<GtTrack> &det_tracks, const std::vector<GtTrack> &gt_tracks);

/// Detections per frame 1..frames grouped into per-cluster tracks.
std::vector<GtTrack> detection_tracks(const std::vector<std::vector<Detection>> &by_frame);

enum class ScoringMode { best_particle, weighted_average };

const char *to_string(ScoringMode mode);
ScoringMode parse_scoring_mode(const std::string &s);

struct EvalOptions {
  int min_size = 3;
  ScoringMode mode = ScoringMode::best_particle;
};

struct MetricsReport {
  std::string proposal_kind;
  std::size_t particles = 0;
  std::uint64_t seed = 0;
  double sfda = 0.0;
  double ata = 0.0;
  double mean_final_log_weight = 0.0;
  double log_marginal = 0.0;
};

/// SFDA and ATA of one particle's lineage.
MetricsReport score_lineage(const RunFile &run, std::size_t particle,
                            const std::vector<GtTrack> &gt, int frames, int min_size);

/// Throws InvalidArgument when the ground truth covers frames the run does not.
MetricsReport evaluate_run(const RunFile &run, const std::vector<GtTrack> &gt,
                           const EvalOptions &options = {});

inline constexpr const char *kMetricsColumns =
    "proposal_kind,particles,seed,sfda,ata,mean_final_log_weight,log_marginal";

std::string metrics_csv_row(const MetricsReport &report);

/// Shortest round-trip decimal form; "-inf"/"inf"/"nan" for non-finite.
std::string format_double(double v);

} // namespace ddsmc
