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

#include "ddsmc/tracking.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <set>

#include "ddsmc/errors.hpp"

namespace ddsmc {

double iou(const Box &a, const Box &b) {
  const double w = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double h = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  const double inter = w > 0.0 && h > 0.0 ? w * h : 0.0;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

std::vector<int> max_weight_assignment(const Eigen::MatrixXd &weights) {
  const bool flip = weights.rows() > weights.cols();
  const Eigen::MatrixXd cost = flip ? Eigen::MatrixXd(-weights.transpose()) : Eigen::MatrixXd(-weights);
  const auto n = static_cast<std::size_t>(cost.rows());
  const auto m = static_cast<std::size_t>(cost.cols());
  std::vector<int> row_match(n, -1);
  if (n > 0) {
    // Shortest augmenting path Hungarian method with potentials, 1-based.
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
      p[0] = i;
      std::size_t j0 = 0;
      std::vector<double> minv(m + 1, inf);
      std::vector<char> used(m + 1, 0);
      do {
        used[j0] = 1;
        const std::size_t i0 = p[j0];
        double delta = inf;
        std::size_t j1 = 0;
        for (std::size_t j = 1; j <= m; ++j) {
          if (used[j]) {
            continue;
          }
          const double cur = cost(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) -
                             u[i0] - v[j];
          if (cur < minv[j]) {
            minv[j] = cur;
            way[j] = j0;
          }
          if (minv[j] < delta) {
            delta = minv[j];
            j1 = j;
          }
        }
        for (std::size_t j = 0; j <= m; ++j) {
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
    for (std::size_t j = 1; j <= m; ++j) {
      if (p[j] != 0) {
        row_match[p[j] - 1] = static_cast<int>(j - 1);
      }
    }
  }
  if (!flip) {
    return row_match;
  }
  std::vector<int> out(static_cast<std::size_t>(weights.rows()), -1);
  for (std::size_t c = 0; c < row_match.size(); ++c) {
    if (row_match[c] >= 0) {
      out[static_cast<std::size_t>(row_match[c])] = static_cast<int>(c);
    }
  }
  return out;
}

std::vector<Detection> extract_detections(const FramePrediction &prediction, int min_size) {
  std::vector<Detection> out;
  for (const ClusterSummary &c : prediction.clusters) {
    if (c.k < 0 || c.k >= static_cast<int>(prediction.ms.size()) ||
        prediction.ms[static_cast<std::size_t>(c.k)] < min_size ||
        prediction.ms[static_cast<std::size_t>(c.k)] <= 0) {
      continue;
    }
    const double sx = 2.0 * std::sqrt(std::max(c.sigma(0, 0), 0.0));
    const double sy = 2.0 * std::sqrt(std::max(c.sigma(1, 1), 0.0));
    out.push_back({prediction.t, c.k, {c.mu(0) - sx, c.mu(1) - sy, c.mu(0) + sx, c.mu(1) + sy}});
  }
  return out;
}

namespace {

double matched_overlap(const std::vector<Box> &a, const std::vector<Box> &b) {
  if (a.empty() || b.empty()) {
    return 0.0;
  }
  Eigen::MatrixXd w(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = iou(a[i], b[j]);
    }
  }
  const std::vector<int> match = max_weight_assignment(w);
  double total = 0.0;
  for (std::size_t i = 0; i < match.size(); ++i) {
    if (match[i] >= 0) {
      total += w(static_cast<Eigen::Index>(i), match[i]);
    }
  }
  return total;
}

} // namespace

double frame_detection_accuracy(const std::vector<Box> &dets, const std::vector<Box> &gts) {
  if (dets.empty() && gts.empty()) {
    return 1.0;
  }
  const double denom = 0.5 * static_cast<double>(dets.size() + gts.size());
  return std::clamp(matched_overlap(dets, gts) / denom, 0.0, 1.0);
}

double sfda(const std::vector<FrameBoxes> &frames) {
  double total = 0.0;
  int counted = 0;
  for (const FrameBoxes &f : frames) {
    if (f.dets.empty() && f.gts.empty()) {
      continue;
    }
    total += frame_detection_accuracy(f.dets, f.gts);
    ++counted;
  }
  return counted > 0 ? total / counted : 0.0;
}

namespace {

double track_overlap(const GtTrack &g, const GtTrack &d) {
  std::set<int> frames;
  for (const auto &[t, box] : g.frames) {
    frames.insert(t);
  }
  for (const auto &[t, box] : d.frames) {
    frames.insert(t);
  }
  if (frames.empty()) {
    return 0.0;
  }
  double total = 0.0;
  for (const auto &[t, box] : g.frames) {
    const auto it = d.frames.find(t);
    if (it != d.frames.end()) {
      total += iou(box, it->second);
    }
  }
  return total / static_cast<double>(frames.size());
}

} // namespace

double ata(const std::vector<GtTrack> &det_tracks, const std::vector<GtTrack> &gt_tracks) {
  if (det_tracks.empty() || gt_tracks.empty()) {
    return 0.0;
  }
  Eigen::MatrixXd w(static_cast<Eigen::Index>(gt_tracks.size()),
                    static_cast<Eigen::Index>(det_tracks.size()));
  for (std::size_t i = 0; i < gt_tracks.size(); ++i) {
    for (std::size_t j = 0; j < det_tracks.size(); ++j) {
      w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          track_overlap(gt_tracks[i], det_tracks[j]);
    }
  }
  const std::vector<int> match = max_weight_assignment(w);
  double stda = 0.0;
  for (std::size_t i = 0; i < match.size(); ++i) {
    if (match[i] >= 0) {
      stda += w(static_cast<Eigen::Index>(i), match[i]);
    }
  }
  const double denom = 0.5 * static_cast<double>(gt_tracks.size() + det_tracks.size());
  return std::clamp(stda / denom, 0.0, 1.0);
}

std::vector<GtTrack> detection_tracks(const std::vector<std::vector<Detection>> &by_frame) {
  std::map<int, GtTrack> tracks;
  for (const auto &frame : by_frame) {
    for (const Detection &d : frame) {
      GtTrack &track = tracks[d.k];
      track.id = d.k;
      track.frames[d.t] = d.box;
    }
  }
  std::vector<GtTrack> out;
  for (auto &[k, track] : tracks) {
    out.push_back(std::move(track));
  }
  return out;
}

const char *to_string(ScoringMode mode) {
  return mode == ScoringMode::best_particle ? "best" : "weighted";
}

ScoringMode parse_scoring_mode(const std::string &s) {
  if (s == "best") {
    return ScoringMode::best_particle;
  }
  if (s == "weighted") {
    return ScoringMode::weighted_average;
  }
  throw InvalidArgument("unknown scoring mode '" + s + "' (expected best or weighted)");
}

namespace {

int run_frames(const RunFile &run) {
  if (run.config.contains("frames")) {
    return run.config["frames"].get<int>();
  }
  int frames = 0;
  for (const RunNode &n : run.nodes) {
    frames = std::max(frames, n.t);
  }
  return frames;
}

} // namespace

MetricsReport score_lineage(const RunFile &run, std::size_t particle,
                            const std::vector<GtTrack> &gt, int frames, int min_size) {
  std::vector<std::vector<Detection>> by_frame(static_cast<std::size_t>(frames));
  for (const FramePrediction *p : run.lineage_predictions(particle)) {
    if (p->t >= 1 && p->t <= frames) {
      by_frame[static_cast<std::size_t>(p->t - 1)] = extract_detections(*p, min_size);
    }
  }
  std::vector<FrameBoxes> boxes(static_cast<std::size_t>(frames));
  for (int t = 1; t <= frames; ++t) {
    FrameBoxes &f = boxes[static_cast<std::size_t>(t - 1)];
    for (const Detection &d : by_frame[static_cast<std::size_t>(t - 1)]) {
      f.dets.push_back(d.box);
    }
    for (const GtTrack &g : gt) {
      const auto it = g.frames.find(t);
      if (it != g.frames.end()) {
        f.gts.push_back(it->second);
      }
    }
  }
  MetricsReport r;
  r.sfda = sfda(boxes);
  r.ata = ata(detection_tracks(by_frame), gt);
  return r;
}

MetricsReport evaluate_run(const RunFile &run, const std::vector<GtTrack> &gt,
                           const EvalOptions &options) {
  if (run.finals.empty()) {
    throw InvalidArgument("evaluate_run: run has no final particles");
  }
  if (options.min_size < 0) {
    throw InvalidArgument("evaluate_run: min_size must be nonnegative");
  }
  const int frames = run_frames(run);
  for (const GtTrack &g : gt) {
    for (const auto &[t, box] : g.frames) {
      if (t < 1 || t > frames) {
        throw InvalidArgument("ground truth track " + std::to_string(g.id) + " has frame " +
                              std::to_string(t) + " but the run covers frames 1.." +
                              std::to_string(frames));
      }
    }
  }
  MetricsReport report;
  if (options.mode == ScoringMode::best_particle) {
    report = score_lineage(run, run.best_particle(), gt, frames, options.min_size);
  } else {
    std::map<int, std::pair<std::size_t, double>> lineages;
    for (std::size_t p = 0; p < run.finals.size(); ++p) {
      auto &[first, weight] = lineages.try_emplace(run.finals[p].node, p, 0.0).first->second;
      weight += run.finals[p].weight;
    }
    double total = 0.0;
    for (const auto &[node, entry] : lineages) {
      if (entry.second <= 0.0) {
        continue;
      }
      const MetricsReport r = score_lineage(run, entry.first, gt, frames, options.min_size);
      report.sfda += entry.second * r.sfda;
      report.ata += entry.second * r.ata;
      total += entry.second;
    }
    if (total > 0.0) {
      report.sfda /= total;
      report.ata /= total;
    }
  }
  report.proposal_kind = run.config.value("proposal", std::string("unknown"));
  report.particles = run.config.value("particles", std::size_t{run.finals.size()});
  report.seed = run.config.value("seed", std::uint64_t{0});
  report.mean_final_log_weight = run.mean_final_log_weight;
  report.log_marginal = run.log_marginal;
  return report;
}

std::string format_double(double v) {
  if (std::isnan(v)) {
    return "nan";
  }
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string metrics_csv_row(const MetricsReport &r) {
  return r.proposal_kind + "," + std::to_string(r.particles) + "," + std::to_string(r.seed) + "," +
         format_double(r.sfda) + "," + format_double(r.ata) + "," +
         format_double(r.mean_final_log_weight) + "," + format_double(r.log_marginal);
}

} // namespace ddsmc
