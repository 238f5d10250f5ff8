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

#include <memory>
#include <vector>

#include "ddsmc/polya_urn.hpp"
#include "ddsmc/rng.hpp"
#include "ddsmc/types.hpp"
#include "ddsmc/xrp.hpp"

namespace ddsmc {

/// DDPMO hyperparameters. Defaults are the football-tracking values.
struct Hyper {
  double alpha = 0.1; ///< urn concentration (birth rate)
  double rho = 0.32;  ///< per-customer deletion probability between frames
  NiwPrior niw{Vec2::Zero(), 0.00370790649926, 7336.3104796,
               (Mat2() << 193.362493995, 0.0, 0.0, 40.6543682123).finished()};
  ColourVec q0 = ColourVec::Constant(10.0);
  int m_aux = 10; ///< auxiliary samples per transition
  int trials = kPatchTrials;

  void validate() const;
};

/// Per-cluster parameters: position and colour XRPs.
struct Theta {
  NiwXrp positions;
  DmXrp colours;
};

/// One foreground pixel: frame t >= 1, within-frame index n >= 1.
struct PixelRecord {
  int t = 1;
  int n = 1;
  Vec2 pos = Vec2::Zero();
  ColourCounts col = ColourCounts::Zero();

  bool operator==(const PixelRecord &) const = default;
};

/// Latent state of one particle. Thetas are shared copy-on-write between
/// particles; a cluster with ms[k] == 0 has no theta.
struct ModelState {
  UrnState urn;
  std::vector<std::shared_ptr<const Theta>> thetas;
  int frame = 0;        ///< current frame, 0 before the first frame_begin
  int frame_pixels = 0; ///< N_t of the current frame

  const Theta *theta(int k) const {
    return k >= 0 && k < static_cast<int>(thetas.size()) ? thetas[k].get() : nullptr;
  }
  bool frame_complete() const { return static_cast<int>(urn.cs.size()) == frame_pixels; }
};

/// The sampled cluster for one pixel and the log probability the proposal
/// assigned to it.
struct AssignmentChoice {
  int cluster = 0;
  double log_q = 0.0;
};

struct ObserveResult {
  ModelState state;
  double log_weight = 0.0;
};

struct ClusterSummary {
  int k = 0;
  Vec2 mu = Vec2::Zero();
  Mat2 sigma = Mat2::Zero();
  ColourVec ps = ColourVec::Zero();

  bool operator==(const ClusterSummary &) const = default;
};

/// End-of-frame snapshot of one particle.
struct FramePrediction {
  int t = 0;
  int n = 0;
  std::vector<int> cs;
  int K = 0;
  std::vector<int> ms;
  std::vector<ClusterSummary> clusters;

  bool operator==(const FramePrediction &) const = default;
};

Theta base_g0(const Hyper &hyper);

/// Auxiliary-variable transition: a fresh G0 theta that has incorporated
/// m_aux points drawn as an exchangeable sequence from prev's predictive.
Theta transition_t(const Theta &prev, const Hyper &hyper, Rng &rng);

/// Normalized GPU prior over the K+1 assignment choices.
Eigen::VectorXd prior_assignment_distribution(const UrnState &urn, double alpha);

/// Move to the next frame: binomial deletion, transition of survivors.
ModelState frame_begin(const ModelState &state, const Hyper &hyper, int frame_pixels, Rng &rng);

/// Seat px at choice.cluster and incorporate it. The returned log weight is
/// log p(c) - log q(c) + log p(pos | theta_c) + log p(col | theta_c).
ObserveResult observe_pixel(ModelState state, const PixelRecord &px,
                            const AssignmentChoice &choice, const Hyper &hyper);

FramePrediction predict_record(const ModelState &state);

} // namespace ddsmc
