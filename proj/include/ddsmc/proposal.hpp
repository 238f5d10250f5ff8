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

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ddsmc/ddpmo.hpp"
#include "ddsmc/rng.hpp"
#include "ddsmc/types.hpp"

namespace ddsmc {

// Feature layout: [ps_1(10), d_1, ps_2(10), d_2, ps_3(10), d_3, c(10)].
inline constexpr int kDistanceSlots[kNearestClusters] = {kColourBins, 2 * kColourBins + 1,
                                                         3 * kColourBins + 2};
inline constexpr int kPixelColourOffset = kNearestClusters * (kColourBins + 1);

struct Features {
  FeatureVector x = FeatureVector::Zero();
  std::array<int, kNearestClusters> nearest{}; ///< cluster ids, ascending distance
};

/// Features of px against the three nearest active clusters, or nullopt when
/// fewer than three clusters are active.
std::optional<Features> extract_features(const ModelState &state, const PixelRecord &px);

/// 43 -> hidden (tanh) -> 5 (softmax).
struct ProposalNet {
  Eigen::MatrixXd w1; ///< hidden x 43
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2; ///< 5 x hidden
  Eigen::VectorXd b2;
  /// Distances are divided by this before entering the network; 1 keeps them
  /// unnormalized.
  double distance_scale = 1.0;

  static constexpr int kDefaultHidden = 100;

  static ProposalNet zeros(int hidden = kDefaultHidden);
  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
  static ProposalNet initialized(std::uint64_t seed, int hidden = kDefaultHidden);

  int hidden() const { return static_cast<int>(b1.size()); }
  void validate() const;
  bool operator==(const ProposalNet &other) const;
};

Vec5 nn_forward(const ProposalNet &net, const FeatureVector &f);

struct TrainingExample {
  FeatureVector features = FeatureVector::Zero();
  int target_class = 1; ///< 1..3 nearest cluster, 4 other existing, 5 new
  double weight = 0.0;
};

struct NetGradient {
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;
  Eigen::VectorXd b2;
};

struct LossAndGrad {
  double loss = 0.0;
  NetGradient grad;
  bool clamped = false; ///< some target log-probability hit the -745 floor
};

/// Weighted negative log-likelihood -sum_i w_i log p(features_i)[class_i]
/// and its gradient.
LossAndGrad nn_loss_and_grad(const ProposalNet &net, std::span<const TrainingExample> batch);

struct TrainConfig {
  int epochs = 50;
  double learning_rate = 0.01;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
};

struct TrainResult {
  ProposalNet net;
  std::vector<double> loss_history; ///< full-data loss after each epoch
};

/// Mini-batch SGD with seeded shuffling. Throws TrainingDiverged when the
/// loss exceeds ten times its initial value.
TrainResult nn_train(ProposalNet net, std::span<const TrainingExample> data,
                     const TrainConfig &config);

/// Spread the five outputs over the K+1 assignment choices: p_1..p_3 on the
/// nearest clusters, p_4 split evenly over the other active clusters, p_5 on a
/// new cluster. With exactly three active clusters p_4 is dropped and the rest
/// renormalized.
Eigen::VectorXd map_to_assignment_distribution(const Vec5 &p, const UrnState &urn,
                                               const std::array<int, kNearestClusters> &nearest);

/// p_star * q + (1 - p_star) * prior.
Eigen::VectorXd mix_with_prior(const Eigen::VectorXd &q, const Eigen::VectorXd &prior,
                               double p_star);

/// Validates a fixed five-way distribution; returns it unchanged.
Vec5 handtuned_distribution(const Vec5 &p);

/// 1..5 class of an assignment relative to the nearest clusters.
int assignment_class(int cluster, const UrnState &urn,
                     const std::array<int, kNearestClusters> &nearest);

enum class ProposalKind { prior, handtuned, nn };

const char *to_string(ProposalKind kind);
ProposalKind parse_proposal_kind(const std::string &s);

struct ProposalSpec {
  ProposalKind kind = ProposalKind::prior;
  Vec5 handtuned_p = Vec5::Constant(0.2);
  std::shared_ptr<const ProposalNet> net;
  double p_star = 0.8;

  void validate() const;
};

struct ProposalDraw {
  AssignmentChoice choice;
  std::optional<Features> features;
  int target_class = 0; ///< 0 when features are unavailable
};

/// Sample a cluster for px. Data-driven kinds fall back to the prior when
/// fewer than three clusters are active; with `want_features` the features
/// are extracted even for the prior kind.
ProposalDraw propose_assignment(const ModelState &state, const PixelRecord &px, const Hyper &hyper,
                                const ProposalSpec &spec, bool want_features, Rng &rng);

void save_net(const ProposalNet &net, const std::string &path);
ProposalNet load_net(const std::string &path);
std::string format_net(const ProposalNet &net);
ProposalNet parse_net(const std::string &text);

} // namespace ddsmc
