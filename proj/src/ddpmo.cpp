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

#include "ddsmc/ddpmo.hpp"

#include <cmath>
#include <string>

#include "ddsmc/errors.hpp"

namespace ddsmc {

void Hyper::validate() const {
  if (!(alpha > 0.0)) {
    throw InvalidArgument("Hyper: alpha must be positive");
  }
  if (!(rho >= 0.0 && rho <= 1.0)) {
    throw InvalidArgument("Hyper: rho must lie in [0,1]");
  }
  niw.validate();
  if (!(q0.array() > 0.0).all()) {
    throw InvalidArgument("Hyper: q0 must be positive");
  }
  if (m_aux < 0) {
    throw InvalidArgument("Hyper: m_aux must be nonnegative");
  }
  if (trials <= 0) {
    throw InvalidArgument("Hyper: trials must be positive");
  }
}

Theta base_g0(const Hyper &hyper) { return Theta{NiwXrp(hyper.niw), DmXrp(hyper.q0, hyper.trials)}; }

Theta transition_t(const Theta &prev, const Hyper &hyper, Rng &rng) {
  Theta next = base_g0(hyper);
  NiwXrp positions = prev.positions;
  for (int j = 0; j < hyper.m_aux; ++j) {
    const Vec2 y = positions.sample_predictive(rng);
    positions.incorporate(y);
    next.positions.incorporate(y);
  }
  DmXrp colours = prev.colours;
  for (int j = 0; j < hyper.m_aux; ++j) {
    const ColourCounts y = colours.sample_predictive(rng);
    colours.incorporate(y);
    next.colours.incorporate(y);
  }
  return next;
}

Eigen::VectorXd prior_assignment_distribution(const UrnState &urn, double alpha) {
  const Eigen::VectorXd w = urn_assignment_weights(urn, alpha);
  return w / w.sum();
}

ModelState frame_begin(const ModelState &state, const Hyper &hyper, int frame_pixels, Rng &rng) {
  if (!state.frame_complete()) {
    throw StateError("frame_begin: frame " + std::to_string(state.frame) + " is incomplete (" +
                     std::to_string(state.urn.cs.size()) + " of " +
                     std::to_string(state.frame_pixels) + " pixels)");
  }
  if (frame_pixels < 0) {
    throw InvalidArgument("frame_begin: negative pixel count");
  }
  ModelState next;
  next.frame = state.frame + 1;
  next.frame_pixels = frame_pixels;
  next.urn = urn_frame_init(state.urn, hyper.rho, rng);
  next.thetas.resize(next.urn.K);
  for (int k = 0; k < next.urn.K; ++k) {
    if (next.urn.ms[k] == 0) {
      continue;
    }
    const Theta *prev = state.theta(k);
    if (prev == nullptr) {
      throw StateError("frame_begin: live cluster " + std::to_string(k) + " has no theta");
    }
    next.thetas[k] = std::make_shared<const Theta>(transition_t(*prev, hyper, rng));
  }
  return next;
}

ObserveResult observe_pixel(ModelState state, const PixelRecord &px,
                            const AssignmentChoice &choice, const Hyper &hyper) {
  if (px.t != state.frame || px.n != static_cast<int>(state.urn.cs.size()) + 1 ||
      px.n > state.frame_pixels) {
    throw StateError("observe_pixel: record (" + std::to_string(px.t) + "," +
                     std::to_string(px.n) + ") out of sequence at frame " +
                     std::to_string(state.frame));
  }
  const int c = choice.cluster;
  const int K = state.urn.K;
  if (c < 0 || c > K) {
    throw InvalidProposal("observe_pixel: cluster id " + std::to_string(c) + " outside [0, " +
                          std::to_string(K) + "]");
  }
  const Eigen::VectorXd prior = prior_assignment_distribution(state.urn, hyper.alpha);
  if (!(prior(c) > 0.0)) {
    throw InvalidProposal("observe_pixel: proposal chose dead cluster " + std::to_string(c));
  }
  if (!std::isfinite(choice.log_q)) {
    throw InvalidProposal("observe_pixel: proposal probability is zero or non-finite");
  }

  std::shared_ptr<Theta> theta;
  if (c == K) {
    theta = std::make_shared<Theta>(base_g0(hyper));
    state.thetas.push_back(nullptr);
  } else {
    theta = std::make_shared<Theta>(*state.thetas[c]);
  }
  double log_w = std::log(prior(c)) - choice.log_q;
  log_w += theta->positions.predictive_logpdf(px.pos);
  log_w += theta->colours.predictive_logpmf(px.col);
  theta->positions.incorporate(px.pos);
  theta->colours.incorporate(px.col);
  state.thetas[c] = std::move(theta);
  state.urn = urn_apply(std::move(state.urn), c);
  return {std::move(state), log_w};
}

FramePrediction predict_record(const ModelState &state) {
  FramePrediction out;
  out.t = state.frame;
  out.n = static_cast<int>(state.urn.cs.size());
  out.cs = state.urn.cs;
  out.K = state.urn.K;
  out.ms = state.urn.ms;
  for (int k = 0; k < state.urn.K; ++k) {
    if (state.urn.ms[k] == 0) {
      continue;
    }
    const Theta *theta = state.theta(k);
    if (theta == nullptr) {
      throw StateError("predict_record: live cluster " + std::to_string(k) + " has no theta");
    }
    const MeanCovariance mc = theta->positions.state_info();
    out.clusters.push_back({k, mc.mu, mc.sigma, theta->colours.state_info()});
  }
  return out;
}

} // namespace ddsmc
