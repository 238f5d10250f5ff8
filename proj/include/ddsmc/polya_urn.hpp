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

#include <vector>

#include <Eigen/Dense>

#include "ddsmc/rng.hpp"

namespace ddsmc {

/// Generalized Polya urn state within one frame.
///
/// Cluster ids are 0-based and never reused: a cluster whose size drops to
/// zero keeps its slot in `ms` with weight zero for the rest of the run.
struct UrnState {
  std::vector<int> cs; ///< assignments of the pixels seen so far this frame
  int K = 0;           ///< clusters ever created
  std::vector<int> ms; ///< current cluster sizes, length K

  int active_count() const;
  int total_size() const;
  bool operator==(const UrnState &) const = default;
};

/// Binomial deletion at a frame boundary: each m_k loses Binomial(m_k, rho).
UrnState urn_frame_init(const UrnState &prev, double rho, Rng &rng);

/// [ms..., alpha]: unnormalized assignment weights, last slot is a new cluster.
Eigen::VectorXd urn_assignment_weights(const UrnState &state, double alpha);

/// Seat the next pixel at cluster c (c == K opens a new cluster).
UrnState urn_apply(UrnState state, int c);

} // namespace ddsmc
