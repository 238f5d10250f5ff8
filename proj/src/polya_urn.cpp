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

#include "ddsmc/polya_urn.hpp"

#include <numeric>
#include <string>

#include "ddsmc/errors.hpp"
#include "ddsmc/stats.hpp"

namespace ddsmc {

int UrnState::active_count() const {
  int n = 0;
  for (int m : ms) {
    n += m > 0 ? 1 : 0;
  }
  return n;
}

int UrnState::total_size() const { return std::accumulate(ms.begin(), ms.end(), 0); }

UrnState urn_frame_init(const UrnState &prev, double rho, Rng &rng) {
  UrnState next;
  next.K = prev.K;
  next.ms.reserve(prev.ms.size());
  for (int m : prev.ms) {
    next.ms.push_back(m == 0 ? 0 : m - binomial_sample(m, rho, rng));
  }
  return next;
}

Eigen::VectorXd urn_assignment_weights(const UrnState &state, double alpha) {
  Eigen::VectorXd w(state.K + 1);
  for (int k = 0; k < state.K; ++k) {
    w(k) = state.ms[k];
  }
  w(state.K) = alpha;
  return w;
}

UrnState urn_apply(UrnState state, int c) {
  if (c < 0 || c > state.K) {
    throw InvalidArgument("urn_apply: cluster id " + std::to_string(c) + " outside [0, " +
                          std::to_string(state.K) + "]");
  }
  state.cs.push_back(c);
  if (c == state.K) {
    state.ms.push_back(1);
    ++state.K;
  } else {
    ++state.ms[c];
  }
  return state;
}

} // namespace ddsmc
