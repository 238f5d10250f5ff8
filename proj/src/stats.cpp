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

#include "ddsmc/stats.hpp"

#include <string>

namespace ddsmc {

std::size_t categorical_sample(std::span<const double> weights, Rng &rng) {
  if (weights.empty()) {
    throw InvalidArgument("categorical_sample: empty weight vector");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw InvalidArgument("categorical_sample: weights must be finite and nonnegative");
    }
    total += w;
  }
  if (!(total > 0.0)) {
    throw InvalidArgument("categorical_sample: all weights are zero");
  }
  const double target = rng.uniform() * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] > 0.0) {
      last_positive = i;
      acc += weights[i];
      if (target < acc) {
        return i;
      }
    }
  }
  // Rounding in the running sum can leave target == acc.
  return last_positive;
}

int binomial_sample(int trials, double p, Rng &rng) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw InvalidArgument("binomial_sample: p outside [0,1]: " + std::to_string(p));
  }
  if (trials < 0) {
    throw InvalidArgument("binomial_sample: negative trial count");
  }
  if (trials == 0 || p == 0.0) {
    return 0;
  }
  if (p == 1.0) {
    return trials;
  }
  std::binomial_distribution<int> dist(trials, p);
  return dist(rng);
}

double normal_sample(Rng &rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

double gamma_sample(double shape, Rng &rng) {
  if (!(shape > 0.0)) {
    throw InvalidArgument("gamma_sample: shape must be positive");
  }
  std::gamma_distribution<double> dist(shape, 1.0);
  return dist(rng);
}

double log_sum_exp(std::span<const double> v) {
  double top = -std::numeric_limits<double>::infinity();
  for (double x : v) {
    top = std::max(top, x);
  }
  if (!std::isfinite(top)) {
    return top;
  }
  double acc = 0.0;
  for (double x : v) {
    acc += std::exp(x - top);
  }
  return top + std::log(acc);
}

} // namespace ddsmc
