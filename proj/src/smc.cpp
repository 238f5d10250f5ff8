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

#include "ddsmc/smc.hpp"

#include <algorithm>

#include "ddsmc/stats.hpp"

namespace ddsmc {

void SmcConfig::validate() const {
  if (particles < 1) {
    throw InvalidArgument("SmcConfig: particle count must be at least 1");
  }
  if (!(ess_threshold > 0.0 && ess_threshold <= 1.0)) {
    throw InvalidArgument("SmcConfig: ESS threshold must lie in (0,1]");
  }
}

NormalizedWeights normalize_weights(const Eigen::VectorXd &log_w) {
  if (log_w.size() == 0) {
    throw InvalidArgument("normalize_weights: empty weight vector");
  }
  const double lse = log_sum_exp(log_w);
  if (!std::isfinite(lse)) {
    if (lse > 0.0) {
      throw NumericalError("normalize_weights: infinite log weight");
    }
    throw DegeneracyError(0, "normalize_weights: all weights are zero");
  }
  NormalizedWeights out;
  // Scalar exp: the packet version flushes -inf to a denormal instead of 0.
  out.w = (log_w.array() - lse).unaryExpr([](double v) { return std::exp(v); }).matrix();
  out.w /= out.w.sum();
  out.log_mean = lse - std::log(static_cast<double>(log_w.size()));
  return out;
}

namespace {

std::vector<std::size_t> invert_cdf(const Eigen::VectorXd &w, const std::vector<double> &sorted_u) {
  std::vector<std::size_t> out;
  out.reserve(sorted_u.size());
  const auto n = static_cast<std::size_t>(w.size());
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (w(static_cast<Eigen::Index>(i)) > 0.0) {
      last_positive = i;
    }
  }
  std::size_t i = 0;
  double cdf = w(0);
  for (double u : sorted_u) {
    while (u >= cdf && i + 1 < n) {
      ++i;
      cdf += w(static_cast<Eigen::Index>(i));
    }
    // Past the end only through rounding; fall back to the last live index.
    out.push_back(u >= cdf || w(static_cast<Eigen::Index>(i)) == 0.0 ? last_positive : i);
  }
  return out;
}

} // namespace

std::vector<std::size_t> resample_multinomial(const Eigen::VectorXd &w, std::size_t count,
                                              Rng &rng) {
  std::vector<double> u(count);
  for (double &x : u) {
    x = rng.uniform();
  }
  std::sort(u.begin(), u.end());
  return invert_cdf(w, u);
}

std::vector<std::size_t> resample_systematic(const Eigen::VectorXd &w, std::size_t count,
                                             Rng &rng) {
  std::vector<double> u(count);
  const double offset = rng.uniform();
  for (std::size_t i = 0; i < count; ++i) {
    u[i] = (static_cast<double>(i) + offset) / static_cast<double>(count);
  }
  return invert_cdf(w, u);
}

double ess(const Eigen::VectorXd &w) { return 1.0 / w.squaredNorm(); }

const char *to_string(Resampler r) {
  return r == Resampler::systematic ? "systematic" : "multinomial";
}

const char *to_string(ResamplePolicy p) {
  return p == ResamplePolicy::ess_threshold ? "ess-threshold" : "every-step";
}

Resampler parse_resampler(const std::string &s) {
  if (s == "multinomial") {
    return Resampler::multinomial;
  }
  if (s == "systematic") {
    return Resampler::systematic;
  }
  throw InvalidArgument("unknown resampler '" + s + "'");
}

namespace detail {

double mean_with_infinities(const Eigen::VectorXd &v) {
  if (v.size() == 0) {
    return 0.0;
  }
  if ((v.array() == -std::numeric_limits<double>::infinity()).any()) {
    return -std::numeric_limits<double>::infinity();
  }
  return v.mean();
}

} // namespace detail

} // namespace ddsmc
