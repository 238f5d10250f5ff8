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

#include <cmath>
#include <string>

#include "ddsmc/errors.hpp"
#include "ddsmc/rng.hpp"
#include "ddsmc/stats.hpp"
#include "ddsmc/types.hpp"

namespace ddsmc {

// Conjugate exchangeable random procedures. Each keeps sufficient statistics
// only, so incorporate/unincorporate are O(1) and the posterior depends on the
// multiset of observations, not their order.

struct NiwPrior {
  Vec2 mu0 = Vec2::Zero();
  double k0 = 1.0;
  double nu0 = 4.0;
  Mat2 lambda0 = Mat2::Identity();

  /// Throws InvalidArgument unless k0 > 0, nu0 > 1 and lambda0 is SPD.
  void validate() const;
};

struct NiwPosterior {
  Vec2 mu;
  double k;
  double nu;
  Mat2 lambda;
};

struct MeanCovariance {
  Vec2 mu;
  Mat2 sigma;
};

/// Normal-inverse-Wishart prior over a bivariate Gaussian, collapsed.
class NiwXrp {
public:
  static constexpr int kDim = 2;

  explicit NiwXrp(const NiwPrior &prior);

  void incorporate(const Vec2 &x);
  /// Throws StateError when nothing is incorporated.
  void unincorporate(const Vec2 &x);

  NiwPosterior posterior() const;
  Vec2 posterior_mean() const { return (prior_.k0 * prior_.mu0 + sum_) / (prior_.k0 + count_); }

  /// Posterior predictive: Student-t with nu_n - 1 dof and scale
  /// lambda_n (k_n + 1) / (k_n (nu_n - 1)).
  double predictive_logpdf(const Vec2 &x) const;
  Vec2 sample_predictive(Rng &rng) const;

  /// Posterior mean and expected covariance lambda_n / (nu_n - 3).
  MeanCovariance state_info() const;

  const NiwPrior &prior() const { return prior_; }
  int count() const { return count_; }
  const Vec2 &sum() const { return sum_; }
  const Mat2 &scatter() const { return scatter_; }

  std::string describe() const;

private:
  struct Predictive {
    Vec2 mu;
    Mat2 scale;
    double dof;
  };
  Predictive predictive() const;

  NiwPrior prior_;
  int count_ = 0;
  Vec2 sum_ = Vec2::Zero();
  Mat2 scatter_ = Mat2::Zero();
};

/// Dirichlet prior over a multinomial with a fixed number of trials.
template <int Bins> class DirichletMultinomialXrp {
public:
  using Counts = Eigen::Matrix<int, Bins, 1>;
  using Vec = Eigen::Matrix<double, Bins, 1>;

  DirichletMultinomialXrp(const Vec &q0, int trials) : q0_(q0), trials_(trials) {
    if (!(q0.array() > 0.0).all() || !q0.allFinite()) {
      throw InvalidArgument("DirichletMultinomialXrp: pseudo-counts must be positive");
    }
    if (trials <= 0) {
      throw InvalidArgument("DirichletMultinomialXrp: trials must be positive");
    }
  }

  void incorporate(const Counts &x) {
    check(x);
    counts_ += x.template cast<double>();
    ++observations_;
  }

  void unincorporate(const Counts &x) {
    check(x);
    if (observations_ == 0) {
      throw StateError("DirichletMultinomialXrp: unincorporate on empty state");
    }
    const Vec next = counts_ - x.template cast<double>();
    if ((next.array() < 0.0).any()) {
      throw StateError("DirichletMultinomialXrp: unincorporate of a point never incorporated");
    }
    counts_ = next;
    --observations_;
  }

  /// Dirichlet-multinomial compound pmf with parameters (q0 + counts, trials).
  double predictive_logpmf(const Counts &x) const {
    check(x);
    const Vec a = q0_ + counts_;
    const double total = a.sum();
    double acc = log_multinomial_coefficient(x) + std::lgamma(total) -
                 std::lgamma(total + static_cast<double>(trials_));
    for (int i = 0; i < Bins; ++i) {
      if (x(i) > 0) {
        acc += std::lgamma(a(i) + x(i)) - std::lgamma(a(i));
      }
    }
    return acc;
  }

  Counts sample_predictive(Rng &rng) const {
    const Vec p = dirichlet_sample<Bins>(q0_ + counts_, rng);
    return multinomial_sample<Bins>(trials_, p, rng);
  }

  /// Posterior Dirichlet mean.
  Vec state_info() const {
    const Vec a = q0_ + counts_;
    return a / a.sum();
  }

  const Vec &q0() const { return q0_; }
  int trials() const { return trials_; }
  const Vec &counts() const { return counts_; }
  int observations() const { return observations_; }

private:
  void check(const Counts &x) const {
    if ((x.array() < 0).any() || x.sum() != trials_) {
      throw InvalidArgument("DirichletMultinomialXrp: counts must be nonnegative and sum to " +
                            std::to_string(trials_));
    }
  }

  Vec q0_;
  int trials_;
  Vec counts_ = Vec::Zero();
  int observations_ = 0;
};

using DmXrp = DirichletMultinomialXrp<kColourBins>;

} // namespace ddsmc
