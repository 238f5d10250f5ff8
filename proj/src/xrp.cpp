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

#include "ddsmc/xrp.hpp"

#include <sstream>

namespace ddsmc {

void NiwPrior::validate() const {
  if (!(k0 > 0.0) || !std::isfinite(k0)) {
    throw InvalidArgument("NiwPrior: k0 must be positive");
  }
  if (!(nu0 > NiwXrp::kDim - 1) || !std::isfinite(nu0)) {
    throw InvalidArgument("NiwPrior: nu0 must exceed dimension - 1");
  }
  if (!mu0.allFinite() || !lambda0.allFinite()) {
    throw InvalidArgument("NiwPrior: non-finite hyperparameter");
  }
  if (std::abs(lambda0(0, 1) - lambda0(1, 0)) > 1e-12 * (1.0 + std::abs(lambda0(0, 1)))) {
    throw InvalidArgument("NiwPrior: lambda0 is not symmetric");
  }
  if (Eigen::LLT<Mat2>(lambda0).info() != Eigen::Success) {
    throw InvalidArgument("NiwPrior: lambda0 is not positive definite");
  }
}

NiwXrp::NiwXrp(const NiwPrior &prior) : prior_(prior) { prior_.validate(); }

void NiwXrp::incorporate(const Vec2 &x) {
  ++count_;
  sum_ += x;
  scatter_.noalias() += x * x.transpose();
}

void NiwXrp::unincorporate(const Vec2 &x) {
  if (count_ == 0) {
    throw StateError("NiwXrp: unincorporate on empty state");
  }
  --count_;
  sum_ -= x;
  scatter_.noalias() -= x * x.transpose();
}

NiwPosterior NiwXrp::posterior() const {
  const double n = count_;
  NiwPosterior post;
  post.k = prior_.k0 + n;
  post.nu = prior_.nu0 + n;
  post.mu = (prior_.k0 * prior_.mu0 + sum_) / post.k;
  post.lambda = prior_.lambda0;
  if (count_ > 0) {
    const Vec2 mean = sum_ / n;
    const Vec2 shift = mean - prior_.mu0;
    post.lambda += scatter_ - n * mean * mean.transpose();
    post.lambda += (prior_.k0 * n / post.k) * shift * shift.transpose();
  }
  const double off = 0.5 * (post.lambda(0, 1) + post.lambda(1, 0));
  post.lambda(0, 1) = off;
  post.lambda(1, 0) = off;
  return post;
}

NiwXrp::Predictive NiwXrp::predictive() const {
  const NiwPosterior post = posterior();
  const double dof = post.nu - kDim + 1;
  Predictive pred{post.mu, post.lambda * ((post.k + 1.0) / (post.k * dof)), dof};
  if (Eigen::LLT<Mat2>(pred.scale).info() != Eigen::Success || !pred.scale.allFinite()) {
    throw NumericalError("NiwXrp: posterior scale is not positive definite; " + describe());
  }
  return pred;
}

double NiwXrp::predictive_logpdf(const Vec2 &x) const {
  const Predictive pred = predictive();
  return mvt_logpdf<double>(x, pred.mu, pred.scale, pred.dof);
}

Vec2 NiwXrp::sample_predictive(Rng &rng) const {
  // The predictive mean is undefined for dof <= 1; draws remain valid.
  const Predictive pred = predictive();
  const Eigen::LLT<Mat2> llt(pred.scale);
  const Vec2 z(normal_sample(rng), normal_sample(rng));
  const double chi2 = 2.0 * gamma_sample(0.5 * pred.dof, rng);
  const Vec2 lz = llt.matrixL() * z;
  return pred.mu + std::sqrt(pred.dof / chi2) * lz;
}

MeanCovariance NiwXrp::state_info() const {
  const NiwPosterior post = posterior();
  if (!(post.nu > kDim + 1)) {
    throw NumericalError("NiwXrp: expected covariance undefined for nu_n <= 3; " + describe());
  }
  return {post.mu, post.lambda / (post.nu - kDim - 1)};
}

std::string NiwXrp::describe() const {
  std::ostringstream out;
  out.precision(17);
  const Eigen::IOFormat flat(Eigen::FullPrecision, Eigen::DontAlignCols, ",", ";", "", "", "[",
                             "]");
  out << "NiwXrp{mu0=" << prior_.mu0.transpose().format(flat) << " k0=" << prior_.k0
      << " nu0=" << prior_.nu0 << " lambda0=" << prior_.lambda0.format(flat)
      << " count=" << count_ << " sum=" << sum_.transpose().format(flat)
      << " scatter=" << scatter_.format(flat) << "}";
  return out.str();
}

} // namespace ddsmc
