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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <random>
#include <span>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "ddsmc/errors.hpp"
#include "ddsmc/rng.hpp"
#include "ddsmc/types.hpp"

namespace ddsmc {

/// Draw index i with probability weights[i] / sum(weights).
std::size_t categorical_sample(std::span<const double> weights, Rng &rng);

inline std::size_t categorical_sample(const Eigen::VectorXd &weights, Rng &rng) {
  return categorical_sample(std::span<const double>(weights.data(), weights.size()), rng);
}

int binomial_sample(int trials, double p, Rng &rng);

double normal_sample(Rng &rng);

/// Gamma(shape, 1).
double gamma_sample(double shape, Rng &rng);

/// log(sum(exp(v))); -inf when every entry is -inf.
double log_sum_exp(std::span<const double> v);

inline double log_sum_exp(const Eigen::VectorXd &v) {
  return log_sum_exp(std::span<const double>(v.data(), v.size()));
}

/// log of n! / prod(x_i!).
template <typename Derived>
double log_multinomial_coefficient(const Eigen::MatrixBase<Derived> &counts) {
  double total = 0.0;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < counts.size(); ++i) {
    const double x = static_cast<double>(counts(i));
    total += x;
    acc -= std::lgamma(x + 1.0);
  }
  return acc + std::lgamma(total + 1.0);
}

/// Numerically stable softmax (max subtraction).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Derived::RowsAtCompileTime, 1>
softmax(const Eigen::MatrixBase<Derived> &v) {
  using Scalar = typename Derived::Scalar;
  if (v.hasNaN()) {
    throw InvalidArgument("softmax: NaN input");
  }
  const Scalar top = v.maxCoeff();
  Eigen::Matrix<Scalar, Derived::RowsAtCompileTime, 1> e =
      (v.array() - top).unaryExpr([](Scalar x) { return std::exp(x); }).matrix();
  return e / e.sum();
}

/// Log density of the bivariate Student-t with location `mu`, scale matrix
/// `scale` and `dof` degrees of freedom.
template <typename Scalar>
Scalar mvt_logpdf(const Vector2<Scalar> &x, const Vector2<Scalar> &mu,
                  const Matrix2<Scalar> &scale, Scalar dof) {
  if (!(dof > Scalar(0))) {
    throw InvalidArgument("mvt_logpdf: dof must be positive");
  }
  if (std::abs(scale(0, 1) - scale(1, 0)) >
      Scalar(1e-12) * (std::abs(scale(0, 1)) + std::abs(scale(1, 0)) + Scalar(1))) {
    throw InvalidArgument("mvt_logpdf: scale is not symmetric");
  }
  const Eigen::LLT<Matrix2<Scalar>> llt(scale);
  if (llt.info() != Eigen::Success) {
    throw InvalidArgument("mvt_logpdf: scale is not positive definite");
  }
  constexpr Scalar d = 2;
  const Vector2<Scalar> z = llt.matrixL().solve(x - mu);
  const Scalar maha = z.squaredNorm();
  const Matrix2<Scalar> &l = llt.matrixLLT();
  const Scalar half_logdet = std::log(l(0, 0)) + std::log(l(1, 1));
  return std::lgamma((dof + d) / 2) - std::lgamma(dof / 2) -
         (d / 2) * std::log(dof * std::numbers::pi_v<Scalar>) - half_logdet -
         ((dof + d) / 2) * std::log1p(maha / dof);
}

/// Dirichlet(alpha) draw via normalized gammas.
template <int Bins>
Eigen::Matrix<double, Bins, 1> dirichlet_sample(const Eigen::Matrix<double, Bins, 1> &alpha,
                                                Rng &rng) {
  Eigen::Matrix<double, Bins, 1> g;
  for (int i = 0; i < Bins; ++i) {
    g(i) = gamma_sample(alpha(i), rng);
  }
  const double total = g.sum();
  if (!(total > 0.0)) {
    // Every gamma underflowed; only reachable with tiny alphas.
    g.setConstant(1.0 / Bins);
    return g;
  }
  return g / total;
}

/// Multinomial(trials, p) by sequential conditional binomials.
template <int Bins>
Eigen::Matrix<int, Bins, 1> multinomial_sample(int trials,
                                               const Eigen::Matrix<double, Bins, 1> &p,
                                               Rng &rng) {
  Eigen::Matrix<int, Bins, 1> out = Eigen::Matrix<int, Bins, 1>::Zero();
  int left = trials;
  double mass = 1.0;
  for (int i = 0; i < Bins - 1 && left > 0; ++i) {
    const double q = mass > 0.0 ? std::clamp(p(i) / mass, 0.0, 1.0) : 0.0;
    out(i) = binomial_sample(left, q, rng);
    left -= out(i);
    mass -= p(i);
  }
  out(Bins - 1) += left;
  return out;
}

} // namespace ddsmc
