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

// Independent reference computations shared by the unit tests and the
// acceptance driver.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

#include "ddsmc/polya_urn.hpp"
#include "ddsmc/proposal.hpp"
#include "ddsmc/rng.hpp"
#include "ddsmc/smc.hpp"
#include "ddsmc/tracking.hpp"
#include "ddsmc/stats.hpp"
#include "ddsmc/types.hpp"
#include "ddsmc/xrp.hpp"

namespace ddsmc::oracle {

// Composite Simpson weights on n (even) intervals.
inline std::vector<double> simpson_weights(int n, double h) {
  std::vector<double> w(static_cast<std::size_t>(n + 1));
  for (int i = 0; i <= n; ++i) {
    w[static_cast<std::size_t>(i)] = (i == 0 || i == n ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0)) * h / 3.0;
  }
  return w;
}

// Predictive density of x under a NIW(mu0=0, k0, nu0, Lambda0=I) prior by
// direct integration: the mean integrates out to N(x | 0, (1 + 1/k0) Sigma),
// and the precision W = Sigma^-1 ~ Wishart(nu0, I) is integrated numerically
// through its Bartlett factor A (W = A A^T) with A11 ~ chi_nu0,
// A22 ~ chi_{nu0-1}, A21 ~ N(0,1).
inline double niw_predictive_by_quadrature(const Vec2 &x, double k0, double nu0) {
  const double c = 1.0 + 1.0 / k0;
  const auto chi_logpdf = [](double s, double k) {
    return (k - 1.0) * std::log(s) - 0.5 * s * s - (0.5 * k - 1.0) * std::log(2.0) -
           std::lgamma(0.5 * k);
  };
  const int ns = 400;
  const double smax = 9.0;
  const double hs = smax / ns;
  const int nz = 320;
  const double zmax = 8.0;
  const double hz = 2.0 * zmax / nz;
  const std::vector<double> ws = simpson_weights(ns, hs);
  const std::vector<double> wz = simpson_weights(nz, hz);
  double total = 0.0;
  for (int i = 1; i <= ns; ++i) {
    const double a11 = i * hs;
    const double p11 = std::exp(chi_logpdf(a11, nu0));
    for (int j = 1; j <= ns; ++j) {
      const double a22 = j * hs;
      const double p22 = std::exp(chi_logpdf(a22, nu0 - 1.0));
      double inner = 0.0;
      for (int k = 0; k <= nz; ++k) {
        const double a21 = -zmax + k * hz;
        const double pz = std::exp(-0.5 * a21 * a21) / std::sqrt(2.0 * std::numbers::pi);
        const double u1 = a11 * x(0) + a21 * x(1);
        const double u2 = a22 * x(1);
        const double det_w = a11 * a11 * a22 * a22;
        const double dens = std::sqrt(det_w) / (2.0 * std::numbers::pi * c) *
                            std::exp(-(u1 * u1 + u2 * u2) / (2.0 * c));
        inner += wz[static_cast<std::size_t>(k)] * pz * dens;
      }
      total += ws[static_cast<std::size_t>(i)] * ws[static_cast<std::size_t>(j)] * p11 * p22 *
               inner;
    }
  }
  return total;
}

// Probability of one specific draw sequence under sequential Polya
// predictives, summed over every sequence with the given counts.
template <int Bins>
double dm_pmf_by_sequences(const Eigen::Matrix<double, Bins, 1> &alpha,
                           const Eigen::Matrix<int, Bins, 1> &target, int trials) {
  double total = 0.0;
  int sequences = 1;
  for (int i = 0; i < trials; ++i) {
    sequences *= Bins;
  }
  for (int code = 0; code < sequences; ++code) {
    Eigen::Matrix<double, Bins, 1> seen = Eigen::Matrix<double, Bins, 1>::Zero();
    Eigen::Matrix<int, Bins, 1> counts = Eigen::Matrix<int, Bins, 1>::Zero();
    double p = 1.0;
    int rest = code;
    for (int draw = 0; draw < trials; ++draw) {
      const int bin = rest % Bins;
      rest /= Bins;
      p *= (alpha(bin) + seen(bin)) / (alpha.sum() + draw);
      seen(bin) += 1.0;
      counts(bin) += 1;
    }
    if (counts == target) {
      total += p;
    }
  }
  return total;
}

template <class Xrp, class Point>
double joint_logdensity(Xrp xrp, const std::vector<Point> &points) {
  double acc = 0.0;
  for (const Point &p : points) {
    if constexpr (std::is_same_v<Point, Vec2>) {
      acc += xrp.predictive_logpdf(p);
    } else {
      acc += xrp.predictive_logpmf(p);
    }
    xrp.incorporate(p);
  }
  return acc;
}

// Largest joint log-density deviation over all orderings of the points.
template <class Xrp, class Point>
double max_ordering_deviation(const Xrp &xrp, std::vector<Point> points) {
  std::vector<int> idx(points.size());
  std::iota(idx.begin(), idx.end(), 0);
  const double ref = joint_logdensity(xrp, points);
  double worst = 0.0;
  do {
    std::vector<Point> perm;
    for (int i : idx) {
      perm.push_back(points[static_cast<std::size_t>(i)]);
    }
    worst = std::max(worst, std::abs(joint_logdensity(xrp, perm) - ref));
  } while (std::next_permutation(idx.begin(), idx.end()));
  return worst;
}

struct MeanAndError {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanAndError mean_and_error(const std::vector<double> &xs) {
  const double n = static_cast<double>(xs.size());
  double sum = 0.0;
  double sumsq = 0.0;
  for (double x : xs) {
    sum += x;
    sumsq += x * x;
  }
  const double mean = sum / n;
  return {mean, std::sqrt(std::max(0.0, sumsq / n - mean * mean) / (n - 1.0))};
}

// Number of clusters after `customers` seatings in one urn frame.
inline std::vector<double> single_frame_cluster_counts(double alpha, int customers, int runs,
                                                       Rng &rng) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(runs));
  for (int r = 0; r < runs; ++r) {
    UrnState s;
    for (int i = 0; i < customers; ++i) {
      const Eigen::VectorXd w = urn_assignment_weights(s, alpha);
      s = urn_apply(std::move(s), static_cast<int>(categorical_sample(w, rng)));
    }
    out.push_back(static_cast<double>(s.K));
  }
  return out;
}

// Surviving mass after one deletion step of an urn with the given sizes.
inline std::vector<double> surviving_mass(const std::vector<int> &ms, double rho, int runs,
                                          Rng &rng) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(runs));
  for (int r = 0; r < runs; ++r) {
    UrnState s;
    s.ms = ms;
    s.K = static_cast<int>(ms.size());
    const UrnState next = urn_frame_init(s, rho, rng);
    out.push_back(std::accumulate(next.ms.begin(), next.ms.end(), 0.0));
  }
  return out;
}

// Two-step hidden chain over three values with a fixed likelihood table.
struct ToyChain {
  Eigen::Vector3d initial{0.5, 0.3, 0.2};
  Eigen::Matrix3d transition = (Eigen::Matrix3d() << 0.6, 0.3, 0.1,  //
                                0.2, 0.5, 0.3,                        //
                                0.25, 0.25, 0.5)
                                   .finished();
  Eigen::Matrix<double, 2, 3> likelihood =
      (Eigen::Matrix<double, 2, 3>() << 0.9, 0.2, 0.05, 0.1, 0.7, 0.4).finished();

  double exact_evidence() const {
    double z = 0.0;
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        z += initial(a) * likelihood(0, a) * transition(a, b) * likelihood(1, b);
      }
    }
    return z;
  }
};

class ToyProgram {
public:
  using State = int;
  using Record = int;

  ToyProgram(ToyChain chain, bool use_prior) : chain_(std::move(chain)), use_prior_(use_prior) {}

  std::size_t num_steps() const { return 2; }
  State initial_state() const { return -1; }

  Advance<State, Record> advance(State prev, std::size_t step, Rng &rng) const {
    const Eigen::Vector3d p = step == 0 ? chain_.initial
                                        : Eigen::Vector3d(chain_.transition.row(prev).transpose());
    const Eigen::Vector3d q = use_prior_ ? p : Eigen::Vector3d(0.15, 0.35, 0.5);
    const int x = static_cast<int>(categorical_sample(q, rng));
    const double log_w = std::log(p(x)) - std::log(q(x)) +
                         std::log(chain_.likelihood(static_cast<Eigen::Index>(step), x));
    return {x, log_w, x};
  }

private:
  ToyChain chain_;
  bool use_prior_;
};

// Evidence estimates from `runs` independent SMC runs on the toy chain.
inline std::vector<double> toy_evidence_estimates(Resampler resampler, bool use_prior,
                                                  std::size_t particles, int runs,
                                                  std::uint64_t seed0) {
  const ToyProgram program(ToyChain{}, use_prior);
  ThreadPool pool(1);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(runs));
  for (int r = 0; r < runs; ++r) {
    SmcConfig config;
    config.particles = particles;
    config.resampler = resampler;
    config.seed = seed0 + static_cast<std::uint64_t>(r);
    out.push_back(std::exp(smc_run(program, config, &pool).log_marginal));
  }
  return out;
}

// Weighted negative log-likelihood of the batch in extended precision,
// written out loop by loop.
inline long double extended_loss(const ProposalNet &net,
                                 const std::vector<TrainingExample> &batch) {
  const int hidden = static_cast<int>(net.b1.size());
  long double total = 0.0L;
  std::vector<long double> h(static_cast<std::size_t>(hidden));
  for (const TrainingExample &ex : batch) {
    for (int j = 0; j < hidden; ++j) {
      long double a = net.b1(j);
      for (int i = 0; i < kFeatureSize; ++i) {
        long double x = ex.features(i);
        for (int slot : kDistanceSlots) {
          if (slot == i) {
            x /= static_cast<long double>(net.distance_scale);
          }
        }
        a += static_cast<long double>(net.w1(j, i)) * x;
      }
      h[static_cast<std::size_t>(j)] = std::tanh(a);
    }
    std::array<long double, kProposalOutputs> z{};
    long double top = -1e300L;
    for (int o = 0; o < kProposalOutputs; ++o) {
      z[static_cast<std::size_t>(o)] = net.b2(o);
      for (int j = 0; j < hidden; ++j) {
        z[static_cast<std::size_t>(o)] +=
            static_cast<long double>(net.w2(o, j)) * h[static_cast<std::size_t>(j)];
      }
      top = std::max(top, z[static_cast<std::size_t>(o)]);
    }
    long double norm = 0.0L;
    for (long double v : z) {
      norm += std::exp(v - top);
    }
    const long double log_p =
        z[static_cast<std::size_t>(ex.target_class - 1)] - top - std::log(norm);
    total -= static_cast<long double>(ex.weight) * log_p;
  }
  return total;
}

// Worst coordinate-wise relative error |analytic - numeric| / max(|analytic|, |numeric|)
// per parameter block, with numeric gradients from central differences of the
// extended-precision loss.
struct GradientCheck {
  double w1 = 0.0;
  double b1 = 0.0;
  double w2 = 0.0;
  double b2 = 0.0;
  double worst() const { return std::max({w1, b1, w2, b2}); }
};

inline GradientCheck finite_difference_check(const ProposalNet &net,
                                             const std::vector<TrainingExample> &batch,
                                             double eps) {
  const NetGradient analytic = nn_loss_and_grad(net, batch).grad;
  const auto block = [&](auto member, const auto &grad) {
    double worst = 0.0;
    ProposalNet probe = net;
    auto &param = member(probe);
    for (Eigen::Index i = 0; i < grad.size(); ++i) {
      const double saved = param.data()[i];
      param.data()[i] = saved + eps;
      const long double up = extended_loss(probe, batch);
      param.data()[i] = saved - eps;
      const long double down = extended_loss(probe, batch);
      param.data()[i] = saved;
      const double step = (saved + eps) - (saved - eps);
      const double numeric = static_cast<double>((up - down) / step);
      const double a = grad.data()[i];
      const double scale = std::max(std::abs(a), std::abs(numeric));
      if (scale > 0.0) {
        worst = std::max(worst, std::abs(a - numeric) / scale);
      }
    }
    return worst;
  };
  GradientCheck out;
  out.w1 = block([](ProposalNet &n) -> Eigen::MatrixXd & { return n.w1; }, analytic.w1);
  out.b1 = block([](ProposalNet &n) -> Eigen::VectorXd & { return n.b1; }, analytic.b1);
  out.w2 = block([](ProposalNet &n) -> Eigen::MatrixXd & { return n.w2; }, analytic.w2);
  out.b2 = block([](ProposalNet &n) -> Eigen::VectorXd & { return n.b2; }, analytic.b2);
  return out;
}

// Random batch with features on the scale seen during inference.
inline std::vector<TrainingExample> random_batch(int size, Rng &rng) {
  std::vector<TrainingExample> batch(static_cast<std::size_t>(size));
  for (TrainingExample &ex : batch) {
    for (int i = 0; i < kFeatureSize; ++i) {
      ex.features(i) = 2.0 * rng.uniform() - 1.0;
    }
    for (int slot : kDistanceSlots) {
      ex.features(slot) = 3.0 * rng.uniform();
    }
    ex.target_class = 1 + static_cast<int>(rng.uniform() * kProposalOutputs);
    ex.weight = 0.1 + rng.uniform();
  }
  return batch;
}

// Maximum total weight over all one-to-one partial matchings, by enumeration.
inline double brute_force_matching(const Eigen::MatrixXd &w) {
  const Eigen::Index rows = w.rows();
  const Eigen::Index cols = w.cols();
  double best = 0.0;
  std::vector<int> used(static_cast<std::size_t>(cols), 0);
  const auto recurse = [&](auto &self, Eigen::Index r, double acc) -> void {
    if (r == rows) {
      best = std::max(best, acc);
      return;
    }
    self(self, r + 1, acc);
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!used[static_cast<std::size_t>(c)]) {
        used[static_cast<std::size_t>(c)] = 1;
        self(self, r + 1, acc + w(r, c));
        used[static_cast<std::size_t>(c)] = 0;
      }
    }
  };
  recurse(recurse, 0, 0.0);
  return best;
}

inline double box_iou(const Box &a, const Box &b) {
  const double w = std::max(0.0, std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min));
  const double h = std::max(0.0, std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min));
  const double inter = w * h;
  const double uni = (a.x_max - a.x_min) * (a.y_max - a.y_min) +
                     (b.x_max - b.x_min) * (b.y_max - b.y_min) - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

// Frame detection accuracy with the matching found by enumeration.
inline double fda_by_enumeration(const std::vector<Box> &dets, const std::vector<Box> &gts) {
  if (dets.empty() && gts.empty()) {
    return 1.0;
  }
  Eigen::MatrixXd w(static_cast<Eigen::Index>(gts.size()), static_cast<Eigen::Index>(dets.size()));
  for (std::size_t g = 0; g < gts.size(); ++g) {
    for (std::size_t d = 0; d < dets.size(); ++d) {
      w(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(d)) = box_iou(gts[g], dets[d]);
    }
  }
  return brute_force_matching(w) / (0.5 * static_cast<double>(dets.size() + gts.size()));
}

// Track accuracy with the track matching found by enumeration.
inline double ata_by_enumeration(const std::vector<GtTrack> &dets,
                                 const std::vector<GtTrack> &gts) {
  if (dets.empty() && gts.empty()) {
    return 0.0;
  }
  Eigen::MatrixXd w(static_cast<Eigen::Index>(gts.size()), static_cast<Eigen::Index>(dets.size()));
  for (std::size_t g = 0; g < gts.size(); ++g) {
    for (std::size_t d = 0; d < dets.size(); ++d) {
      std::vector<int> frames;
      for (const auto &kv : gts[g].frames) {
        frames.push_back(kv.first);
      }
      for (const auto &kv : dets[d].frames) {
        frames.push_back(kv.first);
      }
      std::sort(frames.begin(), frames.end());
      frames.erase(std::unique(frames.begin(), frames.end()), frames.end());
      double overlap = 0.0;
      for (int t : frames) {
        const auto gi = gts[g].frames.find(t);
        const auto di = dets[d].frames.find(t);
        if (gi != gts[g].frames.end() && di != dets[d].frames.end()) {
          overlap += box_iou(gi->second, di->second);
        }
      }
      w(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(d)) =
          frames.empty() ? 0.0 : overlap / static_cast<double>(frames.size());
    }
  }
  return brute_force_matching(w) / (0.5 * static_cast<double>(dets.size() + gts.size()));
}

inline Box random_box(Rng &rng, double extent) {
  const double x = extent * rng.uniform();
  const double y = extent * rng.uniform();
  return {x, y, x + 0.5 + 0.4 * extent * rng.uniform(), y + 0.5 + 0.4 * extent * rng.uniform()};
}

} // namespace ddsmc::oracle
