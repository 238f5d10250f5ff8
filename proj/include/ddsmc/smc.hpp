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

#include <cassert>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ddsmc/errors.hpp"
#include "ddsmc/parallel.hpp"
#include "ddsmc/rng.hpp"

namespace ddsmc {

enum class Resampler { multinomial, systematic };
enum class ResamplePolicy { every_step, ess_threshold };

struct SmcConfig {
  std::size_t particles = 100;
  Resampler resampler = Resampler::multinomial;
  ResamplePolicy policy = ResamplePolicy::every_step;
  double ess_threshold = 0.5; ///< fraction of P, used by ess_threshold policy
  std::uint64_t seed = 0;
  unsigned threads = 1;

  void validate() const;
};

struct NormalizedWeights {
  Eigen::VectorXd w;
  double log_mean = 0.0; ///< log((1/P) sum exp(log_w))
};

/// Log-sum-exp normalization. Throws DegeneracyError(0) if every entry is -inf.
NormalizedWeights normalize_weights(const Eigen::VectorXd &log_w);

/// Sorted ancestor indices; E[copies of i] = count * w[i].
std::vector<std::size_t> resample_multinomial(const Eigen::VectorXd &w, std::size_t count,
                                              Rng &rng);
std::vector<std::size_t> resample_systematic(const Eigen::VectorXd &w, std::size_t count,
                                             Rng &rng);

/// Effective sample size 1 / sum(w^2).
double ess(const Eigen::VectorXd &w);

const char *to_string(Resampler r);
const char *to_string(ResamplePolicy p);
Resampler parse_resampler(const std::string &s);

/// Result of moving one particle through one observe step.
template <class State, class Record> struct Advance {
  State state;
  double log_weight = 0.0; ///< log W for this step
  Record record;
};

/// Persistent trajectory: each node links to the node of its ancestor at the
/// previous step, so resampled particles share prefixes.
template <class Record> struct TraceNode {
  std::shared_ptr<const TraceNode> parent;
  std::size_t step = 0;
  Record record;
};

template <class Record> using Trace = std::shared_ptr<const TraceNode<Record>>;

template <class P>
concept SmcProgram = requires(const P &program, typename P::State &&state, std::size_t step,
                              Rng &rng) {
  typename P::State;
  typename P::Record;
  { program.num_steps() } -> std::convertible_to<std::size_t>;
  { program.initial_state() } -> std::convertible_to<typename P::State>;
  {
    program.advance(std::move(state), step, rng)
  } -> std::convertible_to<Advance<typename P::State, typename P::Record>>;
};

template <class State, class Record> struct RunResult {
  std::vector<State> final_states;
  std::vector<Trace<Record>> traces;
  /// Per-particle log weights after the last step. After every resampling
  /// each particle carries the running log evidence, so these are
  /// log_marginal(1:N-1) + log W_N for an every-step policy.
  Eigen::VectorXd final_log_weights;
  Eigen::VectorXd final_weights;
  std::vector<double> step_log_mean; ///< log of the weighted mean W at each step
  std::vector<double> step_ess;
  std::vector<char> resampled;
  double log_marginal = 0.0;
  double mean_final_log_weight = 0.0;
};

namespace detail {

template <class T>
std::vector<T> gather(std::vector<T> &from, const std::vector<std::size_t> &ancestors) {
  std::vector<std::size_t> uses(from.size(), 0);
  for (std::size_t a : ancestors) {
    ++uses[a];
  }
  std::vector<T> out;
  out.reserve(ancestors.size());
  for (std::size_t a : ancestors) {
    if (--uses[a] == 0) {
      out.push_back(std::move(from[a]));
    } else {
      out.push_back(from[a]);
    }
  }
  return out;
}

double mean_with_infinities(const Eigen::VectorXd &v);

} // namespace detail

/// Sequential Monte Carlo over program.num_steps() observe steps.
///
/// Particle p draws its randomness at step n from particle_stream(seed, n, p)
/// and resampling at step n from its own keyed stream, so the result is a pure
/// function of (program, config) for any worker count.
template <SmcProgram Program>
RunResult<typename Program::State, typename Program::Record>
smc_run(const Program &program, const SmcConfig &config, ThreadPool *pool = nullptr) {
  using State = typename Program::State;
  using Record = typename Program::Record;
  config.validate();
  const std::size_t n_steps = program.num_steps();
  if (n_steps == 0) {
    throw InvalidArgument("smc_run: program has no observe steps");
  }
  std::optional<ThreadPool> owned;
  if (pool == nullptr) {
    owned.emplace(config.threads);
    pool = &*owned;
  }

  const std::size_t P = config.particles;
  std::vector<State> states(P, program.initial_state());
  std::vector<Trace<Record>> traces(P);
  Eigen::VectorXd log_w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(P));
  double log_z = 0.0;

  RunResult<State, Record> result;
  result.step_log_mean.reserve(n_steps);
  result.step_ess.reserve(n_steps);
  result.resampled.reserve(n_steps);

  std::vector<std::optional<State>> next(P);
  std::vector<Trace<Record>> next_traces(P);
  Eigen::VectorXd increments(static_cast<Eigen::Index>(P));

  for (std::size_t step = 0; step < n_steps; ++step) {
    pool->parallel_for(P, [&](std::size_t p) {
      Rng rng = particle_stream(config.seed, step, p);
      Advance<State, Record> adv = program.advance(std::move(states[p]), step, rng);
      increments(static_cast<Eigen::Index>(p)) = adv.log_weight;
      next[p].emplace(std::move(adv.state));
      next_traces[p] = std::make_shared<const TraceNode<Record>>(
          TraceNode<Record>{std::move(traces[p]), step, std::move(adv.record)});
    });
    for (std::size_t p = 0; p < P; ++p) {
      states[p] = std::move(*next[p]);
      next[p].reset();
      traces[p] = std::move(next_traces[p]);
    }
    if (increments.hasNaN()) {
      throw NumericalError("smc_run: NaN log weight at step " + std::to_string(step));
    }
    log_w += increments;

    NormalizedWeights nw;
    try {
      nw = normalize_weights(log_w);
    } catch (const DegeneracyError &) {
      throw DegeneracyError(step, "smc_run: every particle has zero weight at step " +
                                      std::to_string(step));
    }
    result.step_log_mean.push_back(nw.log_mean - log_z);
    log_z = nw.log_mean;
    const double step_ess = ess(nw.w);
    assert(std::abs(nw.w.sum() - 1.0) < 1e-9);
    assert(step_ess >= 1.0 - 1e-9 && step_ess <= static_cast<double>(P) + 1e-9);
    result.step_ess.push_back(step_ess);

    const bool last = step + 1 == n_steps;
    const bool want = config.policy == ResamplePolicy::every_step ||
                      step_ess < config.ess_threshold * static_cast<double>(P);
    if (!last && want) {
      Rng rng = keyed_stream(config.seed, StreamDomain::resample, step);
      const std::vector<std::size_t> ancestors =
          config.resampler == Resampler::systematic ? resample_systematic(nw.w, P, rng)
                                                    : resample_multinomial(nw.w, P, rng);
      states = detail::gather(states, ancestors);
      traces = detail::gather(traces, ancestors);
      log_w.setConstant(log_z);
      result.resampled.push_back(1);
    } else {
      result.resampled.push_back(0);
    }
    if (last) {
      result.final_weights = nw.w;
    }
  }

  result.final_states = std::move(states);
  result.traces = std::move(traces);
  result.final_log_weights = log_w;
  result.log_marginal = log_z;
  result.mean_final_log_weight = detail::mean_with_infinities(log_w);
  return result;
}

} // namespace ddsmc
