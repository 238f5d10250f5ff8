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

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ddsmc/ddpmo_smc.hpp"
#include "ddsmc/tracking.hpp"

namespace ddsmc {

struct SweepConfig {
  Hyper hyper;
  std::vector<ProposalKind> kinds{ProposalKind::prior, ProposalKind::handtuned, ProposalKind::nn};
  std::vector<std::size_t> particles{10, 100, 1000};
  std::vector<std::uint64_t> seeds;
  ProposalSpec proposal; ///< net, handtuned_p and p_star shared by every cell
  SmcConfig smc;         ///< particles and seed are set per cell
  EvalOptions eval;
  unsigned workers = 1;
};

struct SweepCell {
  ProposalKind kind = ProposalKind::prior;
  std::size_t particles = 0;
  std::uint64_t seed = 0;
  MetricsReport report;
  std::string status = "ok";
};

/// Runs every (kind, particles, seed) cell; cell results depend only on the
/// cell, never on the worker count. A failing cell is recorded, not thrown.
std::vector<SweepCell> run_sweep(const Dataset &data, const std::vector<GtTrack> &gt,
                                 const SweepConfig &config);

struct SweepSummary {
  ProposalKind kind = ProposalKind::prior;
  std::size_t particles = 0;
  std::size_t ok = 0;
  double median_sfda = 0.0;
  double median_ata = 0.0;
  double median_mean_final_log_weight = 0.0;
  double sd_mean_final_log_weight = 0.0;
  double median_log_marginal = 0.0;
};

std::vector<SweepSummary> summarize_sweep(const std::vector<SweepCell> &cells);

/// Midpoint median; NaN for an empty input.
double median(std::vector<double> v);
/// Sample standard deviation; 0 for fewer than two values.
double sample_sd(const std::vector<double> &v);

/// Entry point of the `ddsmc` tool. Returns the process exit code; errors are
/// reported as one line `error: <kind>: <message>` on `err`.
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace ddsmc
