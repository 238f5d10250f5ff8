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

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ddsmc/ddpmo.hpp"
#include "ddsmc/proposal.hpp"
#include "ddsmc/smc.hpp"

namespace ddsmc {

/// Pixel records sorted by (t, n) with n = 1..N_t contiguous per frame.
struct Dataset {
  std::vector<PixelRecord> records;
  std::vector<int> frame_sizes; ///< frame_sizes[t-1] = N_t

  int frames() const { return static_cast<int>(frame_sizes.size()); }
  int frame_size(int t) const {
    return t >= 1 && t <= frames() ? frame_sizes[static_cast<std::size_t>(t - 1)] : 0;
  }
};

/// Validates ordering and colour totals; throws InvalidArgument naming the
/// offending record index.
Dataset make_dataset(std::vector<PixelRecord> records, int trials = kPatchTrials);

/// What one particle did at one pixel.
struct StepRecord {
  int t = 0;
  int n = 0;
  int cluster = 0;
  int target_class = 0; ///< 0 when features were unavailable
  std::optional<FeatureVector> features;
  std::shared_ptr<const FramePrediction> prediction; ///< set on the last pixel of a frame
};

/// One observe step per pixel record; frame transitions happen lazily in the
/// step of a frame's first pixel.
class DdpmoProgram {
public:
  using State = ModelState;
  using Record = StepRecord;

  DdpmoProgram(const Dataset &data, Hyper hyper, ProposalSpec spec, bool record_features);

  std::size_t num_steps() const { return data_->records.size(); }
  State initial_state() const { return {}; }
  Advance<State, Record> advance(State state, std::size_t step, Rng &rng) const;

private:
  const Dataset *data_;
  Hyper hyper_;
  ProposalSpec spec_;
  bool record_features_;
};

using DdpmoRun = RunResult<ModelState, StepRecord>;

struct InferenceOptions {
  Hyper hyper;
  ProposalSpec proposal;
  SmcConfig smc;
  bool record_features = false;
};

DdpmoRun run_inference(const Dataset &data, const InferenceOptions &options,
                       ThreadPool *pool = nullptr);

/// Flat, serializable view of a run: the distinct trajectory nodes reachable
/// from the final particles.
struct RunNode {
  int parent = -1;
  int step = 0;
  int t = 0;
  int n = 0;
  int cluster = 0;
  int target_class = 0;
  std::optional<FeatureVector> features;
  std::optional<FramePrediction> prediction;
};

struct FinalParticle {
  int node = -1;
  double log_weight = 0.0;
  double weight = 0.0;
};

struct RunFile {
  nlohmann::json config = nlohmann::json::object();
  std::vector<double> step_log_mean;
  double log_marginal = 0.0;
  double mean_final_log_weight = 0.0;
  std::vector<RunNode> nodes;
  std::vector<FinalParticle> finals;

  /// End-of-frame predictions along one final particle's trajectory, by frame.
  std::vector<const FramePrediction *> lineage_predictions(std::size_t particle) const;
  std::size_t best_particle() const;
};

RunFile to_run_file(const DdpmoRun &run, nlohmann::json config);

nlohmann::json prediction_to_json(const FramePrediction &p);
FramePrediction prediction_from_json(const nlohmann::json &j);

nlohmann::json run_file_to_json(const RunFile &run);
RunFile run_file_from_json(const nlohmann::json &j);
void write_run_file(const RunFile &run, const std::string &path);
RunFile read_run_file(const std::string &path);

nlohmann::json hyper_to_json(const Hyper &hyper);

} // namespace ddsmc
