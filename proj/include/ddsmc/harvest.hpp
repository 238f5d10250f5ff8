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

#include <string>
#include <vector>

#include "ddsmc/ddpmo_smc.hpp"
#include "ddsmc/proposal.hpp"

namespace ddsmc {

/// Smoothing-weighted examples: every trajectory node with features becomes
/// one example weighted by the summed final weight of the particles whose
/// lineage passes through it. Throws InvalidArgument for a run without final
/// particles.
std::vector<TrainingExample> harvest_training_data(const RunFile &run);

/// Weighted class frequencies of a corpus, normalized to the 5-simplex.
/// Throws InvalidArgument when the corpus carries no weight.
Vec5 class_frequencies(const std::vector<TrainingExample> &examples);

/// One example per line: 43 features, class, weight (comma separated).
void write_training_data(const std::vector<TrainingExample> &examples, const std::string &path);
std::vector<TrainingExample> read_training_data(const std::string &path);

} // namespace ddsmc
