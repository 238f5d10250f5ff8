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

#include "ddsmc/harvest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "ddsmc/errors.hpp"

namespace ddsmc {

std::vector<TrainingExample> harvest_training_data(const RunFile &run) {
  if (run.finals.empty() || run.nodes.empty()) {
    throw InvalidArgument("harvest: run has no trajectories");
  }
  // Parents precede children, so one reverse sweep pushes final weights up
  // every lineage.
  std::vector<double> mass(run.nodes.size(), 0.0);
  for (const FinalParticle &f : run.finals) {
    if (f.node < 0) {
      throw InvalidArgument("harvest: final particle without a trajectory");
    }
    mass[static_cast<std::size_t>(f.node)] += f.weight;
  }
  for (std::size_t i = run.nodes.size(); i-- > 0;) {
    const int parent = run.nodes[i].parent;
    if (parent >= 0) {
      mass[static_cast<std::size_t>(parent)] += mass[i];
    }
  }
  std::vector<TrainingExample> out;
  for (std::size_t i = 0; i < run.nodes.size(); ++i) {
    const RunNode &node = run.nodes[i];
    if (node.features && node.target_class >= 1 && mass[i] > 0.0) {
      out.push_back({*node.features, node.target_class, mass[i]});
    }
  }
  return out;
}

Vec5 class_frequencies(const std::vector<TrainingExample> &examples) {
  Vec5 freq = Vec5::Zero();
  for (const TrainingExample &e : examples) {
    if (e.target_class < 1 || e.target_class > kProposalOutputs) {
      throw InvalidArgument("class_frequencies: class out of range");
    }
    freq(e.target_class - 1) += e.weight;
  }
  const double total = freq.sum();
  if (!(total > 0.0)) {
    throw InvalidArgument("class_frequencies: corpus has no weight");
  }
  return freq / total;
}

void write_training_data(const std::vector<TrainingExample> &examples, const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open " + path + " for writing");
  }
  char buf[64];
  const auto put = [&](double v) {
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, res.ptr - buf);
  };
  for (const TrainingExample &e : examples) {
    for (int i = 0; i < kFeatureSize; ++i) {
      put(e.features(i));
      out << ',';
    }
    out << e.target_class << ',';
    put(e.weight);
    out << '\n';
  }
}

std::vector<TrainingExample> read_training_data(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open training data " + path);
  }
  std::vector<TrainingExample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') {
      continue;
    }
    std::vector<double> values;
    const char *p = line.data();
    const char *end = p + line.size();
    while (p <= end) {
      const char *comma = std::find(p, end, ',');
      double v = 0.0;
      const auto res = std::from_chars(p, comma, v);
      if (res.ec != std::errc() || res.ptr != comma) {
        throw ParseError(lineno, path + ":" + std::to_string(lineno) + ": bad number");
      }
      values.push_back(v);
      p = comma + 1;
    }
    if (values.size() != static_cast<std::size_t>(kFeatureSize) + 2) {
      throw DimensionMismatch(lineno, path + ":" + std::to_string(lineno) + ": expected " +
                                          std::to_string(kFeatureSize + 2) + " fields");
    }
    TrainingExample e;
    for (int i = 0; i < kFeatureSize; ++i) {
      e.features(i) = values[static_cast<std::size_t>(i)];
    }
    const double cls = values[kFeatureSize];
    e.target_class = static_cast<int>(cls);
    e.weight = values[kFeatureSize + 1];
    if (cls != e.target_class || e.target_class < 1 || e.target_class > kProposalOutputs ||
        !(e.weight >= 0.0)) {
      throw ParseError(lineno, path + ":" + std::to_string(lineno) + ": bad class or weight");
    }
    out.push_back(e);
  }
  return out;
}

} // namespace ddsmc
