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

#include "ddsmc/ddpmo_smc.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "ddsmc/errors.hpp"

namespace ddsmc {

using nlohmann::json;

Dataset make_dataset(std::vector<PixelRecord> records, int trials) {
  Dataset data;
  int t = 0;
  int n = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const PixelRecord &r = records[i];
    const std::string where = "record " + std::to_string(i + 1) + " (t=" + std::to_string(r.t) +
                              ", n=" + std::to_string(r.n) + ")";
    if (r.t < t || r.t < 1) {
      throw InvalidArgument(where + ": frames must be >= 1 and nondecreasing");
    }
    if (r.t > t) {
      data.frame_sizes.resize(static_cast<std::size_t>(r.t), 0);
      t = r.t;
      n = 0;
    }
    if (r.n != n + 1) {
      throw InvalidArgument(where + ": expected n=" + std::to_string(n + 1));
    }
    n = r.n;
    data.frame_sizes[static_cast<std::size_t>(t - 1)] = n;
    if (!r.pos.allFinite()) {
      throw InvalidArgument(where + ": non-finite position");
    }
    if ((r.col.array() < 0).any() || r.col.sum() != trials) {
      throw InvalidArgument(where + ": colour counts must be nonnegative and sum to " +
                            std::to_string(trials));
    }
  }
  data.records = std::move(records);
  return data;
}

DdpmoProgram::DdpmoProgram(const Dataset &data, Hyper hyper, ProposalSpec spec,
                           bool record_features)
    : data_(&data), hyper_(std::move(hyper)), spec_(std::move(spec)),
      record_features_(record_features) {
  hyper_.validate();
  spec_.validate();
}

Advance<ModelState, StepRecord> DdpmoProgram::advance(ModelState state, std::size_t step,
                                                      Rng &rng) const {
  const PixelRecord &px = data_->records[step];
  if (px.n == 1) {
    while (state.frame < px.t) {
      state = frame_begin(state, hyper_, data_->frame_size(state.frame + 1), rng);
    }
  }
  const ProposalDraw draw = propose_assignment(state, px, hyper_, spec_, record_features_, rng);
  ObserveResult obs = observe_pixel(std::move(state), px, draw.choice, hyper_);
  StepRecord rec;
  rec.t = px.t;
  rec.n = px.n;
  rec.cluster = draw.choice.cluster;
  rec.target_class = draw.target_class;
  if (record_features_ && draw.features) {
    rec.features = draw.features->x;
  }
  if (px.n == data_->frame_size(px.t)) {
    rec.prediction = std::make_shared<const FramePrediction>(predict_record(obs.state));
  }
  return {std::move(obs.state), obs.log_weight, std::move(rec)};
}

DdpmoRun run_inference(const Dataset &data, const InferenceOptions &options, ThreadPool *pool) {
  const DdpmoProgram program(data, options.hyper, options.proposal, options.record_features);
  return smc_run(program, options.smc, pool);
}

std::vector<const FramePrediction *> RunFile::lineage_predictions(std::size_t particle) const {
  std::vector<const FramePrediction *> out;
  if (particle >= finals.size()) {
    throw InvalidArgument("lineage_predictions: particle index out of range");
  }
  for (int id = finals[particle].node; id >= 0; id = nodes[static_cast<std::size_t>(id)].parent) {
    const RunNode &node = nodes[static_cast<std::size_t>(id)];
    if (node.prediction) {
      out.push_back(&*node.prediction);
    }
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::size_t RunFile::best_particle() const {
  if (finals.empty()) {
    throw InvalidArgument("run has no final particles");
  }
  std::size_t best = 0;
  for (std::size_t p = 1; p < finals.size(); ++p) {
    if (finals[p].weight > finals[best].weight) {
      best = p;
    }
  }
  return best;
}

RunFile to_run_file(const DdpmoRun &run, json config) {
  using Node = TraceNode<StepRecord>;
  RunFile out;
  out.config = std::move(config);
  out.step_log_mean = run.step_log_mean;
  out.log_marginal = run.log_marginal;
  out.mean_final_log_weight = run.mean_final_log_weight;

  std::unordered_map<const Node *, int> ids;
  std::vector<const Node *> order;
  for (const auto &trace : run.traces) {
    for (const Node *node = trace.get(); node != nullptr && !ids.contains(node);
         node = node->parent.get()) {
      ids.emplace(node, -1);
      order.push_back(node);
    }
  }
  std::stable_sort(order.begin(), order.end(),
                   [](const Node *a, const Node *b) { return a->step < b->step; });
  for (std::size_t i = 0; i < order.size(); ++i) {
    ids[order[i]] = static_cast<int>(i);
  }
  out.nodes.reserve(order.size());
  for (const Node *node : order) {
    RunNode rn;
    rn.parent = node->parent ? ids.at(node->parent.get()) : -1;
    rn.step = static_cast<int>(node->step);
    rn.t = node->record.t;
    rn.n = node->record.n;
    rn.cluster = node->record.cluster;
    rn.target_class = node->record.target_class;
    rn.features = node->record.features;
    if (node->record.prediction) {
      rn.prediction = *node->record.prediction;
    }
    out.nodes.push_back(std::move(rn));
  }
  for (std::size_t p = 0; p < run.traces.size(); ++p) {
    const auto i = static_cast<Eigen::Index>(p);
    out.finals.push_back({run.traces[p] ? ids.at(run.traces[p].get()) : -1,
                          run.final_log_weights(i), run.final_weights(i)});
  }
  return out;
}

namespace {

json vec_json(const Eigen::Ref<const Eigen::VectorXd> &v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    a.push_back(v(i));
  }
  return a;
}

double number_or_neg_inf(const json &j) {
  return j.is_null() ? -std::numeric_limits<double>::infinity() : j.get<double>();
}

template <int N> Eigen::Matrix<double, N, 1> vec_from(const json &j, const char *what) {
  if (!j.is_array() || j.size() != static_cast<std::size_t>(N)) {
    throw ParseError(0, std::string("run file: '") + what + "' has the wrong length");
  }
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) {
    v(i) = j[static_cast<std::size_t>(i)].get<double>();
  }
  return v;
}

} // namespace

json prediction_to_json(const FramePrediction &p) {
  json clusters = json::array();
  for (const ClusterSummary &c : p.clusters) {
    clusters.push_back({{"k", c.k},
                        {"mu", vec_json(c.mu)},
                        {"Sigma", json::array({vec_json(c.sigma.row(0).transpose()),
                                               vec_json(c.sigma.row(1).transpose())})},
                        {"ps", vec_json(c.ps)}});
  }
  return {{"t", p.t}, {"n", p.n}, {"cs", p.cs}, {"K", p.K}, {"ms", p.ms}, {"clusters", clusters}};
}

FramePrediction prediction_from_json(const json &j) {
  FramePrediction p;
  p.t = j.at("t").get<int>();
  p.n = j.at("n").get<int>();
  p.cs = j.at("cs").get<std::vector<int>>();
  p.K = j.at("K").get<int>();
  p.ms = j.at("ms").get<std::vector<int>>();
  for (const json &c : j.at("clusters")) {
    ClusterSummary s;
    s.k = c.at("k").get<int>();
    s.mu = vec_from<2>(c.at("mu"), "mu");
    const json &sigma = c.at("Sigma");
    if (!sigma.is_array() || sigma.size() != 2) {
      throw ParseError(0, "run file: 'Sigma' must be 2x2");
    }
    s.sigma.row(0) = vec_from<2>(sigma[0], "Sigma").transpose();
    s.sigma.row(1) = vec_from<2>(sigma[1], "Sigma").transpose();
    s.ps = vec_from<kColourBins>(c.at("ps"), "ps");
    p.clusters.push_back(s);
  }
  return p;
}

json run_file_to_json(const RunFile &run) {
  json nodes = json::array();
  for (const RunNode &n : run.nodes) {
    json jn = {{"parent", n.parent}, {"step", n.step},   {"t", n.t},
               {"n", n.n},           {"cluster", n.cluster}, {"class", n.target_class}};
    if (n.features) {
      jn["features"] = vec_json(*n.features);
    }
    if (n.prediction) {
      jn["prediction"] = prediction_to_json(*n.prediction);
    }
    nodes.push_back(std::move(jn));
  }
  json finals = json::array();
  for (const FinalParticle &f : run.finals) {
    finals.push_back({{"node", f.node}, {"log_weight", f.log_weight}, {"weight", f.weight}});
  }
  return {{"format", "ddsmc-run"},
          {"version", 1},
          {"config", run.config},
          {"log_marginal", run.log_marginal},
          {"mean_final_log_weight", run.mean_final_log_weight},
          {"step_log_mean", run.step_log_mean},
          {"final", finals},
          {"nodes", nodes}};
}

RunFile run_file_from_json(const json &j) {
  try {
    if (j.at("format").get<std::string>() != "ddsmc-run") {
      throw ParseError(0, "not a ddsmc run file");
    }
    if (j.at("version").get<int>() != 1) {
      throw VersionMismatch(0, "unsupported run file version " + j.at("version").dump());
    }
    RunFile run;
    run.config = j.at("config");
    run.log_marginal = number_or_neg_inf(j.at("log_marginal"));
    run.mean_final_log_weight = number_or_neg_inf(j.at("mean_final_log_weight"));
    for (const json &v : j.at("step_log_mean")) {
      run.step_log_mean.push_back(number_or_neg_inf(v));
    }
    for (const json &jn : j.at("nodes")) {
      RunNode n;
      n.parent = jn.at("parent").get<int>();
      n.step = jn.at("step").get<int>();
      n.t = jn.at("t").get<int>();
      n.n = jn.at("n").get<int>();
      n.cluster = jn.at("cluster").get<int>();
      n.target_class = jn.at("class").get<int>();
      if (n.parent >= static_cast<int>(run.nodes.size())) {
        throw ParseError(0, "run file: node parent must precede the node");
      }
      if (jn.contains("features")) {
        n.features = vec_from<kFeatureSize>(jn["features"], "features");
      }
      if (jn.contains("prediction")) {
        n.prediction = prediction_from_json(jn["prediction"]);
      }
      run.nodes.push_back(std::move(n));
    }
    for (const json &jf : j.at("final")) {
      FinalParticle f{jf.at("node").get<int>(), number_or_neg_inf(jf.at("log_weight")),
                      jf.at("weight").get<double>()};
      if (f.node < -1 || f.node >= static_cast<int>(run.nodes.size())) {
        throw ParseError(0, "run file: final particle references a missing node");
      }
      run.finals.push_back(f);
    }
    return run;
  } catch (const json::exception &e) {
    throw ParseError(0, std::string("run file: ") + e.what());
  }
}

void write_run_file(const RunFile &run, const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open " + path + " for writing");
  }
  out << run_file_to_json(run).dump() << '\n';
}

RunFile read_run_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open run file " + path);
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception &e) {
    throw ParseError(0, path + ": " + e.what());
  }
  return run_file_from_json(j);
}

json hyper_to_json(const Hyper &hyper) {
  return {{"alpha", hyper.alpha},
          {"rho", hyper.rho},
          {"mu0", vec_json(hyper.niw.mu0)},
          {"k0", hyper.niw.k0},
          {"nu0", hyper.niw.nu0},
          {"lambda0", json::array({vec_json(hyper.niw.lambda0.row(0).transpose()),
                                   vec_json(hyper.niw.lambda0.row(1).transpose())})},
          {"q0", vec_json(hyper.q0)},
          {"m_aux", hyper.m_aux},
          {"trials", hyper.trials}};
}

} // namespace ddsmc
