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

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ddsmc/cli.hpp"
#include "ddsmc/ddpmo_smc.hpp"
#include "ddsmc/proposal.hpp"
#include "ddsmc/scene.hpp"

using namespace ddsmc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome cli(const std::vector<std::string> &args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> data_lines(const std::string &text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line[0] != '#') {
      out.push_back(line);
    }
  }
  return out;
}

// Fresh scratch directory per test case.
fs::path scratch(const std::string &name) {
  const fs::path dir = fs::temp_directory_path() / "ddsmc_test_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Small two-object scene written as dataset, ground truth and hyper config.
struct SmallScene {
  fs::path dataset;
  fs::path gt;
  fs::path hyper;
};

SmallScene small_scene(const fs::path &dir) {
  SceneConfig cfg;
  cfg.frames = 8;
  cfg.clutter_per_frame = 3;
  SceneObject a;
  a.death = 8;
  a.start = Vec2(40, 40);
  a.velocity = Vec2(4, 1);
  a.pixels_per_frame = 12;
  a.profile = ColourVec::Constant(0.02);
  a.profile(0) = 0.82;
  SceneObject b = a;
  b.start = Vec2(150, 60);
  b.velocity = Vec2(-3, -1);
  b.profile = ColourVec::Constant(0.02);
  b.profile(5) = 0.82;
  cfg.objects = {a, b};
  const Scene s = generate(cfg, 11);
  SmallScene out{dir / "data.csv", dir / "gt.csv", dir / "hyper.cfg"};
  write_dataset(s.records, out.dataset.string());
  write_gt(s.gt, out.gt.string());
  std::ofstream hyper(out.hyper);
  const Hyper h = scene_hyper(cfg);
  hyper << "mu0 = " << h.niw.mu0(0) << "," << h.niw.mu0(1) << "\n";
  hyper << "lambda0 = " << h.niw.lambda0(0, 0) << ",0,0," << h.niw.lambda0(1, 1) << "\n";
  return out;
}

fs::path write_net(const fs::path &dir) {
  const fs::path path = dir / "net.txt";
  save_net(ProposalNet::initialized(5), path.string());
  return path;
}

} // namespace

TEST_CASE("gen creates its output directory and is reproducible") {
  const fs::path dir = scratch("gen");
  const fs::path out = dir / "a" / "b";
  const Outcome r = cli({"gen", "--scene", "train", "--seed", "4", "--out", out.string()});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(out / "train_dataset.csv"));
  CHECK(fs::exists(out / "train_gt.csv"));
  CHECK(fs::exists(out / "train_hyper.cfg"));
  const std::vector<PixelRecord> records = load_dataset((out / "train_dataset.csv").string());
  CHECK(records.back().t == 30);

  const std::string first = slurp(out / "train_dataset.csv");
  const Outcome again = cli({"gen", "--scene", "train", "--seed", "4", "--out", out.string()});
  CHECK(again.code == 1);
  CHECK(again.err.rfind("error: exists: ", 0) == 0);
  CHECK(std::count(again.err.begin(), again.err.end(), '\n') == 1);
  const Outcome forced =
      cli({"gen", "--scene", "train", "--seed", "4", "--out", out.string(), "--force"});
  CHECK(forced.code == 0);
  CHECK(slurp(out / "train_dataset.csv") == first);
}

TEST_CASE("infer is deterministic and the q=p identity holds") {
  const fs::path dir = scratch("infer");
  const SmallScene s = small_scene(dir);
  const fs::path net = write_net(dir);
  const std::vector<std::string> base{"infer", "--dataset", s.dataset.string(), "--config",
                                      s.hyper.string(), "--particles", "12", "--seed", "3"};
  auto with = [&](std::vector<std::string> extra) {
    std::vector<std::string> args = base;
    args.insert(args.end(), extra.begin(), extra.end());
    return cli(args);
  };
  REQUIRE(with({"--out", (dir / "one").string()}).code == 0);
  REQUIRE(with({"--out", (dir / "two").string(), "--threads", "3"}).code == 0);
  const std::string a = slurp(dir / "one" / "run_prior_p12_s3.json");
  CHECK_FALSE(a.empty());
  CHECK(a == slurp(dir / "two" / "run_prior_p12_s3.json"));

  const Outcome nn = with({"--out", (dir / "nn").string(), "--proposal", "nn", "--net",
                           net.string(), "--p-star", "0"});
  REQUIRE(nn.code == 0);
  CHECK(nn.out.find("log_marginal=") != std::string::npos);
  const RunFile prior = read_run_file((dir / "one" / "run_prior_p12_s3.json").string());
  const RunFile learned = read_run_file((dir / "nn" / "run_nn_p12_s3.json").string());
  REQUIRE(prior.finals.size() == learned.finals.size());
  for (std::size_t p = 0; p < prior.finals.size(); ++p) {
    CHECK(std::abs(prior.finals[p].log_weight - learned.finals[p].log_weight) <= 1e-12);
  }
  CHECK(std::abs(prior.log_marginal - learned.log_marginal) <= 1e-12);

  const Outcome missing = with({"--out", (dir / "bad").string(), "--proposal", "nn"});
  CHECK(missing.code == 2);
  CHECK(missing.err.rfind("error: usage: ", 0) == 0);
}

TEST_CASE("train reports a harvest count that an independent recount confirms") {
  const fs::path dir = scratch("train");
  const SmallScene s = small_scene(dir);
  REQUIRE(cli({"infer", "--dataset", s.dataset.string(), "--config", s.hyper.string(),
               "--particles", "30", "--seed", "1", "--out", dir.string()})
              .code == 0);
  const fs::path run_path = dir / "run_prior_p30_s1.json";
  const Outcome r = cli({"train", run_path.string(), "--epochs", "3", "--out",
                         (dir / "net").string()});
  REQUIRE(r.code == 0);

  // Recount: distinct nodes with features reached by a positive-weight particle.
  const RunFile run = read_run_file(run_path.string());
  std::map<int, double> reached;
  for (const FinalParticle &f : run.finals) {
    for (int n = f.node; n >= 0; n = run.nodes[static_cast<std::size_t>(n)].parent) {
      reached[n] += f.weight;
    }
  }
  std::size_t count = 0;
  for (const auto &[node, mass] : reached) {
    const RunNode &n = run.nodes[static_cast<std::size_t>(node)];
    count += (n.features && n.target_class >= 1 && mass > 0.0) ? 1 : 0;
  }
  REQUIRE(count > 0);
  CHECK(r.out.find("harvested " + std::to_string(count) + " examples") != std::string::npos);
  CHECK(data_lines(slurp(dir / "net" / "training_data.csv")).size() == count);
  const std::vector<std::string> loss = data_lines(slurp(dir / "net" / "loss.csv"));
  REQUIRE(loss.size() == 4);
  CHECK(loss[0] == "epoch,loss");
  CHECK(loss[3].rfind("3,", 0) == 0);
  CHECK_NOTHROW(load_net((dir / "net" / "net.txt").string()));

  const Outcome again = cli({"train", run_path.string(), "--epochs", "3", "--out",
                             (dir / "net").string(), "--force"});
  CHECK(again.code == 0);
  CHECK(again.out == r.out);
}

TEST_CASE("eval on perfect and empty fixtures") {
  const fs::path dir = scratch("eval");
  std::vector<GtTrack> gt(1);
  gt[0].id = 1;
  RunFile perfect;
  RunFile empty;
  perfect.config = {{"proposal", "prior"}, {"particles", 1}, {"seed", 1}, {"frames", 3}};
  empty.config = perfect.config;
  for (int t = 1; t <= 3; ++t) {
    const Vec2 mu(10.0 * t, 20.0);
    gt[0].frames[t] = Box{mu(0) - 4, mu(1) - 2, mu(0) + 4, mu(1) + 2};
    FramePrediction pred;
    pred.t = t;
    pred.n = 5;
    pred.K = 1;
    pred.ms = {5};
    pred.cs = {0, 0, 0, 0, 0};
    ClusterSummary c;
    c.mu = mu;
    c.sigma << 4.0, 0.0, 0.0, 1.0;
    pred.clusters = {c};
    RunNode node;
    node.parent = t - 2;
    node.step = t - 1;
    node.t = t;
    node.n = 5;
    node.prediction = pred;
    perfect.nodes.push_back(node);
    pred.ms = {0};
    pred.clusters.clear();
    node.prediction = pred;
    empty.nodes.push_back(node);
  }
  perfect.finals = {{2, -1.0, 1.0}};
  empty.finals = perfect.finals;
  write_run_file(perfect, (dir / "perfect.json").string());
  write_run_file(empty, (dir / "empty.json").string());
  write_gt(gt, (dir / "gt.csv").string());

  const Outcome p = cli({"eval", (dir / "perfect.json").string(), "--gt", (dir / "gt.csv").string()});
  REQUIRE(p.code == 0);
  const std::vector<std::string> rows = data_lines(p.out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == "proposal_kind,particles,seed,sfda,ata,mean_final_log_weight,log_marginal");
  CHECK(rows[1] == "prior,1,1,1,1,0,0");

  const Outcome e = cli({"eval", (dir / "empty.json").string(), "--gt", (dir / "gt.csv").string(),
                         "--out", (dir / "m").string()});
  REQUIRE(e.code == 0);
  CHECK(data_lines(e.out)[1] == "prior,1,1,0,0,0,0");
  CHECK(slurp(dir / "m" / "metrics.csv") == e.out);
}

TEST_CASE("sweep grid, determinism across workers, and the prior trend") {
  const fs::path dir = scratch("sweep");
  const SmallScene s = small_scene(dir);
  const fs::path net = write_net(dir);
  const auto sweep = [&](const std::string &out, const std::string &threads) {
    return cli({"sweep", "--dataset", s.dataset.string(), "--gt", s.gt.string(), "--config",
                s.hyper.string(), "--proposal", "prior,nn", "--particles", "10,100", "--seeds",
                "5", "--net", net.string(), "--threads", threads, "--out", (dir / out).string()});
  };
  const Outcome one = sweep("one", "1");
  REQUIRE(one.code == 0);
  const Outcome three = sweep("three", "3");
  REQUIRE(three.code == 0);
  const std::string cells = slurp(dir / "one" / "sweep.csv");
  CHECK(cells == slurp(dir / "three" / "sweep.csv"));
  CHECK(slurp(dir / "one" / "summary.csv") == slurp(dir / "three" / "summary.csv"));
  const std::vector<std::string> rows = data_lines(cells);
  REQUIRE(rows.size() == 21);
  CHECK(rows[0] == std::string(kMetricsColumns) + ",status");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].substr(rows[i].rfind(',') + 1) == "ok");
  }

  // Median log-weight grows with the particle count under the prior.
  const std::vector<std::string> summary = data_lines(slurp(dir / "one" / "summary.csv"));
  REQUIRE(summary.size() == 5);
  std::map<std::string, double> median_lw;
  for (std::size_t i = 1; i < summary.size(); ++i) {
    std::vector<std::string> f;
    std::istringstream ls(summary[i]);
    for (std::string tok; std::getline(ls, tok, ',');) {
      f.push_back(tok);
    }
    median_lw[f[0] + "@" + f[1]] = std::stod(f[5]);
  }
  CHECK(median_lw.at("prior@100") > median_lw.at("prior@10"));
}

TEST_CASE("errors are one line with a kind and a nonzero exit") {
  const fs::path dir = scratch("errors");
  const Outcome unknown = cli({"frobnicate"});
  CHECK(unknown.code == 2);
  CHECK(unknown.err.rfind("error: usage: ", 0) == 0);

  const Outcome missing = cli({"infer", "--dataset", (dir / "nope.csv").string(), "--out",
                               dir.string()});
  CHECK(missing.code == 1);
  CHECK(missing.err.rfind("error: io: ", 0) == 0);

  {
    std::ofstream bad(dir / "bad.csv");
    bad << "t,n,x,y,c1,c2,c3,c4,c5,c6,c7,c8,c9,c10\n1,1,2,3,48,0,0,0,0,0,0,0,0,0\n";
  }
  const Outcome parse = cli({"infer", "--dataset", (dir / "bad.csv").string(), "--out",
                             dir.string()});
  CHECK(parse.code == 1);
  CHECK(parse.err.rfind("error: parse: ", 0) == 0);
  CHECK(parse.err.find("line 2") != std::string::npos);

  const Outcome kind = cli({"infer", "--dataset", (dir / "bad.csv").string(), "--proposal",
                            "learned", "--out", dir.string()});
  CHECK(kind.code == 1);
  CHECK(kind.err.rfind("error: invalid-argument: ", 0) == 0);

  const Outcome empty_train = cli({"train", "--out", dir.string()});
  CHECK(empty_train.code == 2);
  for (const Outcome *o : {&unknown, &missing, &parse, &kind, &empty_train}) {
    CHECK(std::count(o->err.begin(), o->err.end(), '\n') == 1);
  }
}
