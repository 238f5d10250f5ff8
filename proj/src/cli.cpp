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

#include "ddsmc/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "ddsmc/config.hpp"
#include "ddsmc/errors.hpp"
#include "ddsmc/harvest.hpp"
#include "ddsmc/parallel.hpp"
#include "ddsmc/scene.hpp"

namespace ddsmc {

namespace fs = std::filesystem;

double median(std::vector<double> v) {
  if (v.empty()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

double sample_sd(const std::vector<double> &v) {
  if (v.size() < 2) {
    return 0.0;
  }
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) {
    ss += (x - mean) * (x - mean);
  }
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::vector<SweepCell> run_sweep(const Dataset &data, const std::vector<GtTrack> &gt,
                                 const SweepConfig &config) {
  if (config.kinds.empty() || config.particles.empty() || config.seeds.empty()) {
    throw InvalidArgument("sweep: the grid is empty");
  }
  std::vector<SweepCell> cells;
  for (ProposalKind kind : config.kinds) {
    for (std::size_t p : config.particles) {
      for (std::uint64_t seed : config.seeds) {
        SweepCell cell;
        cell.kind = kind;
        cell.particles = p;
        cell.seed = seed;
        cells.push_back(cell);
      }
    }
  }
  // Largest cells first so workers pulling from the queue stay balanced.
  std::vector<std::size_t> order(cells.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return cells[a].particles > cells[b].particles;
  });

  const auto run_cell = [&](SweepCell &cell) {
    cell.report.proposal_kind = to_string(cell.kind);
    cell.report.particles = cell.particles;
    cell.report.seed = cell.seed;
    try {
      InferenceOptions options;
      options.hyper = config.hyper;
      options.proposal = config.proposal;
      options.proposal.kind = cell.kind;
      options.smc = config.smc;
      options.smc.particles = cell.particles;
      options.smc.seed = cell.seed;
      options.smc.threads = 1;
      ThreadPool serial(1);
      const DdpmoRun run = run_inference(data, options, &serial);
      nlohmann::json echo = {{"proposal", to_string(cell.kind)},
                             {"particles", cell.particles},
                             {"seed", cell.seed},
                             {"frames", data.frames()}};
      const RunFile file = to_run_file(run, echo);
      cell.report = evaluate_run(file, gt, config.eval);
    } catch (const std::exception &e) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      cell.report.sfda = cell.report.ata = nan;
      cell.report.mean_final_log_weight = cell.report.log_marginal = nan;
      std::string msg = e.what();
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      cell.status = "error: " + msg;
    }
  };

  ThreadPool pool(std::max(1u, config.workers));
  std::atomic<std::size_t> next{0};
  pool.parallel_for(pool.size(), [&](std::size_t) {
    for (std::size_t i = next++; i < order.size(); i = next++) {
      run_cell(cells[order[i]]);
    }
  });
  return cells;
}

std::vector<SweepSummary> summarize_sweep(const std::vector<SweepCell> &cells) {
  std::vector<SweepSummary> out;
  std::vector<std::pair<ProposalKind, std::size_t>> keys;
  for (const SweepCell &c : cells) {
    if (std::find(keys.begin(), keys.end(), std::pair{c.kind, c.particles}) == keys.end()) {
      keys.emplace_back(c.kind, c.particles);
    }
  }
  for (const auto &[kind, particles] : keys) {
    std::vector<double> sfda, ata, mflw, lm;
    for (const SweepCell &c : cells) {
      if (c.kind == kind && c.particles == particles && c.status == "ok") {
        sfda.push_back(c.report.sfda);
        ata.push_back(c.report.ata);
        mflw.push_back(c.report.mean_final_log_weight);
        lm.push_back(c.report.log_marginal);
      }
    }
    SweepSummary s;
    s.kind = kind;
    s.particles = particles;
    s.ok = sfda.size();
    s.median_sfda = median(sfda);
    s.median_ata = median(ata);
    s.median_mean_final_log_weight = median(mflw);
    s.sd_mean_final_log_weight = sample_sd(mflw);
    s.median_log_marginal = median(lm);
    out.push_back(s);
  }
  return out;
}

namespace {

struct CliError : std::runtime_error {
  CliError(std::string kind, const std::string &what)
      : std::runtime_error(what), kind(std::move(kind)) {}
  std::string kind;
};

/// String-valued flags copied into the config only when given, so flags
/// override the file and the file overrides defaults.
class FlagSet {
public:
  explicit FlagSet(CLI::App *app) : app_(app) {}

  void add(const std::string &name, const std::string &key, const std::string &help) {
    auto slot = std::make_unique<std::string>();
    CLI::Option *opt = app_->add_option(name, *slot, help);
    flags_.push_back({opt, key, std::move(slot)});
  }

  void apply(KeyValueConfig &config) const {
    for (const Flag &f : flags_) {
      if (f.option->count() > 0) {
        config.set(f.key, *f.value);
      }
    }
  }

private:
  struct Flag {
    CLI::Option *option;
    std::string key;
    std::unique_ptr<std::string> value;
  };
  CLI::App *app_;
  std::vector<Flag> flags_;
};

KeyValueConfig merged_config(const std::string &config_path, const FlagSet &flags) {
  KeyValueConfig config = config_path.empty() ? KeyValueConfig{} : KeyValueConfig::load(config_path);
  flags.apply(config);
  return config;
}

std::string require(const KeyValueConfig &c, const std::string &key, const std::string &flag) {
  const auto v = c.get(key);
  if (!v || v->empty()) {
    throw UsageError("missing required " + flag);
  }
  return *v;
}

void check_writable(const fs::path &path, bool force) {
  if (fs::exists(path) && !force) {
    throw CliError("exists", path.string() + " already exists (pass --force to overwrite)");
  }
}

fs::path prepare_out_dir(const KeyValueConfig &c) {
  fs::path dir = c.get_string("out", ".");
  fs::create_directories(dir);
  return dir;
}

Vec5 parse_handtuned(const std::string &s) {
  const std::vector<double> v = parse_double_list(s, "--handtuned-p");
  if (v.size() != kProposalOutputs) {
    throw InvalidArgument("--handtuned-p: expected 5 values");
  }
  Vec5 p;
  for (int i = 0; i < kProposalOutputs; ++i) {
    p(i) = v[static_cast<std::size_t>(i)];
  }
  return handtuned_distribution(p);
}

std::string join_vec5(const Vec5 &p) {
  std::string s;
  for (int i = 0; i < kProposalOutputs; ++i) {
    s += (i > 0 ? "," : "") + format_double(p(i));
  }
  return s;
}

std::size_t to_count(long long v, const std::string &what) {
  if (v < 0) {
    throw InvalidArgument(what + " must be nonnegative");
  }
  return static_cast<std::size_t>(v);
}

std::uint64_t to_seed(const KeyValueConfig &c, std::uint64_t fallback) {
  return static_cast<std::uint64_t>(to_count(c.get_int("seed", static_cast<long long>(fallback)), "--seed"));
}

unsigned thread_count(const KeyValueConfig &c) {
  const long long t = c.get_int("threads", default_thread_count());
  if (t < 1) {
    throw InvalidArgument("--threads must be at least 1");
  }
  return std::min(static_cast<unsigned>(t), env_thread_cap().value_or(static_cast<unsigned>(t)));
}

ProposalSpec proposal_from(const KeyValueConfig &c, ProposalKind kind, bool need_net) {
  ProposalSpec spec;
  spec.kind = kind;
  spec.p_star = c.get_double("p_star", spec.p_star);
  if (const auto p = c.get("handtuned_p")) {
    spec.handtuned_p = parse_handtuned(*p);
  }
  if (const auto net = c.get("net"); net && !net->empty()) {
    spec.net = std::make_shared<const ProposalNet>(load_net(*net));
  } else if (need_net) {
    throw UsageError("--proposal nn requires --net FILE");
  }
  spec.validate();
  return spec;
}

SmcConfig smc_from(const KeyValueConfig &c) {
  SmcConfig smc;
  smc.resampler = parse_resampler(c.get_string("resampler", to_string(smc.resampler)));
  const std::string policy = c.get_string("policy", to_string(smc.policy));
  if (policy == to_string(ResamplePolicy::every_step)) {
    smc.policy = ResamplePolicy::every_step;
  } else if (policy == to_string(ResamplePolicy::ess_threshold)) {
    smc.policy = ResamplePolicy::ess_threshold;
  } else {
    throw InvalidArgument("unknown resampling policy '" + policy + "'");
  }
  smc.ess_threshold = c.get_double("ess_threshold", smc.ess_threshold);
  return smc;
}

Dataset dataset_from(const KeyValueConfig &c, const Hyper &hyper) {
  const std::string path = require(c, "dataset", "--dataset FILE");
  return make_dataset(load_dataset(path, hyper.trials), hyper.trials);
}

nlohmann::json config_json(const KeyValueConfig &c) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto &[k, v] : c.values()) {
    if (k != "threads" && k != "out") {
      j[k] = v;
    }
  }
  return j;
}

void echo_lines(std::ostream &out, const KeyValueConfig &c) {
  for (const auto &[k, v] : c.values()) {
    if (k != "threads" && k != "out") {
      out << "# " << k << "=" << v << '\n';
    }
  }
}

int cmd_gen(const KeyValueConfig &c, bool force, std::ostream &out) {
  const std::string name = c.get_string("scene", "train");
  const SceneConfig scene_config = default_scene(name);
  const std::uint64_t seed = to_seed(c, 1);
  const fs::path dir = prepare_out_dir(c);
  const fs::path data_path = dir / (name + "_dataset.csv");
  const fs::path gt_path = dir / (name + "_gt.csv");
  const fs::path hyper_path = dir / (name + "_hyper.cfg");
  for (const fs::path &p : {data_path, gt_path, hyper_path}) {
    check_writable(p, force);
  }
  const Scene scene = generate(scene_config, seed);
  const std::string echo = "scene=" + name + "\nseed=" + std::to_string(seed) +
                           "\nframes=" + std::to_string(scene_config.frames) +
                           "\nobjects=" + std::to_string(scene_config.objects.size());
  write_dataset(scene.records, data_path.string(), echo);
  write_gt(scene.gt, gt_path.string(), echo);
  {
    std::ofstream h(hyper_path, std::ios::binary);
    h << "# ddsmc hyperparameters v1\n# scene=" << name << "\n" << format_hyper(scene_hyper(scene_config));
  }
  for (const std::string &w : scene.warnings) {
    out << "warning: " << w << '\n';
  }
  out << "wrote " << scene.records.size() << " pixels over " << scene_config.frames << " frames to "
      << data_path.string() << "\n";
  out << "wrote " << scene.gt.size() << " ground truth tracks to " << gt_path.string() << "\n";
  out << "wrote hyperparameters to " << hyper_path.string() << "\n";
  return 0;
}

int cmd_infer(KeyValueConfig c, bool force, bool paper_scale, std::ostream &out) {
  const Hyper hyper = apply_hyper_overrides(Hyper{}, c);
  const ProposalKind kind = parse_proposal_kind(c.get_string("proposal", "prior"));
  if (!c.has("particles")) {
    c.set("particles", paper_scale ? "5000" : "500");
  }
  InferenceOptions options;
  options.hyper = hyper;
  options.proposal = proposal_from(c, kind, kind == ProposalKind::nn);
  options.smc = smc_from(c);
  options.smc.particles = to_count(c.get_int("particles", 500), "--particles");
  options.smc.seed = to_seed(c, 1);
  options.smc.threads = thread_count(c);
  options.record_features = c.get_bool("record_features", true);
  const Dataset data = dataset_from(c, hyper);

  const fs::path dir = prepare_out_dir(c);
  const fs::path path = dir / ("run_" + std::string(to_string(kind)) + "_p" +
                               std::to_string(options.smc.particles) + "_s" +
                               std::to_string(options.smc.seed) + ".json");
  check_writable(path, force);

  const DdpmoRun run = run_inference(data, options);
  nlohmann::json echo = config_json(c);
  echo["command"] = "infer";
  echo["proposal"] = to_string(kind);
  echo["particles"] = options.smc.particles;
  echo["seed"] = options.smc.seed;
  echo["frames"] = data.frames();
  echo["hyper"] = hyper_to_json(hyper);
  echo["resampler"] = to_string(options.smc.resampler);
  echo["policy"] = to_string(options.smc.policy);
  echo["p_star"] = options.proposal.p_star;
  echo["handtuned_p"] = join_vec5(options.proposal.handtuned_p);
  write_run_file(to_run_file(run, echo), path.string());
  out << "log_marginal=" << format_double(run.log_marginal)
      << " mean_final_log_weight=" << format_double(run.mean_final_log_weight) << "\n";
  out << "wrote " << path.string() << "\n";
  return 0;
}

int cmd_train(const KeyValueConfig &c, const std::vector<std::string> &runs, bool force,
              std::ostream &out) {
  if (runs.empty()) {
    throw UsageError("train needs at least one run file");
  }
  std::vector<TrainingExample> examples;
  for (const std::string &r : runs) {
    const std::vector<TrainingExample> part = harvest_training_data(read_run_file(r));
    examples.insert(examples.end(), part.begin(), part.end());
  }
  if (examples.empty()) {
    throw CliError("empty-harvest",
                   "no training examples: no checkpoint had three active clusters");
  }
  out << "harvested " << examples.size() << " examples from " << runs.size() << " run file"
      << (runs.size() == 1 ? "" : "s") << "\n";

  TrainConfig tc;
  tc.epochs = static_cast<int>(c.get_int("epochs", tc.epochs));
  tc.learning_rate = c.get_double("lr", tc.learning_rate);
  tc.batch_size = to_count(c.get_int("batch", static_cast<long long>(tc.batch_size)), "--batch");
  tc.seed = to_seed(c, 1);
  const int hidden = static_cast<int>(c.get_int("hidden", ProposalNet::kDefaultHidden));

  const fs::path dir = prepare_out_dir(c);
  const fs::path net_path = dir / "net.txt";
  const fs::path loss_path = dir / "loss.csv";
  const fs::path hand_path = dir / "handtuned.cfg";
  const fs::path data_path = dir / "training_data.csv";
  for (const fs::path &p : {net_path, loss_path, hand_path, data_path}) {
    check_writable(p, force);
  }

  ProposalNet net = ProposalNet::initialized(tc.seed, hidden);
  if (c.get_bool("normalize_distances", false)) {
    double total = 0.0;
    double weight = 0.0;
    for (const TrainingExample &e : examples) {
      for (int slot : kDistanceSlots) {
        total += e.weight * e.features(slot);
        weight += e.weight;
      }
    }
    net.distance_scale = total > 0.0 ? total / weight : 1.0;
  }
  const TrainResult result = nn_train(std::move(net), examples, tc);
  save_net(result.net, net_path.string());
  {
    std::ofstream loss(loss_path, std::ios::binary);
    loss << "# ddsmc loss v1\n";
    echo_lines(loss, c);
    loss << "epoch,loss\n";
    for (std::size_t i = 0; i < result.loss_history.size(); ++i) {
      loss << i + 1 << ',' << format_double(result.loss_history[i]) << '\n';
    }
  }
  {
    std::ofstream hand(hand_path, std::ios::binary);
    hand << "# ddsmc hand-tuned proposal v1\n# weighted class frequencies of the harvest\n"
         << "handtuned_p = " << join_vec5(class_frequencies(examples)) << "\n";
  }
  write_training_data(examples, data_path.string());
  out << "final loss " << format_double(result.loss_history.empty() ? 0.0 : result.loss_history.back())
      << "\n";
  out << "wrote " << net_path.string() << ", " << loss_path.string() << ", " << hand_path.string()
      << "\n";
  return 0;
}

int cmd_eval(const KeyValueConfig &c, const std::string &run_path, bool force, std::ostream &out) {
  if (run_path.empty()) {
    throw UsageError("eval needs a run file");
  }
  EvalOptions options;
  options.min_size = static_cast<int>(c.get_int("min_size", options.min_size));
  options.mode = parse_scoring_mode(c.get_string("scoring", to_string(options.mode)));
  const std::vector<GtTrack> gt = load_gt(require(c, "gt", "--gt FILE"));
  const MetricsReport report = evaluate_run(read_run_file(run_path), gt, options);
  std::ostringstream csv;
  csv << "# ddsmc metrics v1\n# run=" << run_path << '\n';
  echo_lines(csv, c);
  csv << kMetricsColumns << '\n' << metrics_csv_row(report) << '\n';
  out << csv.str();
  if (c.has("out")) {
    const fs::path path = prepare_out_dir(c) / "metrics.csv";
    check_writable(path, force);
    std::ofstream(path, std::ios::binary) << csv.str();
  }
  return 0;
}

int cmd_sweep(KeyValueConfig c, bool force, std::ostream &out) {
  SweepConfig sweep;
  sweep.hyper = apply_hyper_overrides(Hyper{}, c);
  sweep.kinds.clear();
  {
    std::istringstream in(c.get_string("proposal", "prior,handtuned,nn"));
    std::string item;
    while (std::getline(in, item, ',')) {
      sweep.kinds.push_back(parse_proposal_kind(item));
    }
  }
  sweep.particles.clear();
  for (double p : parse_double_list(c.get_string("particles", "10,100,1000"), "--particles")) {
    if (p < 1 || p != std::floor(p)) {
      throw InvalidArgument("--particles: counts must be positive integers");
    }
    sweep.particles.push_back(static_cast<std::size_t>(p));
  }
  const std::uint64_t first_seed = to_seed(c, 1);
  const std::size_t n_seeds = to_count(c.get_int("seeds", 20), "--seeds");
  for (std::size_t i = 0; i < n_seeds; ++i) {
    sweep.seeds.push_back(first_seed + i);
  }
  const bool need_net =
      std::find(sweep.kinds.begin(), sweep.kinds.end(), ProposalKind::nn) != sweep.kinds.end();
  sweep.proposal = proposal_from(c, ProposalKind::prior, need_net);
  sweep.smc = smc_from(c);
  sweep.eval.min_size = static_cast<int>(c.get_int("min_size", sweep.eval.min_size));
  sweep.eval.mode = parse_scoring_mode(c.get_string("scoring", to_string(sweep.eval.mode)));
  sweep.workers = thread_count(c);
  const Dataset data = dataset_from(c, sweep.hyper);
  const std::vector<GtTrack> gt = load_gt(require(c, "gt", "--gt FILE"));

  const fs::path dir = prepare_out_dir(c);
  const fs::path cells_path = dir / "sweep.csv";
  const fs::path summary_path = dir / "summary.csv";
  check_writable(cells_path, force);
  check_writable(summary_path, force);

  const std::vector<SweepCell> cells = run_sweep(data, gt, sweep);
  std::size_t failed = 0;
  {
    std::ofstream f(cells_path, std::ios::binary);
    f << "# ddsmc sweep v1\n";
    echo_lines(f, c);
    f << kMetricsColumns << ",status\n";
    for (const SweepCell &cell : cells) {
      f << metrics_csv_row(cell.report) << ',' << cell.status << '\n';
      failed += cell.status != "ok";
    }
  }
  const std::vector<SweepSummary> summary = summarize_sweep(cells);
  {
    std::ofstream f(summary_path, std::ios::binary);
    f << "# ddsmc sweep summary v1\n";
    echo_lines(f, c);
    f << "proposal_kind,particles,ok,median_sfda,median_ata,median_mean_final_log_weight,"
         "sd_mean_final_log_weight,median_log_marginal\n";
    for (const SweepSummary &s : summary) {
      f << to_string(s.kind) << ',' << s.particles << ',' << s.ok << ','
        << format_double(s.median_sfda) << ',' << format_double(s.median_ata) << ','
        << format_double(s.median_mean_final_log_weight) << ','
        << format_double(s.sd_mean_final_log_weight) << ','
        << format_double(s.median_log_marginal) << '\n';
    }
  }
  out << std::left << std::setw(10) << "proposal" << std::setw(10) << "particles" << std::setw(12)
      << "sfda" << std::setw(12) << "ata" << "mean_final_log_weight\n";
  for (const SweepSummary &s : summary) {
    out << std::setw(10) << to_string(s.kind) << std::setw(10) << s.particles << std::setw(12)
        << std::setprecision(4) << s.median_sfda << std::setw(12) << s.median_ata
        << std::setprecision(8) << s.median_mean_final_log_weight << "\n";
  }
  out << "wrote " << cells.size() << " cells (" << failed << " failed) to " << cells_path.string()
      << " and " << summary_path.string() << "\n";
  return 0;
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

} // namespace

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"ddsmc: sequential Monte Carlo pixel clustering with learned proposals"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ddsmc 1.0");

  std::string config_path;
  bool force = false;
  bool paper_scale = false;
  std::string run_path;
  std::vector<std::string> run_files;

  const auto common = [&](CLI::App *sub, FlagSet &flags) {
    sub->add_option("--config", config_path, "key = value config file; flags take precedence");
    sub->add_flag("--force", force, "overwrite existing outputs");
    flags.add("--out", "out", "output directory (created if missing)");
    flags.add("--seed", "seed", "master seed");
  };

  CLI::App *gen = app.add_subcommand("gen", "generate a synthetic scene and its ground truth");
  FlagSet gen_flags(gen);
  common(gen, gen_flags);
  gen_flags.add("--scene", "scene", "train or test (default train)");

  CLI::App *infer = app.add_subcommand("infer", "run SMC inference on a dataset");
  FlagSet infer_flags(infer);
  common(infer, infer_flags);
  infer_flags.add("--dataset", "dataset", "pixel dataset file");
  infer_flags.add("--proposal", "proposal", "prior, handtuned or nn");
  infer_flags.add("--particles", "particles", "particle count (default 500)");
  infer_flags.add("--net", "net", "proposal network file (nn)");
  infer_flags.add("--p-star", "p_star", "probability of the data-driven component");
  infer_flags.add("--handtuned-p", "handtuned_p", "p1,p2,p3,p4,p5 for the hand-tuned proposal");
  infer_flags.add("--resampler", "resampler", "multinomial or systematic");
  infer_flags.add("--threads", "threads", "worker threads (default DDSMC_THREADS)");
  infer->add_flag("--paper-scale", paper_scale, "5000 particles unless --particles is given");

  CLI::App *train = app.add_subcommand("train", "harvest runs and train the proposal network");
  FlagSet train_flags(train);
  common(train, train_flags);
  train->add_option("runs", run_files, "run files written by infer");
  train_flags.add("--epochs", "epochs", "training epochs (default 50)");
  train_flags.add("--lr", "lr", "learning rate (default 0.01)");
  train_flags.add("--batch", "batch", "mini-batch size (default 32)");
  train_flags.add("--hidden", "hidden", "hidden units (default 100)");

  CLI::App *eval = app.add_subcommand("eval", "score a run against ground truth");
  FlagSet eval_flags(eval);
  common(eval, eval_flags);
  eval->add_option("run", run_path, "run file written by infer");
  eval_flags.add("--gt", "gt", "ground truth file");
  eval_flags.add("--min-size", "min_size", "smallest cluster reported as a detection (default 3)");
  eval_flags.add("--scoring", "scoring", "best or weighted (default best)");

  CLI::App *sweep = app.add_subcommand("sweep", "proposal x particles x seed grid");
  FlagSet sweep_flags(sweep);
  common(sweep, sweep_flags);
  sweep_flags.add("--dataset", "dataset", "pixel dataset file");
  sweep_flags.add("--gt", "gt", "ground truth file");
  sweep_flags.add("--proposal", "proposal", "comma separated kinds (default prior,handtuned,nn)");
  sweep_flags.add("--particles", "particles", "comma separated counts (default 10,100,1000)");
  sweep_flags.add("--seeds", "seeds", "replicates per cell, seeds seed..seed+N-1 (default 20)");
  sweep_flags.add("--net", "net", "proposal network file (nn)");
  sweep_flags.add("--p-star", "p_star", "probability of the data-driven component");
  sweep_flags.add("--handtuned-p", "handtuned_p", "p1,p2,p3,p4,p5 for the hand-tuned proposal");
  sweep_flags.add("--min-size", "min_size", "smallest cluster reported as a detection (default 3)");
  sweep_flags.add("--scoring", "scoring", "best or weighted (default best)");
  sweep_flags.add("--resampler", "resampler", "multinomial or systematic");
  sweep_flags.add("--threads", "threads", "concurrent cells (default DDSMC_THREADS)");

  std::vector<const char *> argv{"ddsmc"};
  for (const std::string &a : args) {
    argv.push_back(a.c_str());
  }
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion &e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError &e) {
    err << "error: usage: " << one_line(e.what()) << '\n';
    return 2;
  }

  try {
    if (gen->parsed()) {
      return cmd_gen(merged_config(config_path, gen_flags), force, out);
    }
    if (infer->parsed()) {
      return cmd_infer(merged_config(config_path, infer_flags), force, paper_scale, out);
    }
    if (train->parsed()) {
      return cmd_train(merged_config(config_path, train_flags), run_files, force, out);
    }
    if (eval->parsed()) {
      return cmd_eval(merged_config(config_path, eval_flags), run_path, force, out);
    }
    return cmd_sweep(merged_config(config_path, sweep_flags), force, out);
  } catch (const UsageError &e) {
    err << "error: usage: " << one_line(e.what()) << '\n';
    return 2;
  } catch (const CliError &e) {
    err << "error: " << e.kind << ": " << one_line(e.what()) << '\n';
  } catch (const VersionMismatch &e) {
    err << "error: version-mismatch: " << one_line(e.what()) << '\n';
  } catch (const DimensionMismatch &e) {
    err << "error: dimension-mismatch: " << one_line(e.what()) << '\n';
  } catch (const ParseError &e) {
    err << "error: parse: " << one_line(e.what()) << '\n';
  } catch (const InvalidArgument &e) {
    err << "error: invalid-argument: " << one_line(e.what()) << '\n';
  } catch (const InvalidProposal &e) {
    err << "error: invalid-proposal: " << one_line(e.what()) << '\n';
  } catch (const StateError &e) {
    err << "error: state: " << one_line(e.what()) << '\n';
  } catch (const DegeneracyError &e) {
    err << "error: degeneracy: " << one_line(e.what()) << '\n';
  } catch (const NumericalError &e) {
    err << "error: numerical: " << one_line(e.what()) << '\n';
  } catch (const TrainingDiverged &e) {
    err << "error: training-diverged: " << one_line(e.what()) << '\n';
  } catch (const IoError &e) {
    err << "error: io: " << one_line(e.what()) << '\n';
  } catch (const fs::filesystem_error &e) {
    err << "error: io: " << one_line(e.what()) << '\n';
  } catch (const std::exception &e) {
    err << "error: internal: " << one_line(e.what()) << '\n';
  }
  return 1;
}

} // namespace ddsmc
