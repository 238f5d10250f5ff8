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

#include "ddsmc/proposal.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "ddsmc/errors.hpp"
#include "ddsmc/stats.hpp"

namespace ddsmc {

std::optional<Features> extract_features(const ModelState &state, const PixelRecord &px) {
  struct Candidate {
    double distance;
    int k;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(state.urn.ms.size());
  for (int k = 0; k < state.urn.K; ++k) {
    if (state.urn.ms[k] == 0) {
      continue;
    }
    const Theta *theta = state.theta(k);
    if (theta == nullptr) {
      throw StateError("extract_features: live cluster " + std::to_string(k) + " has no theta");
    }
    candidates.push_back({(px.pos - theta->positions.posterior_mean()).norm(), k});
  }
  if (candidates.size() < kNearestClusters) {
    return std::nullopt;
  }
  const auto closer = [](const Candidate &a, const Candidate &b) {
    return a.distance < b.distance || (a.distance == b.distance && a.k < b.k);
  };
  std::partial_sort(candidates.begin(), candidates.begin() + kNearestClusters, candidates.end(),
                    closer);

  Features out;
  for (int i = 0; i < kNearestClusters; ++i) {
    const Candidate &c = candidates[i];
    const int offset = i * (kColourBins + 1);
    out.x.segment<kColourBins>(offset) = state.theta(c.k)->colours.state_info();
    out.x(offset + kColourBins) = c.distance;
    out.nearest[i] = c.k;
  }
  const double total = px.col.sum();
  out.x.segment<kColourBins>(kPixelColourOffset) = px.col.cast<double>() / total;
  return out;
}

ProposalNet ProposalNet::zeros(int hidden) {
  ProposalNet net;
  net.w1 = Eigen::MatrixXd::Zero(hidden, kFeatureSize);
  net.b1 = Eigen::VectorXd::Zero(hidden);
  net.w2 = Eigen::MatrixXd::Zero(kProposalOutputs, hidden);
  net.b2 = Eigen::VectorXd::Zero(kProposalOutputs);
  return net;
}

ProposalNet ProposalNet::initialized(std::uint64_t seed, int hidden) {
  ProposalNet net = zeros(hidden);
  Rng rng = keyed_stream(seed, StreamDomain::init, 0);
  const double r1 = 1.0 / std::sqrt(static_cast<double>(kFeatureSize));
  const double r2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (Eigen::Index j = 0; j < net.w1.cols(); ++j) {
    for (Eigen::Index i = 0; i < net.w1.rows(); ++i) {
      net.w1(i, j) = r1 * (2.0 * rng.uniform() - 1.0);
    }
  }
  for (Eigen::Index j = 0; j < net.w2.cols(); ++j) {
    for (Eigen::Index i = 0; i < net.w2.rows(); ++i) {
      net.w2(i, j) = r2 * (2.0 * rng.uniform() - 1.0);
    }
  }
  return net;
}

void ProposalNet::validate() const {
  const auto h = b1.size();
  if (h < 1 || w1.rows() != h || w1.cols() != kFeatureSize || w2.rows() != kProposalOutputs ||
      w2.cols() != h || b2.size() != kProposalOutputs) {
    throw InvalidArgument("ProposalNet: inconsistent parameter shapes");
  }
  if (!w1.allFinite() || !b1.allFinite() || !w2.allFinite() || !b2.allFinite()) {
    throw InvalidArgument("ProposalNet: non-finite parameter");
  }
  if (!(distance_scale > 0.0) || !std::isfinite(distance_scale)) {
    throw InvalidArgument("ProposalNet: distance_scale must be positive");
  }
}

bool ProposalNet::operator==(const ProposalNet &other) const {
  return w1 == other.w1 && b1 == other.b1 && w2 == other.w2 && b2 == other.b2 &&
         distance_scale == other.distance_scale;
}

namespace {

FeatureVector scaled_input(const ProposalNet &net, const FeatureVector &f) {
  FeatureVector x = f;
  if (net.distance_scale != 1.0) {
    for (int slot : kDistanceSlots) {
      x(slot) /= net.distance_scale;
    }
  }
  return x;
}

constexpr double kLogFloor = -745.0;

} // namespace

Vec5 nn_forward(const ProposalNet &net, const FeatureVector &f) {
  const Eigen::VectorXd h = (net.w1 * scaled_input(net, f) + net.b1).array().tanh().matrix();
  const Vec5 z = net.w2 * h + net.b2;
  if (!z.allFinite()) {
    throw NumericalError("nn_forward: non-finite logits");
  }
  return softmax(z);
}

LossAndGrad nn_loss_and_grad(const ProposalNet &net, std::span<const TrainingExample> batch) {
  if (batch.empty()) {
    throw InvalidArgument("nn_loss_and_grad: empty batch");
  }
  const auto B = static_cast<Eigen::Index>(batch.size());
  Eigen::MatrixXd x(kFeatureSize, B);
  Eigen::RowVectorXd weight(B);
  for (Eigen::Index i = 0; i < B; ++i) {
    const TrainingExample &ex = batch[static_cast<std::size_t>(i)];
    if (ex.target_class < 1 || ex.target_class > kProposalOutputs) {
      throw InvalidArgument("nn_loss_and_grad: target class outside 1..5");
    }
    x.col(i) = scaled_input(net, ex.features);
    weight(i) = ex.weight;
  }
  const Eigen::MatrixXd h = ((net.w1 * x).colwise() + net.b1).array().tanh().matrix();
  Eigen::MatrixXd z = (net.w2 * h).colwise() + net.b2;
  if (!z.allFinite()) {
    throw NumericalError("nn_loss_and_grad: non-finite logits");
  }

  LossAndGrad out;
  // dz holds dL/dlogits: w_i (softmax_i - onehot_i).
  Eigen::MatrixXd dz(kProposalOutputs, B);
  for (Eigen::Index i = 0; i < B; ++i) {
    const double top = z.col(i).maxCoeff();
    const Vec5 e = (z.col(i).array() - top).exp().matrix();
    const double norm = e.sum();
    const int y = batch[static_cast<std::size_t>(i)].target_class - 1;
    double log_p = (z(y, i) - top) - std::log(norm);
    if (log_p < kLogFloor) {
      log_p = kLogFloor;
      out.clamped = true;
    }
    out.loss -= weight(i) * log_p;
    dz.col(i) = e / norm;
    dz(y, i) -= 1.0;
    dz.col(i) *= weight(i);
  }
  out.grad.w2 = dz * h.transpose();
  out.grad.b2 = dz.rowwise().sum();
  const Eigen::MatrixXd da =
      ((net.w2.transpose() * dz).array() * (1.0 - h.array().square())).matrix();
  out.grad.w1 = da * x.transpose();
  out.grad.b1 = da.rowwise().sum();
  return out;
}

namespace {

double dataset_loss(const ProposalNet &net, std::span<const TrainingExample> data) {
  double total = 0.0;
  constexpr std::size_t kChunk = 4096;
  for (std::size_t start = 0; start < data.size(); start += kChunk) {
    const std::size_t len = std::min(kChunk, data.size() - start);
    total += nn_loss_and_grad(net, data.subspan(start, len)).loss;
  }
  return total;
}

} // namespace

TrainResult nn_train(ProposalNet net, std::span<const TrainingExample> data,
                     const TrainConfig &config) {
  if (data.empty()) {
    throw InvalidArgument("nn_train: empty dataset");
  }
  if (config.batch_size == 0 || config.epochs < 0 || !(config.learning_rate > 0.0)) {
    throw InvalidArgument("nn_train: invalid training configuration");
  }
  net.validate();
  const double initial = dataset_loss(net, data);

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<TrainingExample> batch;
  batch.reserve(config.batch_size);

  TrainResult result;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng rng = keyed_stream(config.seed, StreamDomain::training, static_cast<std::uint64_t>(epoch));
    for (std::size_t i = order.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
      std::swap(order[i - 1], order[std::min(j, i - 1)]);
    }
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      batch.clear();
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      for (std::size_t i = start; i < end; ++i) {
        batch.push_back(data[order[i]]);
      }
      const LossAndGrad lg = nn_loss_and_grad(net, batch);
      net.w1 -= config.learning_rate * lg.grad.w1;
      net.b1 -= config.learning_rate * lg.grad.b1;
      net.w2 -= config.learning_rate * lg.grad.w2;
      net.b2 -= config.learning_rate * lg.grad.b2;
    }
    double loss = 0.0;
    try {
      loss = dataset_loss(net, data);
    } catch (const NumericalError &) {
      loss = std::numeric_limits<double>::infinity();
    }
    if (!std::isfinite(loss) || loss > 10.0 * initial) {
      throw TrainingDiverged("nn_train: loss diverged at epoch " + std::to_string(epoch + 1) +
                             "; try a smaller learning rate");
    }
    result.loss_history.push_back(loss);
  }
  result.net = std::move(net);
  return result;
}

Eigen::VectorXd map_to_assignment_distribution(const Vec5 &p, const UrnState &urn,
                                               const std::array<int, kNearestClusters> &nearest) {
  const int active = urn.active_count();
  if (active < kNearestClusters) {
    throw InvalidArgument("map_to_assignment_distribution: fewer than three active clusters");
  }
  for (int i = 0; i < kNearestClusters; ++i) {
    const int k = nearest[i];
    if (k < 0 || k >= urn.K || urn.ms[k] == 0) {
      throw InvalidArgument("map_to_assignment_distribution: nearest cluster is not active");
    }
    for (int j = 0; j < i; ++j) {
      if (nearest[j] == k) {
        throw InvalidArgument("map_to_assignment_distribution: duplicate nearest cluster");
      }
    }
  }
  Eigen::VectorXd q = Eigen::VectorXd::Zero(urn.K + 1);
  if (active == kNearestClusters) {
    const double norm = p(0) + p(1) + p(2) + p(4);
    for (int i = 0; i < kNearestClusters; ++i) {
      q(nearest[i]) = p(i) / norm;
    }
    q(urn.K) = p(4) / norm;
    return q;
  }
  const double share = p(3) / static_cast<double>(active - kNearestClusters);
  for (int k = 0; k < urn.K; ++k) {
    if (urn.ms[k] > 0) {
      q(k) = share;
    }
  }
  for (int i = 0; i < kNearestClusters; ++i) {
    q(nearest[i]) = p(i);
  }
  q(urn.K) = p(4);
  return q;
}

Eigen::VectorXd mix_with_prior(const Eigen::VectorXd &q, const Eigen::VectorXd &prior,
                               double p_star) {
  if (q.size() != prior.size()) {
    throw InvalidArgument("mix_with_prior: size mismatch");
  }
  if (!(p_star >= 0.0 && p_star <= 1.0)) {
    throw InvalidArgument("mix_with_prior: p_star outside [0,1]");
  }
  return p_star * q + (1.0 - p_star) * prior;
}

Vec5 handtuned_distribution(const Vec5 &p) {
  if (!(p.array() >= 0.0).all() || std::abs(p.sum() - 1.0) > 1e-9) {
    throw InvalidArgument("handtuned_distribution: probabilities must lie on the 5-simplex");
  }
  return p;
}

int assignment_class(int cluster, const UrnState &urn,
                     const std::array<int, kNearestClusters> &nearest) {
  if (cluster == urn.K) {
    return 5;
  }
  for (int i = 0; i < kNearestClusters; ++i) {
    if (nearest[i] == cluster) {
      return i + 1;
    }
  }
  return 4;
}

const char *to_string(ProposalKind kind) {
  switch (kind) {
  case ProposalKind::prior:
    return "prior";
  case ProposalKind::handtuned:
    return "handtuned";
  case ProposalKind::nn:
    return "nn";
  }
  return "?";
}

ProposalKind parse_proposal_kind(const std::string &s) {
  if (s == "prior") {
    return ProposalKind::prior;
  }
  if (s == "handtuned") {
    return ProposalKind::handtuned;
  }
  if (s == "nn") {
    return ProposalKind::nn;
  }
  throw InvalidArgument("unknown proposal type '" + s + "' (expected prior, handtuned or nn)");
}

void ProposalSpec::validate() const {
  if (!(p_star >= 0.0 && p_star <= 1.0)) {
    throw InvalidArgument("ProposalSpec: p_star outside [0,1]");
  }
  if (kind == ProposalKind::handtuned) {
    handtuned_distribution(handtuned_p);
  }
  if (kind == ProposalKind::nn) {
    if (!net) {
      throw InvalidArgument("ProposalSpec: nn proposal requires a network");
    }
    net->validate();
  }
}

ProposalDraw propose_assignment(const ModelState &state, const PixelRecord &px, const Hyper &hyper,
                                const ProposalSpec &spec, bool want_features, Rng &rng) {
  ProposalDraw draw;
  const Eigen::VectorXd prior = prior_assignment_distribution(state.urn, hyper.alpha);
  if (spec.kind != ProposalKind::prior || want_features) {
    draw.features = extract_features(state, px);
  }
  Eigen::VectorXd q;
  if (spec.kind == ProposalKind::prior || !draw.features) {
    q = prior;
  } else {
    const Vec5 p5 = spec.kind == ProposalKind::nn ? nn_forward(*spec.net, draw.features->x)
                                                  : spec.handtuned_p;
    q = mix_with_prior(map_to_assignment_distribution(p5, state.urn, draw.features->nearest),
                       prior, spec.p_star);
  }
  const auto c = static_cast<int>(categorical_sample(q, rng));
  draw.choice = {c, std::log(q(c))};
  if (draw.features) {
    draw.target_class = assignment_class(c, state.urn, draw.features->nearest);
  }
  return draw;
}

// Net file format, one key per line:
//   ddsmc-proposal-net
//   version 1
//   input 43 / hidden H / output 5
//   distance_scale S
//   w1 <H*43 row-major values> / b1 / w2 / b2

namespace {

constexpr int kNetVersion = 1;
constexpr const char *kNetMagic = "ddsmc-proposal-net";

void append_double(std::string &out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

void append_row_major(std::string &out, const char *name, const Eigen::MatrixXd &m) {
  out += name;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out += ' ';
      append_double(out, m(i, j));
    }
  }
  out += '\n';
}

struct NetReader {
  std::istringstream in;
  std::size_t line_no = 0;

  std::vector<std::string> next_line(const std::string &key) {
    std::string line;
    if (!std::getline(in, line)) {
      throw ParseError(line_no + 1, "net file truncated: expected '" + key + "'");
    }
    ++line_no;
    std::vector<std::string> tokens;
    std::istringstream ls(line);
    for (std::string tok; ls >> tok;) {
      tokens.push_back(tok);
    }
    if (tokens.empty() || tokens[0] != key) {
      throw ParseError(line_no, "line " + std::to_string(line_no) + ": expected '" + key + "'");
    }
    return tokens;
  }

  double number(const std::string &tok) const {
    double v = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
      throw ParseError(line_no, "line " + std::to_string(line_no) + ": bad number '" + tok + "'");
    }
    return v;
  }

  long integer(const std::string &key) {
    const auto tokens = next_line(key);
    if (tokens.size() != 2) {
      throw ParseError(line_no, "line " + std::to_string(line_no) + ": expected one value");
    }
    const double v = number(tokens[1]);
    if (v != std::floor(v)) {
      throw ParseError(line_no, "line " + std::to_string(line_no) + ": expected an integer");
    }
    return static_cast<long>(v);
  }

  Eigen::MatrixXd matrix(const std::string &key, Eigen::Index rows, Eigen::Index cols) {
    const auto tokens = next_line(key);
    if (static_cast<Eigen::Index>(tokens.size()) - 1 != rows * cols) {
      throw DimensionMismatch(line_no, "line " + std::to_string(line_no) + ": '" + key +
                                           "' has " + std::to_string(tokens.size() - 1) +
                                           " values, expected " + std::to_string(rows * cols));
    }
    Eigen::MatrixXd m(rows, cols);
    std::size_t t = 1;
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) {
        m(i, j) = number(tokens[t++]);
      }
    }
    return m;
  }
};

} // namespace

std::string format_net(const ProposalNet &net) {
  net.validate();
  std::string out = kNetMagic;
  out += "\nversion " + std::to_string(kNetVersion) + "\n";
  out += "input " + std::to_string(kFeatureSize) + "\n";
  out += "hidden " + std::to_string(net.hidden()) + "\n";
  out += "output " + std::to_string(kProposalOutputs) + "\n";
  out += "distance_scale ";
  append_double(out, net.distance_scale);
  out += '\n';
  append_row_major(out, "w1", net.w1);
  append_row_major(out, "b1", net.b1);
  append_row_major(out, "w2", net.w2);
  append_row_major(out, "b2", net.b2);
  return out;
}

ProposalNet parse_net(const std::string &text) {
  NetReader r{std::istringstream(text)};
  r.next_line(kNetMagic);
  const long version = r.integer("version");
  if (version != kNetVersion) {
    throw VersionMismatch(r.line_no, "net file version " + std::to_string(version) +
                                         " is not supported (expected " +
                                         std::to_string(kNetVersion) + ")");
  }
  if (r.integer("input") != kFeatureSize) {
    throw DimensionMismatch(r.line_no, "net file input size must be " +
                                           std::to_string(kFeatureSize));
  }
  const long hidden = r.integer("hidden");
  if (hidden < 1) {
    throw DimensionMismatch(r.line_no, "net file hidden size must be positive");
  }
  if (r.integer("output") != kProposalOutputs) {
    throw DimensionMismatch(r.line_no, "net file output size must be " +
                                           std::to_string(kProposalOutputs));
  }
  ProposalNet net;
  {
    const auto tokens = r.next_line("distance_scale");
    if (tokens.size() != 2) {
      throw ParseError(r.line_no, "line " + std::to_string(r.line_no) + ": expected one value");
    }
    net.distance_scale = r.number(tokens[1]);
  }
  net.w1 = r.matrix("w1", hidden, kFeatureSize);
  net.b1 = r.matrix("b1", hidden, 1);
  net.w2 = r.matrix("w2", kProposalOutputs, hidden);
  net.b2 = r.matrix("b2", kProposalOutputs, 1);
  try {
    net.validate();
  } catch (const InvalidArgument &e) {
    throw ParseError(r.line_no, e.what());
  }
  return net;
}

void save_net(const ProposalNet &net, const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("save_net: cannot open " + path);
  }
  out << format_net(net);
  if (!out) {
    throw InvalidArgument("save_net: write failed for " + path);
  }
}

ProposalNet load_net(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("load_net: cannot open " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_net(buf.str());
}

} // namespace ddsmc
