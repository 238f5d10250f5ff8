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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <vector>

#include "ddsmc/ddpmo_smc.hpp"
#include "ddsmc/errors.hpp"
#include "ddsmc/harvest.hpp"
#include "ddsmc/proposal.hpp"
#include "ddsmc/scene.hpp"
#include "oracles.hpp"

using namespace ddsmc;

namespace {

// State with one live cluster per location; cluster k's mean sits at locs[k].
ModelState clusters_at(const std::vector<Vec2> &locs, const std::vector<int> &sizes) {
  ModelState s;
  s.urn.K = static_cast<int>(locs.size());
  s.urn.ms = sizes;
  for (std::size_t k = 0; k < locs.size(); ++k) {
    if (sizes[k] == 0) {
      s.thetas.push_back(nullptr);
      continue;
    }
    Hyper h;
    h.niw.mu0 = locs[k];
    Theta theta = base_g0(h);
    ColourCounts c = ColourCounts::Zero();
    c(static_cast<int>(k) % kColourBins) = 49;
    theta.colours.incorporate(c);
    s.thetas.push_back(std::make_shared<const Theta>(std::move(theta)));
  }
  s.frame = 1;
  s.frame_pixels = 1;
  return s;
}

PixelRecord pixel_at(Vec2 pos) {
  PixelRecord px;
  px.pos = pos;
  px.col(0) = 40;
  px.col(3) = 9;
  return px;
}

TrainingExample example(const FeatureVector &f, int cls, double w) {
  TrainingExample ex;
  ex.features = f;
  ex.target_class = cls;
  ex.weight = w;
  return ex;
}

std::string temp_path(const std::string &name) {
  return (std::filesystem::temp_directory_path() / ("ddsmc_test_proposal_" + name)).string();
}

} // namespace

TEST_SUITE("features") {
  TEST_CASE("fewer than three active clusters give no features") {
    const ModelState s = clusters_at({Vec2(0, 0), Vec2(5, 0), Vec2(9, 9)}, {2, 0, 1});
    CHECK_FALSE(extract_features(s, pixel_at(Vec2(1, 1))).has_value());
  }

  TEST_CASE("nearest clusters are sorted by distance with their colour summaries") {
    const ModelState s =
        clusters_at({Vec2(5, 0), Vec2(2, 0), Vec2(0, 0), Vec2(9, 0)}, {1, 3, 0, 2});
    const auto f = extract_features(s, pixel_at(Vec2(0, 0)));
    REQUIRE(f.has_value());
    CHECK(f->nearest == std::array<int, 3>{1, 0, 3});
    CHECK(f->x(kDistanceSlots[0]) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(f->x(kDistanceSlots[1]) == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(f->x(kDistanceSlots[2]) == doctest::Approx(9.0).epsilon(1e-14));
    for (int i = 0; i < 3; ++i) {
      const ColourVec ps = s.theta(f->nearest[i])->colours.state_info();
      CHECK(f->x.segment<kColourBins>(i * (kColourBins + 1)) == ps);
    }
    ColourVec c = ColourVec::Zero();
    c(0) = 40.0 / 49.0;
    c(3) = 9.0 / 49.0;
    CHECK((f->x.segment<kColourBins>(kPixelColourOffset) - c).cwiseAbs().maxCoeff() < 1e-15);
  }

  TEST_CASE("a pixel on a cluster mean has distance zero") {
    const ModelState s = clusters_at({Vec2(3, 4), Vec2(10, 0), Vec2(0, 10)}, {1, 1, 1});
    const auto f = extract_features(s, pixel_at(Vec2(3, 4)));
    REQUIRE(f.has_value());
    CHECK(f->x(kDistanceSlots[0]) < 1e-12);
    CHECK(f->nearest[0] == 0);
    CHECK(f->x.allFinite());
  }
}

TEST_SUITE("network") {
  TEST_CASE("zero network is uniform") {
    const ProposalNet net = ProposalNet::zeros();
    const Vec5 p = nn_forward(net, FeatureVector::Constant(0.7));
    CHECK(p == Vec5::Constant(0.2));
  }

  TEST_CASE("outputs lie on the simplex and are deterministic") {
    const ProposalNet net = ProposalNet::initialized(3);
    Rng rng = keyed_stream(1, StreamDomain::test, 0);
    for (int r = 0; r < 1000; ++r) {
      FeatureVector f;
      for (int i = 0; i < kFeatureSize; ++i) {
        f(i) = 20.0 * rng.uniform() - 10.0;
      }
      const Vec5 p = nn_forward(net, f);
      CHECK(std::abs(p.sum() - 1.0) < 1e-12);
      CHECK((p.array() >= 0.0).all());
      CHECK(nn_forward(net, f) == p);
    }
  }

  TEST_CASE("loss of one example under the uniform network") {
    const ProposalNet net = ProposalNet::zeros();
    const std::vector<TrainingExample> batch{example(FeatureVector::Ones(), 4, 0.7)};
    CHECK(nn_loss_and_grad(net, batch).loss == doctest::Approx(0.7 * std::log(5.0)).epsilon(1e-14));
  }

  TEST_CASE("gradients match central differences coordinate by coordinate") {
    for (std::uint64_t seed : {1u, 2u}) {
      Rng rng = keyed_stream(seed, StreamDomain::test, 1);
      const std::vector<TrainingExample> batch = oracle::random_batch(10, rng);
      ProposalNet net = ProposalNet::initialized(seed);
      for (int i = 0; i < kProposalOutputs; ++i) {
        net.b2(i) = 0.3 * i;
        net.b1(i) = -0.1 * i;
      }
      net.distance_scale = 2.5;
      CHECK(static_cast<double>(oracle::extended_loss(net, batch)) ==
            doctest::Approx(nn_loss_and_grad(net, batch).loss).epsilon(1e-13));
      const oracle::GradientCheck g = oracle::finite_difference_check(net, batch, 1e-5);
      INFO("w1 ", g.w1, " b1 ", g.b1, " w2 ", g.w2, " b2 ", g.b2);
      CHECK(g.worst() < 1e-4);
    }
  }

  TEST_CASE("duplicated examples add their weights") {
    const ProposalNet net = ProposalNet::initialized(4);
    Rng rng = keyed_stream(2, StreamDomain::test, 0);
    const TrainingExample ex = oracle::random_batch(1, rng)[0];
    TrainingExample a = ex;
    TrainingExample b = ex;
    TrainingExample ab = ex;
    a.weight = 0.3;
    b.weight = 1.1;
    ab.weight = 1.4;
    const std::vector<TrainingExample> two{a, b};
    const std::vector<TrainingExample> one{ab};
    const LossAndGrad l2 = nn_loss_and_grad(net, two);
    const LossAndGrad l1 = nn_loss_and_grad(net, one);
    CHECK(l2.loss == doctest::Approx(l1.loss).epsilon(1e-13));
    CHECK((l2.grad.w1 - l1.grad.w1).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((l2.grad.w2 - l1.grad.w2).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((l2.grad.b1 - l1.grad.b1).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((l2.grad.b2 - l1.grad.b2).cwiseAbs().maxCoeff() < 1e-13);
  }

  TEST_CASE("saturated logits clamp the log probability and flag it") {
    ProposalNet net = ProposalNet::zeros(1);
    net.b2(0) = 2000.0;
    const std::vector<TrainingExample> batch{example(FeatureVector::Zero(), 2, 1.0)};
    const LossAndGrad lg = nn_loss_and_grad(net, batch);
    CHECK(lg.clamped);
    CHECK(lg.loss == 745.0);
  }
}

TEST_SUITE("training") {
  TEST_CASE("a single example is memorized") {
    Rng rng = keyed_stream(3, StreamDomain::test, 0);
    const std::vector<TrainingExample> data = oracle::random_batch(1, rng);
    TrainConfig cfg;
    cfg.epochs = 400;
    cfg.learning_rate = 0.1;
    cfg.batch_size = 1;
    const TrainResult r = nn_train(ProposalNet::initialized(1), data, cfg);
    CHECK(nn_forward(r.net, data[0].features)(data[0].target_class - 1) > 0.99);
    CHECK(r.loss_history.size() == 400);
  }

  TEST_CASE("training is a pure function of the seed") {
    Rng rng = keyed_stream(4, StreamDomain::test, 0);
    const std::vector<TrainingExample> data = oracle::random_batch(50, rng);
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.batch_size = 8;
    cfg.seed = 11;
    const TrainResult a = nn_train(ProposalNet::initialized(2), data, cfg);
    const TrainResult b = nn_train(ProposalNet::initialized(2), data, cfg);
    CHECK(a.net == b.net);
    CHECK(a.loss_history == b.loss_history);
    cfg.seed = 12;
    CHECK_FALSE(nn_train(ProposalNet::initialized(2), data, cfg).net == a.net);
  }

  TEST_CASE("the nearest-distance rule is learned") {
    // Classes 1..3 pick the slot with the smallest distance; colours are noise.
    Rng rng = keyed_stream(5, StreamDomain::test, 0);
    const auto make = [&](int n) {
      std::vector<TrainingExample> out = oracle::random_batch(n, rng);
      for (TrainingExample &ex : out) {
        int best = 0;
        for (int i = 1; i < 3; ++i) {
          if (ex.features(kDistanceSlots[i]) < ex.features(kDistanceSlots[best])) {
            best = i;
          }
        }
        ex.target_class = best + 1;
      }
      return out;
    };
    const std::vector<TrainingExample> train = make(1500);
    const std::vector<TrainingExample> held_out = make(500);
    TrainConfig cfg;
    cfg.epochs = 60;
    cfg.learning_rate = 0.05;
    cfg.batch_size = 16;
    const TrainResult r = nn_train(ProposalNet::initialized(6), train, cfg);
    double right = 0.0;
    double total = 0.0;
    for (const TrainingExample &ex : held_out) {
      Vec5 p = nn_forward(r.net, ex.features);
      Eigen::Index arg = 0;
      p.maxCoeff(&arg);
      right += (arg + 1 == ex.target_class) ? ex.weight : 0.0;
      total += ex.weight;
    }
    INFO("accuracy ", right / total);
    CHECK(right / total > 0.9);
    CHECK(r.loss_history.back() < r.loss_history.front());
  }

  TEST_CASE("a runaway learning rate is reported as divergence") {
    Rng rng = keyed_stream(6, StreamDomain::test, 0);
    const std::vector<TrainingExample> data = oracle::random_batch(40, rng);
    TrainConfig cfg;
    cfg.epochs = 20;
    cfg.learning_rate = 1e4;
    cfg.batch_size = 1;
    CHECK_THROWS_AS(nn_train(ProposalNet::initialized(3), data, cfg), TrainingDiverged);
    CHECK_THROWS_AS(nn_train(ProposalNet::initialized(3), {}, cfg), InvalidArgument);
  }
}

TEST_SUITE("assignment mapping") {
  TEST_CASE("other active clusters share p4") {
    UrnState urn;
    urn.K = 6;
    urn.ms = {3, 1, 0, 4, 2, 5};
    const Vec5 p(0.3, 0.2, 0.1, 0.2, 0.2);
    const Eigen::VectorXd q = map_to_assignment_distribution(p, urn, {3, 0, 5});
    CHECK(q.size() == 7);
    CHECK(q(3) == 0.3);
    CHECK(q(0) == 0.2);
    CHECK(q(5) == 0.1);
    CHECK(q(1) == doctest::Approx(0.1));
    CHECK(q(4) == doctest::Approx(0.1));
    CHECK(q(2) == 0.0);
    CHECK(q(6) == 0.2);
    CHECK(std::abs(q.sum() - 1.0) < 1e-12);
  }

  TEST_CASE("with exactly three active clusters p4 is dropped") {
    UrnState urn;
    urn.K = 4;
    urn.ms = {2, 0, 1, 1};
    const Vec5 p(0.3, 0.2, 0.1, 0.2, 0.2);
    const Eigen::VectorXd q = map_to_assignment_distribution(p, urn, {2, 0, 3});
    CHECK(q(2) == doctest::Approx(0.375));
    CHECK(q(0) == doctest::Approx(0.25));
    CHECK(q(3) == doctest::Approx(0.125));
    CHECK(q(1) == 0.0);
    CHECK(q(4) == doctest::Approx(0.25));
    UrnState small;
    small.K = 2;
    small.ms = {1, 1};
    CHECK_THROWS_AS(map_to_assignment_distribution(p, small, {0, 1, 1}), InvalidArgument);
  }

  TEST_CASE("mapped distributions are normalized under fuzz") {
    Rng rng = keyed_stream(7, StreamDomain::test, 0);
    for (int r = 0; r < 500; ++r) {
      UrnState urn;
      urn.K = 3 + static_cast<int>(rng.uniform() * 8);
      urn.ms.assign(static_cast<std::size_t>(urn.K), 0);
      std::vector<int> live;
      for (int k = 0; k < urn.K; ++k) {
        if (k < 3 || rng.uniform() < 0.6) {
          urn.ms[static_cast<std::size_t>(k)] = 1 + static_cast<int>(rng.uniform() * 5);
          live.push_back(k);
        }
      }
      Vec5 p;
      for (int i = 0; i < 5; ++i) {
        p(i) = rng.uniform() + 1e-3;
      }
      p /= p.sum();
      const Eigen::VectorXd q = map_to_assignment_distribution(p, urn, {live[2], live[0], live[1]});
      CHECK(std::abs(q.sum() - 1.0) < 1e-12);
      for (int k = 0; k < urn.K; ++k) {
        if (urn.ms[static_cast<std::size_t>(k)] == 0) {
          CHECK(q(k) == 0.0);
        }
      }
      CHECK(q(urn.K) > 0.0);
    }
  }

  TEST_CASE("mixing with the prior") {
    const Eigen::Vector3d q(0.7, 0.0, 0.3);
    const Eigen::Vector3d prior(0.2, 0.5, 0.3);
    CHECK(mix_with_prior(q, prior, 0.0) == Eigen::VectorXd(prior));
    CHECK(mix_with_prior(q, prior, 1.0) == Eigen::VectorXd(q));
    const Eigen::VectorXd m = mix_with_prior(q, prior, 0.8);
    for (int i = 0; i < 3; ++i) {
      CHECK((prior(i) == 0.0 || m(i) > 0.0));
    }
    CHECK_THROWS_AS(mix_with_prior(q, prior, 1.5), InvalidArgument);
  }

  TEST_CASE("hand-tuned distribution") {
    CHECK(handtuned_distribution(Vec5::Constant(0.2)) == Vec5::Constant(0.2));
    CHECK_THROWS_AS(handtuned_distribution(Vec5(0.5, 0.5, 0.5, 0.0, 0.0)), InvalidArgument);
    CHECK_THROWS_AS(handtuned_distribution(Vec5(1.2, -0.2, 0.0, 0.0, 0.0)), InvalidArgument);
  }

  TEST_CASE("assignment classes") {
    UrnState urn;
    urn.K = 5;
    urn.ms = {1, 1, 1, 1, 1};
    const std::array<int, 3> nearest{4, 1, 2};
    CHECK(assignment_class(4, urn, nearest) == 1);
    CHECK(assignment_class(1, urn, nearest) == 2);
    CHECK(assignment_class(2, urn, nearest) == 3);
    CHECK(assignment_class(0, urn, nearest) == 4);
    CHECK(assignment_class(5, urn, nearest) == 5);
  }
}

TEST_SUITE("proposals") {
  TEST_CASE("the learned path with p_star 0 or a hand-tuned constant shares the mapping") {
    const ModelState s = clusters_at({Vec2(0, 0), Vec2(5, 5), Vec2(20, 0), Vec2(0, 30)},
                                     {2, 1, 4, 3});
    const PixelRecord px = pixel_at(Vec2(4, 4));
    const Hyper h;
    const Eigen::VectorXd prior = prior_assignment_distribution(s.urn, h.alpha);
    auto net = std::make_shared<const ProposalNet>(ProposalNet::initialized(8));
    for (std::uint64_t r = 0; r < 50; ++r) {
      ProposalSpec prior_spec;
      ProposalSpec nn_spec;
      nn_spec.kind = ProposalKind::nn;
      nn_spec.net = net;
      nn_spec.p_star = 0.0;
      Rng a = keyed_stream(r, StreamDomain::test, 0);
      Rng b = keyed_stream(r, StreamDomain::test, 0);
      const ProposalDraw pd = propose_assignment(s, px, h, prior_spec, false, a);
      const ProposalDraw nd = propose_assignment(s, px, h, nn_spec, false, b);
      CHECK(pd.choice.cluster == nd.choice.cluster);
      CHECK(pd.choice.log_q == nd.choice.log_q);
      CHECK(pd.choice.log_q == std::log(prior(pd.choice.cluster)));
      CHECK(nd.target_class == assignment_class(nd.choice.cluster, s.urn, nd.features->nearest));

      ProposalSpec hand;
      hand.kind = ProposalKind::handtuned;
      hand.handtuned_p = Vec5(0.4, 0.3, 0.1, 0.1, 0.1);
      hand.p_star = 1.0;
      Rng c = keyed_stream(r, StreamDomain::test, 1);
      const ProposalDraw hd = propose_assignment(s, px, h, hand, false, c);
      const auto f = extract_features(s, px);
      const Eigen::VectorXd q = map_to_assignment_distribution(hand.handtuned_p, s.urn, f->nearest);
      CHECK(hd.choice.log_q == std::log(q(hd.choice.cluster)));
    }
  }

  TEST_CASE("data-driven proposals fall back to the prior below three clusters") {
    const ModelState s = clusters_at({Vec2(0, 0), Vec2(5, 5)}, {2, 1});
    ProposalSpec spec;
    spec.kind = ProposalKind::handtuned;
    spec.p_star = 1.0;
    const Hyper h;
    const Eigen::VectorXd prior = prior_assignment_distribution(s.urn, h.alpha);
    Rng rng = keyed_stream(9, StreamDomain::test, 0);
    const ProposalDraw d = propose_assignment(s, pixel_at(Vec2(1, 1)), h, spec, true, rng);
    CHECK_FALSE(d.features.has_value());
    CHECK(d.target_class == 0);
    CHECK(d.choice.log_q == std::log(prior(d.choice.cluster)));
  }

  TEST_CASE("proposal validation") {
    ProposalSpec spec;
    spec.kind = ProposalKind::nn;
    CHECK_THROWS_AS(spec.validate(), InvalidArgument);
    spec.kind = ProposalKind::prior;
    spec.p_star = -0.1;
    CHECK_THROWS_AS(spec.validate(), InvalidArgument);
    CHECK(parse_proposal_kind("handtuned") == ProposalKind::handtuned);
    CHECK_THROWS_AS(parse_proposal_kind("learned"), InvalidArgument);
  }
}

TEST_SUITE("harvest") {
  namespace {
  // Example weights recomputed by walking every final particle's lineage.
  std::map<int, double> lineage_mass(const RunFile &run) {
    std::map<int, double> mass;
    for (const FinalParticle &f : run.finals) {
      for (int node = f.node; node >= 0; node = run.nodes[static_cast<std::size_t>(node)].parent) {
        mass[node] += f.weight;
      }
    }
    return mass;
  }

  RunFile small_run(std::size_t particles, int clutter, double alpha = 0.1) {
    SceneConfig cfg;
    cfg.frames = 6;
    cfg.clutter_per_frame = clutter;
    SceneObject obj;
    obj.birth = 1;
    obj.death = 6;
    obj.start = Vec2(60, 50);
    obj.velocity = Vec2(3, 0);
    obj.pixels_per_frame = 12;
    cfg.objects.push_back(obj);
    const Scene scene = generate(cfg, 4);
    InferenceOptions opt;
    opt.hyper = scene_hyper(cfg);
    opt.smc.particles = particles;
    opt.smc.seed = 2;
    opt.hyper.alpha = alpha;
    opt.record_features = true;
    return to_run_file(run_inference(make_dataset(scene.records), opt), nlohmann::json::object());
  }
  } // namespace

  TEST_CASE("a single particle gives every example unit weight") {
    const RunFile run = small_run(1, 5, 5.0);
    const std::vector<TrainingExample> ex = harvest_training_data(run);
    REQUIRE_FALSE(ex.empty());
    for (const TrainingExample &e : ex) {
      CHECK(e.weight == 1.0);
    }
  }

  TEST_CASE("example weights are the smoothing mass of each node") {
    const RunFile run = small_run(40, 5);
    const std::map<int, double> mass = lineage_mass(run);
    std::map<int, double> per_step;
    std::vector<std::pair<int, double>> expected;
    for (const auto &[node, m] : mass) {
      const RunNode &n = run.nodes[static_cast<std::size_t>(node)];
      per_step[n.step] += m;
      if (n.features && n.target_class >= 1 && m > 0.0) {
        expected.emplace_back(n.target_class, m);
      }
    }
    for (const auto &[step, total] : per_step) {
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
    const std::vector<TrainingExample> got = harvest_training_data(run);
    REQUIRE(got.size() == expected.size());
    double got_total = 0.0;
    double expected_total = 0.0;
    std::array<double, 5> got_by_class{};
    std::array<double, 5> expected_by_class{};
    for (std::size_t i = 0; i < got.size(); ++i) {
      got_total += got[i].weight;
      expected_total += expected[i].second;
      got_by_class[static_cast<std::size_t>(got[i].target_class - 1)] += got[i].weight;
      expected_by_class[static_cast<std::size_t>(expected[i].first - 1)] += expected[i].second;
    }
    CHECK(got_total == doctest::Approx(expected_total).epsilon(1e-12));
    for (std::size_t c = 0; c < 5; ++c) {
      CHECK(got_by_class[c] == doctest::Approx(expected_by_class[c]).epsilon(1e-12));
    }
  }

  TEST_CASE("one dominant object makes the nearest cluster the usual choice") {
    const RunFile run = small_run(30, 4);
    const Vec5 freq = class_frequencies(harvest_training_data(run));
    INFO("class frequencies ", freq.transpose());
    CHECK(freq(0) > 0.5);
    CHECK(std::abs(freq.sum() - 1.0) < 1e-12);
  }

  TEST_CASE("a run without particles cannot be harvested") {
    CHECK_THROWS_AS(harvest_training_data(RunFile{}), InvalidArgument);
  }

  TEST_CASE("training data round trip") {
    Rng rng = keyed_stream(10, StreamDomain::test, 0);
    const std::vector<TrainingExample> data = oracle::random_batch(20, rng);
    const std::string path = temp_path("data.csv");
    write_training_data(data, path);
    const std::vector<TrainingExample> back = read_training_data(path);
    REQUIRE(back.size() == data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      CHECK(back[i].features == data[i].features);
      CHECK(back[i].target_class == data[i].target_class);
      CHECK(back[i].weight == data[i].weight);
    }
    std::filesystem::remove(path);
  }
}

TEST_SUITE("net files") {
  TEST_CASE("save, load and save again are byte identical") {
    ProposalNet net = ProposalNet::initialized(12, 7);
    net.distance_scale = 26.93;
    const std::string path = temp_path("net.txt");
    save_net(net, path);
    const ProposalNet back = load_net(path);
    CHECK(back == net);
    CHECK(format_net(back) == format_net(net));
    std::filesystem::remove(path);
  }

  TEST_CASE("wrong shapes and versions are typed errors") {
    const std::string text = format_net(ProposalNet::initialized(1, 3));
    std::string wrong_input = text;
    wrong_input.replace(wrong_input.find("input 43"), 8, "input 42");
    CHECK_THROWS_AS(parse_net(wrong_input), DimensionMismatch);

    std::string wrong_hidden = text;
    wrong_hidden.replace(wrong_hidden.find("hidden 3"), 8, "hidden 4");
    CHECK_THROWS_AS(parse_net(wrong_hidden), DimensionMismatch);

    std::string wrong_version = text;
    wrong_version.replace(wrong_version.find("version 1"), 9, "version 2");
    CHECK_THROWS_AS(parse_net(wrong_version), VersionMismatch);

    std::string bad_number = text;
    bad_number.replace(bad_number.find("distance_scale 1"), 16, "distance_scale x");
    try {
      parse_net(bad_number);
      FAIL("expected a parse error");
    } catch (const ParseError &e) {
      CHECK(e.line == 6);
    }
    CHECK_THROWS_AS(load_net(temp_path("missing.txt")), std::exception);
  }
}
