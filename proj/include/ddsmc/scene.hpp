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
#include <string>
#include <vector>

#include "ddsmc/ddpmo.hpp"
#include "ddsmc/tracking.hpp"

namespace ddsmc {

struct SceneObject {
  int birth = 1;
  int death = 1;
  Vec2 start = Vec2::Zero();   ///< centre at the birth frame
  Vec2 velocity = Vec2::Zero(); ///< pixels per frame
  double motion_noise = 0.0;   ///< sd of the per-frame random-walk jitter
  ColourVec profile = ColourVec::Constant(0.1);
  double spread = 4.0; ///< sd of pixel positions around the centre
  int pixels_per_frame = 25;
};

struct SceneConfig {
  int frames = 30;
  double width = 200.0;
  double height = 100.0;
  int clutter_per_frame = 5;
  std::vector<SceneObject> objects;

  void validate() const;
};

struct Scene {
  std::vector<PixelRecord> records;
  std::vector<GtTrack> gt;
  std::vector<std::string> warnings;
};

/// Pixels per live object drawn around its centre and clipped to the image,
/// uniform clutter, within-frame order shuffled. Deterministic in seed.
Scene generate(const SceneConfig &config, std::uint64_t seed);

/// Four objects, two of them crossing, one born late.
SceneConfig default_train_scene();
/// Same colour profiles as the train scene on different trajectories.
SceneConfig default_test_scene();
SceneConfig default_scene(const std::string &name);

/// Model hyperparameters matched to a scene's geometry: mean prior centred
/// on the image and expected cluster covariance spread^2 I. Other values keep
/// their defaults.
Hyper scene_hyper(const SceneConfig &config);

void write_dataset(const std::vector<PixelRecord> &records, const std::string &path,
                   const std::string &comment = "");
/// Throws ParseError naming the line for malformed or invalid records.
std::vector<PixelRecord> load_dataset(const std::string &path, int trials = kPatchTrials);
std::vector<PixelRecord> parse_dataset(const std::string &text, int trials = kPatchTrials);

void write_gt(const std::vector<GtTrack> &gt, const std::string &path,
              const std::string &comment = "");
std::vector<GtTrack> load_gt(const std::string &path);
std::vector<GtTrack> parse_gt(const std::string &text);

/// Comma separated numeric fields; throws ParseError(line) on a bad number.
std::vector<double> split_numbers(const std::string &line, std::size_t lineno);

} // namespace ddsmc
