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

#include "ddsmc/scene.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "ddsmc/errors.hpp"
#include "ddsmc/stats.hpp"

namespace ddsmc {

void SceneConfig::validate() const {
  if (frames < 0) {
    throw InvalidArgument("scene: frames must be nonnegative");
  }
  if (!(width > 0.0) || !(height > 0.0)) {
    throw InvalidArgument("scene: image bounds must be positive");
  }
  if (clutter_per_frame < 0) {
    throw InvalidArgument("scene: clutter_per_frame must be nonnegative");
  }
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const SceneObject &o = objects[i];
    const std::string who = "scene: object " + std::to_string(i) + ": ";
    if (o.birth < 1 || o.birth > o.death || o.death > frames) {
      throw InvalidArgument(who + "need 1 <= birth <= death <= frames");
    }
    if (!(o.spread > 0.0) || !(o.motion_noise >= 0.0) || o.pixels_per_frame < 0) {
      throw InvalidArgument(who + "spread must be positive, noise and pixel count nonnegative");
    }
    if (!o.start.allFinite() || !o.velocity.allFinite()) {
      throw InvalidArgument(who + "non-finite motion");
    }
    if ((o.profile.array() < 0.0).any() || std::abs(o.profile.sum() - 1.0) > 1e-9) {
      throw InvalidArgument(who + "colour profile must lie on the simplex");
    }
  }
}

namespace {

template <class T> void shuffle_in_place(std::vector<T> &v, Rng &rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
    std::swap(v[i - 1], v[std::min(j, i - 1)]);
  }
}

Vec2 clip(const Vec2 &p, double width, double height) {
  return {std::clamp(p(0), 0.0, width), std::clamp(p(1), 0.0, height)};
}

} // namespace

Scene generate(const SceneConfig &config, std::uint64_t seed) {
  config.validate();
  Scene scene;

  std::vector<std::vector<Vec2>> centres(config.objects.size());
  for (std::size_t i = 0; i < config.objects.size(); ++i) {
    const SceneObject &o = config.objects[i];
    Rng rng = keyed_stream(seed, StreamDomain::scene, 0, i + 1);
    Vec2 c = o.start;
    GtTrack track;
    track.id = static_cast<int>(i) + 1;
    for (int t = o.birth; t <= o.death; ++t) {
      if (t > o.birth) {
        c += o.velocity;
        c(0) += o.motion_noise * normal_sample(rng);
        c(1) += o.motion_noise * normal_sample(rng);
      }
      centres[i].push_back(c);
      const Vec2 r = Vec2::Constant(2.0 * o.spread);
      track.frames[t] = {c(0) - r(0), c(1) - r(1), c(0) + r(0), c(1) + r(1)};
    }
    scene.gt.push_back(std::move(track));
  }

  const ColourVec uniform = ColourVec::Constant(1.0 / kColourBins);
  for (int t = 1; t <= config.frames; ++t) {
    Rng rng = keyed_stream(seed, StreamDomain::scene, static_cast<std::uint64_t>(t));
    std::vector<PixelRecord> frame;
    for (std::size_t i = 0; i < config.objects.size(); ++i) {
      const SceneObject &o = config.objects[i];
      if (t < o.birth || t > o.death) {
        continue;
      }
      const Vec2 &c = centres[i][static_cast<std::size_t>(t - o.birth)];
      for (int j = 0; j < o.pixels_per_frame; ++j) {
        PixelRecord px;
        px.t = t;
        const double dx = o.spread * normal_sample(rng);
        const double dy = o.spread * normal_sample(rng);
        px.pos = clip(c + Vec2(dx, dy), config.width, config.height);
        px.col = multinomial_sample<kColourBins>(kPatchTrials, o.profile, rng);
        frame.push_back(px);
      }
    }
    for (int j = 0; j < config.clutter_per_frame; ++j) {
      PixelRecord px;
      px.t = t;
      const double x = rng.uniform() * config.width;
      const double y = rng.uniform() * config.height;
      px.pos = Vec2(x, y);
      px.col = multinomial_sample<kColourBins>(kPatchTrials, uniform, rng);
      frame.push_back(px);
    }
    shuffle_in_place(frame, rng);
    for (std::size_t n = 0; n < frame.size(); ++n) {
      frame[n].n = static_cast<int>(n) + 1;
      scene.records.push_back(frame[n]);
    }
  }
  if (scene.records.empty()) {
    scene.warnings.push_back("scene produced no pixels");
  }
  return scene;
}

namespace {

ColourVec two_tone(int main, int second) {
  ColourVec p = ColourVec::Constant(0.2 / (kColourBins - 2));
  p(main) = 0.55;
  p(second) = 0.25;
  return p;
}

SceneObject object(int birth, int death, Vec2 start, Vec2 velocity, ColourVec profile) {
  SceneObject o;
  o.birth = birth;
  o.death = death;
  o.start = start;
  o.velocity = velocity;
  o.motion_noise = 0.5;
  o.profile = profile;
  o.spread = 4.0;
  o.pixels_per_frame = 25;
  return o;
}

} // namespace

SceneConfig default_train_scene() {
  SceneConfig c;
  c.objects = {
      object(1, 30, {20.0, 30.0}, {5.0, 1.0}, two_tone(0, 1)),
      object(1, 30, {180.0, 70.0}, {-5.0, -1.0}, two_tone(3, 4)),
      object(1, 30, {40.0, 85.0}, {2.0, 0.0}, two_tone(6, 7)),
      object(8, 30, {160.0, 15.0}, {-1.0, 0.5}, two_tone(9, 2)),
  };
  return c;
}

SceneConfig default_test_scene() {
  SceneConfig c;
  c.objects = {
      object(1, 30, {15.0, 70.0}, {6.0, -1.2}, two_tone(0, 1)),
      object(1, 30, {185.0, 25.0}, {-6.0, 1.2}, two_tone(3, 4)),
      object(5, 30, {100.0, 10.0}, {0.5, 0.4}, two_tone(6, 7)),
      object(1, 24, {30.0, 20.0}, {1.0, 0.5}, two_tone(9, 2)),
  };
  return c;
}

SceneConfig default_scene(const std::string &name) {
  if (name == "train") {
    return default_train_scene();
  }
  if (name == "test") {
    return default_test_scene();
  }
  throw InvalidArgument("unknown scene '" + name + "' (expected train or test)");
}

Hyper scene_hyper(const SceneConfig &config) {
  config.validate();
  Hyper h;
  h.niw.mu0 = Vec2(config.width / 2.0, config.height / 2.0);
  double spread = 4.0;
  if (!config.objects.empty()) {
    spread = 0.0;
    for (const SceneObject &o : config.objects) {
      spread += o.spread;
    }
    spread /= static_cast<double>(config.objects.size());
  }
  h.niw.lambda0 = Mat2::Identity() * spread * spread * (h.niw.nu0 - 3.0);
  return h;
}

std::vector<double> split_numbers(const std::string &line, std::size_t lineno) {
  std::vector<double> values;
  const char *p = line.data();
  const char *end = p + line.size();
  while (end > p && (end[-1] == '\r' || end[-1] == ' ')) {
    --end;
  }
  for (;;) {
    const char *comma = std::find(p, end, ',');
    while (p < comma && *p == ' ') {
      ++p;
    }
    double v = 0.0;
    const auto res = std::from_chars(p, comma, v);
    if (res.ec != std::errc() || res.ptr != comma) {
      throw ParseError(lineno, "line " + std::to_string(lineno) + ": bad number '" +
                                   std::string(p, comma) + "'");
    }
    values.push_back(v);
    if (comma == end) {
      break;
    }
    p = comma + 1;
  }
  return values;
}

namespace {

int as_int(double v, std::size_t lineno, const char *what) {
  const auto i = static_cast<int>(v);
  if (static_cast<double>(i) != v) {
    throw ParseError(lineno, "line " + std::to_string(lineno) + ": " + what +
                                 " must be an integer");
  }
  return i;
}

bool skip_line(const std::string &line) {
  const auto first = line.find_first_not_of(" \t\r");
  return first == std::string::npos || line[first] == '#' || line.compare(first, 2, "t,") == 0;
}

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_comment(std::ostream &out, const std::string &comment) {
  std::istringstream lines(comment);
  std::string line;
  while (std::getline(lines, line)) {
    out << "# " << line << '\n';
  }
}

} // namespace

void write_dataset(const std::vector<PixelRecord> &records, const std::string &path,
                   const std::string &comment) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open " + path + " for writing");
  }
  out << "# ddsmc dataset v1\n";
  write_comment(out, comment);
  out << "t,n,x,y,c1,c2,c3,c4,c5,c6,c7,c8,c9,c10\n";
  for (const PixelRecord &r : records) {
    out << r.t << ',' << r.n << ',' << format_double(r.pos(0)) << ','
        << format_double(r.pos(1));
    for (int i = 0; i < kColourBins; ++i) {
      out << ',' << r.col(i);
    }
    out << '\n';
  }
}

std::vector<PixelRecord> parse_dataset(const std::string &text, int trials) {
  std::vector<PixelRecord> records;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  int t = 0;
  int n = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (skip_line(line)) {
      continue;
    }
    const std::vector<double> v = split_numbers(line, lineno);
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (v.size() != 4 + kColourBins) {
      throw ParseError(lineno, where + "expected " + std::to_string(4 + kColourBins) +
                                   " fields, got " + std::to_string(v.size()));
    }
    PixelRecord r;
    r.t = as_int(v[0], lineno, "t");
    r.n = as_int(v[1], lineno, "n");
    r.pos = Vec2(v[2], v[3]);
    for (int i = 0; i < kColourBins; ++i) {
      r.col(i) = as_int(v[static_cast<std::size_t>(4 + i)], lineno, "colour count");
    }
    if (!r.pos.allFinite()) {
      throw ParseError(lineno, where + "non-finite position");
    }
    if ((r.col.array() < 0).any() || r.col.sum() != trials) {
      throw ParseError(lineno, where + "colour counts sum to " + std::to_string(r.col.sum()) +
                                   ", expected " + std::to_string(trials));
    }
    if (r.t < 1 || r.t < t) {
      throw ParseError(lineno, where + "frame index must be >= 1 and nondecreasing");
    }
    if (r.t > t) {
      t = r.t;
      n = 0;
    }
    if (r.n != n + 1) {
      throw ParseError(lineno, where + "expected n=" + std::to_string(n + 1) + ", got " +
                                   std::to_string(r.n));
    }
    n = r.n;
    records.push_back(r);
  }
  return records;
}

std::vector<PixelRecord> load_dataset(const std::string &path, int trials) {
  try {
    return parse_dataset(read_file(path), trials);
  } catch (const ParseError &e) {
    throw ParseError(e.line, path + ": " + e.what());
  }
}

void write_gt(const std::vector<GtTrack> &gt, const std::string &path, const std::string &comment) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open " + path + " for writing");
  }
  out << "# ddsmc ground truth v1\n";
  write_comment(out, comment);
  out << "t,track_id,x_min,y_min,x_max,y_max\n";
  std::map<std::pair<int, int>, Box> rows;
  for (const GtTrack &track : gt) {
    for (const auto &[t, box] : track.frames) {
      rows[{t, track.id}] = box;
    }
  }
  for (const auto &[key, b] : rows) {
    out << key.first << ',' << key.second << ',' << format_double(b.x_min) << ','
        << format_double(b.y_min) << ',' << format_double(b.x_max) << ','
        << format_double(b.y_max) << '\n';
  }
}

std::vector<GtTrack> parse_gt(const std::string &text) {
  std::map<int, GtTrack> tracks;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (skip_line(line)) {
      continue;
    }
    const std::vector<double> v = split_numbers(line, lineno);
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (v.size() != 6) {
      throw ParseError(lineno, where + "expected 6 fields, got " + std::to_string(v.size()));
    }
    const int t = as_int(v[0], lineno, "t");
    const int id = as_int(v[1], lineno, "track_id");
    const Box box{v[2], v[3], v[4], v[5]};
    if (!(box.x_min <= box.x_max) || !(box.y_min <= box.y_max)) {
      throw ParseError(lineno, where + "box needs x_min <= x_max and y_min <= y_max");
    }
    GtTrack &track = tracks[id];
    track.id = id;
    if (!track.frames.empty() && track.frames.rbegin()->first >= t) {
      throw ParseError(lineno, where + "frames of track " + std::to_string(id) +
                                   " must be strictly increasing");
    }
    track.frames[t] = box;
  }
  std::vector<GtTrack> out;
  for (auto &[id, track] : tracks) {
    out.push_back(std::move(track));
  }
  return out;
}

std::vector<GtTrack> load_gt(const std::string &path) {
  try {
    return parse_gt(read_file(path));
  } catch (const ParseError &e) {
    throw ParseError(e.line, path + ": " + e.what());
  }
}

} // namespace ddsmc
