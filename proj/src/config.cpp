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

#include "ddsmc/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "ddsmc/errors.hpp"
#include "ddsmc/tracking.hpp"

namespace ddsmc {

namespace {

std::string trim(const std::string &s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) {
    return "";
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

} // namespace

KeyValueConfig KeyValueConfig::parse(const std::string &text) {
  KeyValueConfig config;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line.resize(hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(lineno, "config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw ParseError(lineno, "config line " + std::to_string(lineno) + ": empty key");
    }
    config.values_[key] = trim(line.substr(eq + 1));
  }
  return config;
}

KeyValueConfig KeyValueConfig::load(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open config " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse(ss.str());
  } catch (const ParseError &e) {
    throw ParseError(e.line, path + ": " + e.what());
  }
}

std::optional<std::string> KeyValueConfig::get(const std::string &key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    return std::nullopt;
  }
  return it->second;
}

double KeyValueConfig::get_double(const std::string &key, double fallback) const {
  const auto v = get(key);
  return v ? parse_double(*v, key) : fallback;
}

long long KeyValueConfig::get_int(const std::string &key, long long fallback) const {
  const auto v = get(key);
  return v ? parse_int(*v, key) : fallback;
}

bool KeyValueConfig::get_bool(const std::string &key, bool fallback) const {
  const auto v = get(key);
  if (!v) {
    return fallback;
  }
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") {
    return true;
  }
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") {
    return false;
  }
  throw InvalidArgument("config key '" + key + "': expected a boolean, got '" + *v + "'");
}

std::string KeyValueConfig::get_string(const std::string &key, const std::string &fallback) const {
  return get(key).value_or(fallback);
}

std::optional<std::vector<double>> KeyValueConfig::get_list(const std::string &key) const {
  const auto v = get(key);
  if (!v) {
    return std::nullopt;
  }
  return parse_double_list(*v, key);
}

std::string KeyValueConfig::format() const {
  std::string out;
  for (const auto &[k, v] : values_) {
    out += k + " = " + v + "\n";
  }
  return out;
}

double parse_double(const std::string &s, const std::string &what) {
  const std::string t = trim(s);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw InvalidArgument(what + ": expected a number, got '" + s + "'");
  }
  return v;
}

long long parse_int(const std::string &s, const std::string &what) {
  const std::string t = trim(s);
  long long v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw InvalidArgument(what + ": expected an integer, got '" + s + "'");
  }
  return v;
}

std::vector<double> parse_double_list(const std::string &s, const std::string &what) {
  std::vector<double> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    out.push_back(parse_double(item, what));
  }
  if (out.empty()) {
    throw InvalidArgument(what + ": empty list");
  }
  return out;
}

namespace {

std::vector<double> exact_list(const KeyValueConfig &c, const std::string &key, std::size_t n) {
  std::vector<double> v = *c.get_list(key);
  if (v.size() != n) {
    throw InvalidArgument("config key '" + key + "': expected " + std::to_string(n) +
                          " values, got " + std::to_string(v.size()));
  }
  return v;
}

} // namespace

Hyper apply_hyper_overrides(Hyper hyper, const KeyValueConfig &c) {
  hyper.alpha = c.get_double("alpha", hyper.alpha);
  hyper.rho = c.get_double("rho", hyper.rho);
  if (c.has("mu0")) {
    const auto v = exact_list(c, "mu0", 2);
    hyper.niw.mu0 = Vec2(v[0], v[1]);
  }
  hyper.niw.k0 = c.get_double("k0", hyper.niw.k0);
  hyper.niw.nu0 = c.get_double("nu0", hyper.niw.nu0);
  if (c.has("lambda0")) {
    const auto v = exact_list(c, "lambda0", 4);
    hyper.niw.lambda0 << v[0], v[1], v[2], v[3];
  }
  if (c.has("q0")) {
    const std::vector<double> v = *c.get_list("q0");
    if (v.size() == 1) {
      hyper.q0.setConstant(v[0]);
    } else if (v.size() == static_cast<std::size_t>(kColourBins)) {
      for (int i = 0; i < kColourBins; ++i) {
        hyper.q0(i) = v[static_cast<std::size_t>(i)];
      }
    } else {
      throw InvalidArgument("config key 'q0': expected 1 or " + std::to_string(kColourBins) +
                            " values");
    }
  }
  hyper.m_aux = static_cast<int>(c.get_int("m_aux", hyper.m_aux));
  hyper.trials = static_cast<int>(c.get_int("trials", hyper.trials));
  hyper.validate();
  return hyper;
}

std::string format_hyper(const Hyper &h) {
  std::string q0;
  for (int i = 0; i < kColourBins; ++i) {
    q0 += (i > 0 ? "," : "") + format_double(h.q0(i));
  }
  const Mat2 &l = h.niw.lambda0;
  return "alpha = " + format_double(h.alpha) + "\n" + "rho = " + format_double(h.rho) + "\n" +
         "mu0 = " + format_double(h.niw.mu0(0)) + "," + format_double(h.niw.mu0(1)) + "\n" +
         "k0 = " + format_double(h.niw.k0) + "\n" + "nu0 = " + format_double(h.niw.nu0) + "\n" +
         "lambda0 = " + format_double(l(0, 0)) + "," + format_double(l(0, 1)) + "," +
         format_double(l(1, 0)) + "," + format_double(l(1, 1)) + "\n" + "q0 = " + q0 + "\n" +
         "m_aux = " + std::to_string(h.m_aux) + "\n" + "trials = " + std::to_string(h.trials) +
         "\n";
}

} // namespace ddsmc
