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

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ddsmc/ddpmo.hpp"

namespace ddsmc {

/// `key = value` lines; `#` starts a comment; later keys override earlier.
class KeyValueConfig {
public:
  static KeyValueConfig parse(const std::string &text);
  static KeyValueConfig load(const std::string &path);

  bool has(const std::string &key) const { return values_.contains(key); }
  std::optional<std::string> get(const std::string &key) const;
  void set(const std::string &key, const std::string &value) { values_[key] = value; }

  double get_double(const std::string &key, double fallback) const;
  long long get_int(const std::string &key, long long fallback) const;
  bool get_bool(const std::string &key, bool fallback) const;
  std::string get_string(const std::string &key, const std::string &fallback) const;
  /// Comma separated numbers.
  std::optional<std::vector<double>> get_list(const std::string &key) const;

  const std::map<std::string, std::string> &values() const { return values_; }
  std::string format() const;

private:
  std::map<std::string, std::string> values_;
};

double parse_double(const std::string &s, const std::string &what);
long long parse_int(const std::string &s, const std::string &what);
std::vector<double> parse_double_list(const std::string &s, const std::string &what);

/// Applies alpha, rho, mu0, k0, nu0, lambda0, q0, m_aux and trials from the
/// config onto `hyper`, then validates it.
Hyper apply_hyper_overrides(Hyper hyper, const KeyValueConfig &config);

/// The hyperparameter keys of `hyper` as config text.
std::string format_hyper(const Hyper &hyper);

} // namespace ddsmc
