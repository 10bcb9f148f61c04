// Copyright 2026 The metricdp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef METRICDP_CLI_APP_HPP_
#define METRICDP_CLI_APP_HPP_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace metricdp::cli {

/// Flat key = value configuration ('#' comments, blank lines ignored).
/// Unknown keys are rejected so typos fail loudly. CLI flags overlay file
/// values.
std::map<std::string, std::string> parse_config_stream(std::istream& in,
                                                       const std::string& name);
std::map<std::string, std::string> parse_config_file(const std::string& path);

/// True for every key the schema defines (see README for the full table).
bool is_known_key(const std::string& key);

class RunConfig {
 public:
  RunConfig() = default;
  explicit RunConfig(std::map<std::string, std::string> kv);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  std::string require(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_double_list(const std::string& key) const;

  /// Sorted "key = value" lines; the config hash is taken over this text.
  std::string canonical_text() const;

 private:
  std::map<std::string, std::string> kv_;
};

/// Exit codes: 0 success, 1 configuration or data errors, 2 out-of-vocabulary
/// token under the strict policy, 3 DP check found a violation.
int run_cli(int argc, const char* const* argv);

}  // namespace metricdp::cli

#endif  // METRICDP_CLI_APP_HPP_
