// Copyright 2026 The DeSIA Authors
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

// Experiment manifest for the command-line tool: TOML-style sections of
// `key = value` lines, overridable from flags.

#ifndef DESIA_TOOLS_RUN_CONFIG_H_
#define DESIA_TOOLS_RUN_CONFIG_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "desia/harness.h"
#include "json.hpp"

namespace desia::cli {

struct RunConfig {
  uint64_t seed = 0;
  std::string out = "out";
  size_t workers = 1;

  std::string schema_path;
  size_t dataset_size = 5000;
  // Existing full dataset to split; generated when empty.
  std::string dataset_path;
  std::string private_path;
  std::string aux_path;

  std::string query_spec;
  size_t max_way = 3;
  std::string pool_path;

  std::string game = "aia";
  GameConfig game_cfg;

  std::string sweep_axis = "ratio";
  std::vector<double> ratios = {0.05, 0.1, 0.25, 0.5, 1.0};
  std::vector<double> epsilons = {kNoNoise, 10.0, 1.0, 0.1};
  size_t repeats = 3;

  std::vector<double> ks = {1e-3, 1e-2, 1e-1};

  // Resolved locations inside `out` unless set explicitly.
  std::string PrivatePath() const;
  std::string AuxPath() const;
  std::string PoolPath() const;
  std::string ReleaseDir() const;
  std::string AttackDir() const;

  // Seeds of the individual pipeline stages, all derived from `seed`.
  uint64_t DataSeed() const;
  uint64_t SplitSeed() const;
  uint64_t TargetSeed() const;
};

// Parses the manifest; errors name the file and the offending key.
absl::StatusOr<RunConfig> LoadRunConfig(const std::string& path);

// Applies one `section.key = value` setting.
absl::Status SetOption(RunConfig& cfg, const std::string& key,
                       const std::string& value);

// Effective configuration (worker count excluded, it never changes results).
nlohmann::json RunConfigToJson(const RunConfig& cfg);
std::string ConfigHash(const RunConfig& cfg);

absl::StatusOr<std::vector<double>> ParseNumberList(const std::string& text);

}  // namespace desia::cli

#endif  // DESIA_TOOLS_RUN_CONFIG_H_
