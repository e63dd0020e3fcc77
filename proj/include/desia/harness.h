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

// Privacy games for attribute and membership inference against a fixed
// aggregate release, and sweeps over the query count and the noise level.

#ifndef DESIA_HARNESS_H_
#define DESIA_HARNESS_H_

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "desia/aggregates.h"
#include "desia/core_model.h"
#include "desia/desia.h"
#include "desia/result.h"
#include "json.hpp"

namespace desia {

enum class AttackMethod {
  kDesia,
  kCipRand,
  kCipInit,
  kRapRand,
  kRapInit,
  kLikelihood,
  kRandom,
};

std::string_view AttackMethodName(AttackMethod m);
absl::StatusOr<AttackMethod> ParseAttackMethod(std::string_view name);

inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();

struct GameConfig {
  AttackMethod method = AttackMethod::kDesia;
  // Released query count; takes precedence over the ratio. With neither set,
  // the whole pool is released.
  std::optional<size_t> num_queries;
  std::optional<double> query_ratio;
  // Laplace noise scale 1/epsilon per query; unset or infinite = exact.
  std::optional<double> epsilon;
  uint64_t game_seed = 0;
  uint64_t attack_seed = 0;
  // Extra streams so sweeps can redraw the query sample or the noise alone.
  uint64_t query_stream = 0;
  uint64_t noise_stream = 0;
  // K for the reconstruction baselines.
  size_t num_reconstructions = 100;
  size_t target_cap = 200;
  size_t workers = 1;
  // Ablation flags, N, lambda grid, solver limits and RAP settings.
  DesiaConfig desia;
};

nlohmann::json GameConfigToJson(const GameConfig& cfg);

// m from the config: explicit count, else round(ratio * s), else the pool.
absl::StatusOr<size_t> ResolveQueryCount(const GameConfig& cfg, size_t s,
                                         size_t available);

struct GameRun {
  std::vector<AttackResult> results;
  nlohmann::json metadata;
  double wall_seconds = 0;
  std::vector<std::string> warnings;
};

// Called on the protected dataset right after the release is computed.
// Tests use it to check that attacks never read the protected data.
using PostReleaseHook = std::function<void(Dataset&)>;

// Steps 1-3 of the attribute game: randomize, pick unique targets, record
// the truth and publish the release.
struct AiaGameSetup {
  QueryRelease release;
  std::vector<TargetUser> targets;
  std::vector<Code> truth;
  nlohmann::json metadata;
  std::vector<std::string> warnings;
};

absl::StatusOr<AiaGameSetup> PrepareAiaGame(const Dataset& d_private,
                                            std::span<const AggregateQuery> queries,
                                            const GameConfig& cfg,
                                            const PostReleaseHook& hook = {});

// Step 4: every target is attacked from the release and the auxiliary data.
absl::StatusOr<GameRun> AttackAiaGame(const AiaGameSetup& setup, SchemaPtr schema,
                                      const Dataset& d_aux, const GameConfig& cfg);

// <dir>/release.json (attacker view) and <dir>/targets.jsonl (truth).
absl::Status SaveAiaSetup(const std::string& dir, const AiaGameSetup& setup,
                          const AttributeSchema& schema);
absl::StatusOr<AiaGameSetup> LoadAiaSetup(const std::string& dir,
                                          const AttributeSchema& schema);

absl::StatusOr<GameRun> RunAiaGame(const Dataset& d_private, const Dataset& d_aux,
                                   std::span<const AggregateQuery> queries,
                                   const GameConfig& cfg,
                                   const PostReleaseHook& hook = {});

// One game per target record: b uniform, the target (b = 0) or another
// uniformly chosen record (b = 1) is removed before the release.
absl::StatusOr<GameRun> RunMiaGame(const Dataset& d_private, const Dataset& d_aux,
                                   std::span<const AggregateQuery> queries,
                                   const GameConfig& cfg,
                                   std::span<const Record> targets);

// Seeded subsample of distinct records of `d` for the membership game.
std::vector<Record> SelectMiaTargets(const Dataset& d, size_t cap, uint64_t seed);

absl::StatusOr<std::vector<GameRun>> SweepQueryRatio(
    const Dataset& d_private, const Dataset& d_aux,
    std::span<const AggregateQuery> queries, std::span<const double> ratios,
    const GameConfig& cfg);

// `repeats` noisy releases per epsilon; kNoNoise runs once without noise.
absl::StatusOr<std::vector<GameRun>> SweepNoise(
    const Dataset& d_private, const Dataset& d_aux,
    std::span<const AggregateQuery> queries, std::span<const double> epsilons,
    size_t repeats, const GameConfig& cfg);

// Runs fn(0..n-1) on `workers` threads. Returns the error of the lowest
// failing index, so the outcome does not depend on scheduling.
absl::Status ParallelFor(size_t n, size_t workers,
                         const std::function<absl::Status(size_t)>& fn);

// 10% protected, 90% auxiliary.
std::pair<Dataset, Dataset> SplitForGame(const Dataset& d, uint64_t seed);

std::string DatasetHash(const Dataset& d);

// <dir>/results.jsonl and <dir>/meta.json. A non-empty `header` becomes a
// leading '#' line of the results file.
absl::Status SaveGameRun(const std::string& dir, const GameRun& run,
                         std::string_view header = {});
absl::StatusOr<GameRun> LoadGameRun(const std::string& dir);

}  // namespace desia

#endif  // DESIA_HARNESS_H_
