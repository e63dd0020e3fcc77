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

// The hybrid attack: a deterministic module that finds a feasible sensitive
// value (or membership) and proves it is the only one, and a stochastic
// module that trains a meta-classifier on shadow datasets when no proof is
// found.

#ifndef DESIA_DESIA_H_
#define DESIA_DESIA_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "desia/aggregates.h"
#include "desia/baselines.h"
#include "desia/core_model.h"
#include "desia/logistic.h"
#include "desia/result.h"
#include "desia/solver.h"

namespace desia {

// Query answers of N shadow datasets and the label each was built with.
struct ShadowBatch {
  FeatureMatrix features;
  std::vector<Code> labels;
  std::vector<uint32_t> train_rows;
  std::vector<uint32_t> validation_rows;
};

struct DeterministicOutcome {
  std::optional<Code> value;
  // The feasible value found before verification, if any.
  std::optional<Code> candidate;
  SolveStatus find_status = SolveStatus::kUnknown;
  std::optional<SolveStatus> verify_status;
};

// Finds a sensitive value for the target under the release, the domain
// tightening and the uniqueness constraint, then tries to refute it with the
// null constraint. Returns the value only if the refutation is proven
// infeasible.
absl::StatusOr<DeterministicOutcome> DeterministicAia(
    const QueryRelease& rel, SchemaPtr schema, const TargetUser& target,
    SolveLimits limits = {}, uint64_t seed = 0);

// Membership analogue: tentative multiplicity m = min(x_target, 1) from a
// feasible solution, verified by proving x_target = 0 (if m = 1) or
// x_target >= 1 (if m = 0) infeasible.
absl::StatusOr<DeterministicOutcome> DeterministicMia(const QueryRelease& rel,
                                                      SchemaPtr schema,
                                                      const Record& target,
                                                      SolveLimits limits = {},
                                                      uint64_t seed = 0);

// Row i: `shadow_size - 1` auxiliary records drawn without replacement with
// fresh uniform sensitive values, plus the target's partial record with a
// uniform label z_i. Rows [0, 2N/3) train, the rest validate.
absl::StatusOr<ShadowBatch> SampleShadowDatasetsAia(
    const Dataset& aux, const TargetUser& target,
    std::span<const AggregateQuery> queries, size_t shadow_size, size_t n,
    uint64_t seed);

// Row i: label b_i uniform in {0, 1}; the target record plus
// `shadow_size - 1` auxiliary records when b_i = 1, otherwise
// `shadow_size` auxiliary records.
absl::StatusOr<ShadowBatch> SampleShadowDatasetsMia(
    const Dataset& aux, const Record& target,
    std::span<const AggregateQuery> queries, size_t shadow_size, size_t n,
    uint64_t seed);

// Fits each lambda on the training rows, keeps the one with the lowest
// validation log-loss (smaller lambda on ties) and refits on all rows.
absl::StatusOr<MetaClassifier> TrainMetaClassifier(
    const ShadowBatch& batch, std::span<const double> lambda_grid,
    const LogisticOptions& opts = {});

struct StochasticPrediction {
  Code value = 0;
  // Probability of code 1.
  double score = 0.5;
};

absl::StatusOr<StochasticPrediction> StochasticPredict(
    const MetaClassifier& model, const QueryRelease& rel);

enum class FeasibleValueFinder { kSolver, kSynthetic };

struct DesiaConfig {
  FeasibleValueFinder finder = FeasibleValueFinder::kSolver;
  bool uniqueness_constraint = true;
  bool verification = true;
  bool stochastic_module = true;
  size_t num_shadows = 3000;
  std::vector<double> lambda_grid = {1e-3, 1e-2, 1e-1, 1.0, 10.0};
  SolveLimits limits;
  LogisticOptions logistic;
  RapConfig rap;
};

// Everything the attacker is allowed to see: Q, Q(D), |D|, the domains and
// the auxiliary dataset.
struct AttackerView {
  const QueryRelease* release = nullptr;
  SchemaPtr schema;
  const Dataset* aux = nullptr;
};

// Shared per-release state for the synthetic finder without the uniqueness
// constraint (one RAP-style reconstruction per release).
struct DesiaSharedState {
  std::optional<ReconstructionSet> synthetic;
};

absl::StatusOr<DesiaSharedState> PrepareDesiaShared(const AttackerView& view,
                                                    const DesiaConfig& config,
                                                    uint64_t seed);

absl::StatusOr<AttackResult> DesiaAttack(const AttackerView& view,
                                         const TargetUser& target,
                                         const DesiaConfig& config,
                                         uint64_t seed,
                                         const DesiaSharedState* shared =
                                             nullptr);

absl::StatusOr<AttackResult> DesiaAttackMia(const AttackerView& view,
                                            const Record& target,
                                            const DesiaConfig& config,
                                            uint64_t seed);

// Tag identifying the configuration in result streams.
std::string DesiaMethodName(const DesiaConfig& config);

}  // namespace desia

#endif  // DESIA_DESIA_H_
