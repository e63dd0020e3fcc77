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

// Bounded-integer feasibility over record multiplicities.
//
// One variable x_r per cell of the domain product, integer domains [lo, hi],
// and sum-equality constraints sum_{r in S} x_r = target. The search is
// bounds-consistency propagation plus depth-first branching on the variable
// with the smallest remaining domain. Within node/time limits it is
// complete: kInfeasible is only reported after the search space is
// exhausted.

#ifndef DESIA_SOLVER_H_
#define DESIA_SOLVER_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "desia/aggregates.h"
#include "desia/core_model.h"

namespace desia {

struct SumConstraint {
  std::vector<uint32_t> vars;
  int64_t target = 0;
};

// Value per variable.
struct Assignment {
  std::vector<int64_t> values;

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

struct FeasibilityProblem {
  // Set when the problem was built from a release; variables are then the
  // cells of this schema in AttributeSchema::CellIndex order.
  SchemaPtr schema;
  int64_t dataset_size = 0;
  std::vector<int64_t> lower;
  std::vector<int64_t> upper;
  // For release-built problems, constraints [0, m) are the released queries
  // in order and constraint m is the total-size constraint.
  std::vector<SumConstraint> constraints;
  size_t num_query_constraints = 0;
  std::vector<std::string> warnings;

  size_t num_variables() const { return lower.size(); }

  // Schema-free problem with domains [0, upper_bound] (tests, tooling).
  static FeasibilityProblem WithVariables(size_t n, int64_t upper_bound);

  bool IsSatisfiedBy(const Assignment& a) const;
};

inline constexpr uint64_t kDefaultVariableCap = 1'000'000;

// Variables for every potential record, one constraint per query with the
// released answer as target (negative noisy answers clamped to 0, with a
// warning), and sum of all variables = dataset_size.
absl::StatusOr<FeasibilityProblem> BuildProblem(
    const QueryRelease& rel, SchemaPtr schema,
    uint64_t variable_cap = kDefaultVariableCap);

// upper_r <- min(s, min over covering queries of the clamped answer).
FeasibilityProblem TightenDomains(const FeasibilityProblem& p,
                                  const QueryRelease& rel);

absl::StatusOr<FeasibilityProblem> AddSumConstraint(
    const FeasibilityProblem& p, std::vector<uint32_t> vars, int64_t target);
// Forces var = value; the value must lie inside the variable's domain.
absl::StatusOr<FeasibilityProblem> FixVariable(const FeasibilityProblem& p,
                                               uint32_t var, int64_t value);
// Intersects the domain of `var` with [lo, hi] (possibly emptying it, which
// makes the problem infeasible).
absl::StatusOr<FeasibilityProblem> RestrictDomain(const FeasibilityProblem& p,
                                                  uint32_t var, int64_t lo,
                                                  int64_t hi);

enum class SolveStatus { kFeasible, kInfeasible, kUnknown };

std::string_view SolveStatusName(SolveStatus s);

struct SolveLimits {
  uint64_t max_nodes = 10'000'000;
  // <= 0 disables the wall-clock limit (runs are then fully deterministic).
  double max_seconds = 30.0;
};

struct SolveResult {
  SolveStatus status = SolveStatus::kUnknown;
  Assignment assignment;  // valid iff status == kFeasible
  uint64_t nodes = 0;
};

// Seed drives the branching tie-break and value order; `shuffle_constraints`
// also permutes the propagation order. Hinted values are tried first.
SolveResult Solve(const FeasibilityProblem& p, uint64_t seed,
                  const Assignment* hint = nullptr, SolveLimits limits = {},
                  bool shuffle_constraints = false);

struct Enumeration {
  std::vector<Assignment> solutions;
  size_t infeasible = 0;
  size_t unknown = 0;
};

// K independently seeded solves with permuted constraint order. Duplicates
// are allowed. Stops early once a solve proves infeasibility.
Enumeration EnumerateSolutions(const FeasibilityProblem& p, size_t k,
                               uint64_t seed, const Assignment* hint = nullptr,
                               SolveLimits limits = {});

// Dataset with x_r copies of every cell r.
Dataset AssignmentToDataset(const Assignment& a, SchemaPtr schema);
Assignment DatasetToAssignment(const Dataset& d);

// Cells of the domain product covered by q, ascending.
std::vector<uint32_t> CoveredCells(const AggregateQuery& q,
                                   const AttributeSchema& schema);

}  // namespace desia

#endif  // DESIA_SOLVER_H_
