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

// Reconstruction-based baselines: solver-based reconstruction (CIP), a
// relaxed-projection gradient reconstructor ("RAP-style"), the vote adapters
// turning K tentative datasets into AIA/MIA predictions, and the per-query
// Gaussian likelihood attack.

#ifndef DESIA_BASELINES_H_
#define DESIA_BASELINES_H_

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "desia/aggregates.h"
#include "desia/core_model.h"
#include "desia/random.h"
#include "desia/solver.h"

namespace desia {

struct ShadowBatch;

struct ReconstructionSet {
  std::vector<Dataset> datasets;
  std::string method;
  std::vector<uint64_t> seeds;
  // Why fewer than K datasets came back, if they did.
  std::vector<std::string> diagnostics;
};

// Solver-based reconstruction. With `aux`, multiplicities scaled by s/|aux|
// (rounded half up, clipped to the domains) are tried first by the search.
absl::StatusOr<ReconstructionSet> CipReconstruct(const QueryRelease& rel,
                                                 SchemaPtr schema, size_t k,
                                                 const Dataset* aux,
                                                 uint64_t seed,
                                                 SolveLimits limits = {});

// Relaxed dataset: per row and attribute, a categorical distribution given
// by softmax logits. Layout: row-major, attribute blocks of |V_i| logits.
struct SoftDataset {
  SchemaPtr schema;
  size_t rows = 0;
  std::vector<size_t> offsets;  // start of attribute i inside a row block
  size_t row_width = 0;
  std::vector<double> logits;

  static SoftDataset Uniform(SchemaPtr schema, size_t rows);
  // Logit 0 on the record's value and -gap elsewhere; gap = +inf gives exact
  // one-hot rows.
  static SoftDataset OneHot(const Dataset& d, double gap);

  // Same layout as `logits`.
  std::vector<double> Probabilities() const;
  // Per-row, per-attribute argmax (lowest code on ties).
  Dataset Harden() const;
  // Per-row, per-attribute draw from the row distributions.
  Dataset Sample(Rng& rng) const;
};

// Expected count of q under independent per-attribute row distributions:
// sum_rows prod_i sum_{v in V_i^q} p_{row,i}(v).
double RapRelaxedEval(const SoftDataset& soft, const AggregateQuery& q);

// sum_q (relaxed_q - target_q)^2 and, if requested, its gradient with
// respect to the logits.
double RapLoss(const SoftDataset& soft, std::span<const AggregateQuery> queries,
               std::span<const double> targets, std::vector<double>* grad);

struct RapConfig {
  int iterations = 1000;
  double step_size = 0.1;
  // Std-dev of the Gaussian logit noise for random initialization.
  double init_noise = 0.5;
  // Logit gap for initialization from auxiliary records.
  double init_logit_gap = 2.0;
  // Harden by sampling instead of argmax.
  bool sample_hardening = false;
};

struct RapRun {
  SoftDataset soft;
  Dataset hardened;
  std::vector<double> loss_history;
};

// Full-batch gradient descent from `init`. A step that raises the loss is
// undone and the step size halved, so the recorded loss never increases.
// Logits whose `frozen` flag is set are held fixed (may be empty).
absl::StatusOr<RapRun> RapOptimize(const QueryRelease& rel, SoftDataset init,
                                   const RapConfig& config, uint64_t seed,
                                   const std::vector<char>& frozen = {});

// K runs with derived seeds; `aux` selects the initialization from auxiliary
// records, otherwise near-uniform random logits.
absl::StatusOr<ReconstructionSet> RapReconstruct(const QueryRelease& rel,
                                                 SchemaPtr schema, size_t k,
                                                 const Dataset* aux,
                                                 uint64_t seed,
                                                 const RapConfig& config = {});

// Records of all reconstructions whose non-sensitive projection is at
// Hamming distance exactly L from `target`, with multiplicity.
std::vector<Record> LNeighborhood(const PartialRecord& target,
                                  const ReconstructionSet& recon, size_t l);

struct Vote {
  Code value = 0;
  double score = 0.5;
};

// Modal sensitive value of the smallest non-empty L-neighborhood (ties
// broken uniformly at random); score = share of votes for code 1. Falls
// back to a uniform guess with score 0.5 when there is nothing to vote on.
Vote AiaVote(const TargetUser& target, const ReconstructionSet& recon,
             int sensitive_domain_size, uint64_t seed);

// Member iff the exact record appears in more than K/2 reconstructions;
// score = fraction of reconstructions containing it.
Vote MiaVote(const Record& target, const ReconstructionSet& recon);

// Per-query Gaussian likelihood votes over queries that condition on the
// sensitive attribute and do not exclude the target's non-sensitive values.
Vote LikelihoodAttack(const QueryRelease& rel, const TargetUser& target,
                      const ShadowBatch& batch, int sensitive_domain_size,
                      uint64_t seed);

// Directory of dataset_<k>.csv files plus manifest.json.
absl::Status SaveReconstructionSet(const std::string& dir,
                                   const ReconstructionSet& recon);
absl::StatusOr<ReconstructionSet> LoadReconstructionSet(const std::string& dir,
                                                        SchemaPtr schema);

}  // namespace desia

#endif  // DESIA_BASELINES_H_
