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

#include "desia/desia.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"

namespace desia {
namespace {

absl::StatusOr<FeasibilityProblem> BaseProblem(const QueryRelease& rel,
                                               SchemaPtr schema) {
  auto built = BuildProblem(rel, schema);
  if (!built.ok()) return built.status();
  return TightenDomains(*built, rel);
}

std::vector<uint32_t> CompletionVars(const AttributeSchema& schema,
                                     const PartialRecord& partial) {
  const uint64_t base =
      schema.PartialCellIndex(partial) * schema.sensitive_domain_size();
  std::vector<uint32_t> vars(schema.sensitive_domain_size());
  std::iota(vars.begin(), vars.end(), static_cast<uint32_t>(base));
  return vars;
}

// Solves the base problem (plus c_t when asked) and reads a feasible value
// for the target: the completion with x > 0, the largest one without c_t.
struct Found {
  std::optional<Code> value;
  SolveStatus status = SolveStatus::kUnknown;
};

absl::StatusOr<Found> SolverFind(const FeasibilityProblem& base,
                                 const std::vector<uint32_t>& vars,
                                 bool uniqueness, SolveLimits limits,
                                 uint64_t seed) {
  FeasibilityProblem p = base;
  if (uniqueness) {
    auto with = AddSumConstraint(base, vars, 1);
    if (!with.ok()) return with.status();
    p = *std::move(with);
  }
  const SolveResult r = Solve(p, seed, nullptr, limits);
  Found f;
  f.status = r.status;
  if (r.status != SolveStatus::kFeasible) return f;
  int64_t best = 0;
  for (size_t v = 0; v < vars.size(); ++v) {
    if (r.assignment.values[vars[v]] > best) {
      best = r.assignment.values[vars[v]];
      f.value = static_cast<Code>(v);
    }
  }
  return f;
}

// Refutation with the null constraint x_(t, v) = 0.
absl::StatusOr<SolveStatus> Verify(const FeasibilityProblem& base,
                                   const std::vector<uint32_t>& vars,
                                   bool uniqueness, Code v, SolveLimits limits,
                                   uint64_t seed) {
  FeasibilityProblem p = base;
  if (uniqueness) {
    auto with = AddSumConstraint(base, vars, 1);
    if (!with.ok()) return with.status();
    p = *std::move(with);
  }
  auto nulled = RestrictDomain(p, vars[v], 0, 0);
  if (!nulled.ok()) return nulled.status();
  return Solve(*nulled, seed, nullptr, limits).status;
}

// Synthetic finder with the target pinned: row 0 of the soft dataset holds
// the target's non-sensitive values and only its sensitive logits move.
absl::StatusOr<std::optional<Code>> SyntheticPinned(const AttackerView& view,
                                                    const TargetUser& target,
                                                    const RapConfig& rap,
                                                    uint64_t seed) {
  const AttributeSchema& schema = *view.schema;
  const size_t s =
      static_cast<size_t>(std::max<int64_t>(view.release->dataset_size, 1));
  SoftDataset init = SoftDataset::Uniform(view.schema, s);
  Rng rng(seed);
  for (double& l : init.logits) l = rap.init_noise * rng.Normal();
  std::vector<char> frozen(init.logits.size(), 0);
  for (size_t i = 0; i < schema.num_nonsensitive(); ++i) {
    for (int v = 0; v < schema.domain_size(i); ++v) {
      const size_t j = init.offsets[i] + v;
      init.logits[j] = v == target.partial.values[i]
                           ? 0.0
                           : -std::numeric_limits<double>::infinity();
      frozen[j] = 1;
    }
  }
  auto run = RapOptimize(*view.release, std::move(init), rap, seed, frozen);
  if (!run.ok()) return std::optional<Code>();
  const size_t off = run->soft.offsets[schema.sensitive_index()];
  const double* l = run->soft.logits.data() + off;
  return std::optional<Code>(static_cast<Code>(
      std::max_element(l, l + schema.sensitive_domain_size()) - l));
}

std::optional<Code> SyntheticModal(const TargetUser& target,
                                   const ReconstructionSet& recon,
                                   int sensitive_domain_size) {
  const std::vector<Record> hood = LNeighborhood(target.partial, recon, 0);
  if (hood.empty()) return std::nullopt;
  std::vector<size_t> counts(sensitive_domain_size, 0);
  for (const Record& r : hood) ++counts[r.values.back()];
  return static_cast<Code>(std::max_element(counts.begin(), counts.end()) -
                           counts.begin());
}

// Query indices covering each record, plus per-query sensitive membership.
struct CoverIndex {
  std::vector<std::vector<uint32_t>> per_record;
  std::vector<uint8_t> sensitive_member;  // query * |V_n| + z
};

CoverIndex IndexPartials(const Dataset& aux,
                         std::span<const AggregateQuery> queries) {
  const int vn = aux.schema().sensitive_domain_size();
  CoverIndex idx;
  idx.per_record.resize(aux.size());
  idx.sensitive_member.resize(queries.size() * vn);
  for (size_t q = 0; q < queries.size(); ++q) {
    for (int z = 0; z < vn; ++z) {
      idx.sensitive_member[q * vn + z] = queries[q].subsets.back().contains(z);
    }
  }
  for (size_t j = 0; j < aux.size(); ++j) {
    const PartialRecord p = Project(aux.record(j));
    for (size_t q = 0; q < queries.size(); ++q) {
      if (CoversPartial(queries[q], p)) idx.per_record[j].push_back(q);
    }
  }
  return idx;
}

void SplitRows(ShadowBatch& batch, size_t n) {
  const size_t train = 2 * n / 3;
  for (size_t i = 0; i < n; ++i) {
    (i < train ? batch.train_rows : batch.validation_rows)
        .push_back(static_cast<uint32_t>(i));
  }
}

absl::Status CheckShadowArgs(const Dataset& aux, size_t needed, size_t n) {
  if (n < 2) return absl::InvalidArgumentError("need at least 2 shadow datasets");
  if (aux.size() < needed) {
    return absl::InvalidArgumentError(
        absl::StrCat("auxiliary dataset has ", aux.size(),
                     " records, shadow datasets need ", needed));
  }
  return absl::OkStatus();
}

Vote CoinFlip(int domain, uint64_t seed) {
  Rng rng(seed);
  return {static_cast<Code>(rng.UniformInt(domain)), 0.5};
}

}  // namespace

absl::StatusOr<DeterministicOutcome> DeterministicAia(const QueryRelease& rel,
                                                      SchemaPtr schema,
                                                      const TargetUser& target,
                                                      SolveLimits limits,
                                                      uint64_t seed) {
  auto base = BaseProblem(rel, schema);
  if (!base.ok()) return base.status();
  const std::vector<uint32_t> vars = CompletionVars(*schema, target.partial);
  auto found = SolverFind(*base, vars, true, limits, DeriveSeed({seed, 0}));
  if (!found.ok()) return found.status();
  DeterministicOutcome out;
  out.find_status = found->status;
  if (!found->value) return out;
  out.candidate = found->value;
  auto verdict = Verify(*base, vars, true, *found->value, limits,
                        DeriveSeed({seed, 1}));
  if (!verdict.ok()) return verdict.status();
  out.verify_status = *verdict;
  if (*verdict == SolveStatus::kInfeasible) out.value = found->value;
  return out;
}

absl::StatusOr<DeterministicOutcome> DeterministicMia(const QueryRelease& rel,
                                                      SchemaPtr schema,
                                                      const Record& target,
                                                      SolveLimits limits,
                                                      uint64_t seed) {
  auto base = BaseProblem(rel, schema);
  if (!base.ok()) return base.status();
  const uint32_t t = static_cast<uint32_t>(schema->CellIndex(target));
  const SolveResult r = Solve(*base, DeriveSeed({seed, 0}), nullptr, limits);
  DeterministicOutcome out;
  out.find_status = r.status;
  if (r.status != SolveStatus::kFeasible) return out;
  const Code m = r.assignment.values[t] >= 1 ? 1 : 0;
  out.candidate = m;
  // Refute with the opposite membership: x_t = 0, or x_t >= 1.
  auto flipped = m == 1 ? RestrictDomain(*base, t, 0, 0)
                        : RestrictDomain(*base, t, 1, base->upper[t]);
  if (!flipped.ok()) return flipped.status();
  out.verify_status = Solve(*flipped, DeriveSeed({seed, 1}), nullptr, limits).status;
  if (*out.verify_status == SolveStatus::kInfeasible) out.value = m;
  return out;
}

absl::StatusOr<ShadowBatch> SampleShadowDatasetsAia(
    const Dataset& aux, const TargetUser& target,
    std::span<const AggregateQuery> queries, size_t shadow_size, size_t n,
    uint64_t seed) {
  if (shadow_size < 1) return absl::InvalidArgumentError("shadow size must be >= 1");
  if (absl::Status st = CheckShadowArgs(aux, shadow_size - 1, n); !st.ok()) {
    return st;
  }
  const int vn = aux.schema().sensitive_domain_size();
  const CoverIndex idx = IndexPartials(aux, queries);
  std::vector<uint32_t> target_queries;
  for (size_t q = 0; q < queries.size(); ++q) {
    if (CoversPartial(queries[q], target.partial)) target_queries.push_back(q);
  }

  ShadowBatch batch;
  batch.features = FeatureMatrix(n, queries.size());
  batch.labels.resize(n);
  std::vector<uint32_t> scratch(aux.size()), chosen;
  for (size_t i = 0; i < n; ++i) {
    Rng rng(DeriveSeed({seed, i}));
    std::span<double> row = batch.features.row(i);
    const Code label = static_cast<Code>(rng.UniformInt(vn));
    batch.labels[i] = label;
    for (uint32_t q : target_queries) row[q] += idx.sensitive_member[q * vn + label];
    std::iota(scratch.begin(), scratch.end(), 0);
    rng.SampleWithoutReplacement(scratch, shadow_size - 1, chosen);
    for (uint32_t j : chosen) {
      const size_t z = rng.UniformInt(vn);
      for (uint32_t q : idx.per_record[j]) row[q] += idx.sensitive_member[q * vn + z];
    }
  }
  SplitRows(batch, n);
  return batch;
}

absl::StatusOr<ShadowBatch> SampleShadowDatasetsMia(
    const Dataset& aux, const Record& target,
    std::span<const AggregateQuery> queries, size_t shadow_size, size_t n,
    uint64_t seed) {
  if (shadow_size < 1) return absl::InvalidArgumentError("shadow size must be >= 1");
  if (absl::Status st = CheckShadowArgs(aux, shadow_size, n); !st.ok()) {
    return st;
  }
  std::vector<std::vector<uint32_t>> covers(aux.size());
  for (size_t j = 0; j < aux.size(); ++j) {
    for (size_t q = 0; q < queries.size(); ++q) {
      if (Covers(queries[q], aux.record(j))) covers[j].push_back(q);
    }
  }
  std::vector<uint32_t> target_queries;
  for (size_t q = 0; q < queries.size(); ++q) {
    if (Covers(queries[q], target)) target_queries.push_back(q);
  }

  ShadowBatch batch;
  batch.features = FeatureMatrix(n, queries.size());
  batch.labels.resize(n);
  std::vector<uint32_t> scratch(aux.size()), chosen;
  for (size_t i = 0; i < n; ++i) {
    Rng rng(DeriveSeed({seed, i}));
    std::span<double> row = batch.features.row(i);
    const bool member = rng.Bernoulli(0.5);
    batch.labels[i] = member ? 1 : 0;
    if (member) {
      for (uint32_t q : target_queries) row[q] += 1;
    }
    std::iota(scratch.begin(), scratch.end(), 0);
    rng.SampleWithoutReplacement(scratch, shadow_size - (member ? 1 : 0), chosen);
    for (uint32_t j : chosen) {
      for (uint32_t q : covers[j]) row[q] += 1;
    }
  }
  SplitRows(batch, n);
  return batch;
}

absl::StatusOr<MetaClassifier> TrainMetaClassifier(
    const ShadowBatch& batch, std::span<const double> lambda_grid,
    const LogisticOptions& opts) {
  if (lambda_grid.empty()) return absl::InvalidArgumentError("empty lambda grid");
  if (batch.labels.size() != batch.features.rows) {
    return absl::InvalidArgumentError("label count does not match feature rows");
  }
  double chosen = lambda_grid[0];
  if (lambda_grid.size() > 1) {
    const FeatureMatrix train = batch.features.SelectRows(batch.train_rows);
    std::vector<Code> train_labels;
    for (uint32_t r : batch.train_rows) train_labels.push_back(batch.labels[r]);
    const bool has_validation = !batch.validation_rows.empty();
    const FeatureMatrix val = has_validation
                                  ? batch.features.SelectRows(batch.validation_rows)
                                  : train;
    std::vector<Code> val_labels;
    for (uint32_t r : batch.validation_rows) val_labels.push_back(batch.labels[r]);
    if (!has_validation) val_labels = train_labels;

    double best = std::numeric_limits<double>::infinity();
    for (double lambda : lambda_grid) {
      auto model = FitLogisticL2(train, train_labels, lambda, opts);
      if (!model.ok()) return model.status();
      const double loss = LogLoss(*model, val, val_labels);
      if (loss < best || (loss == best && lambda < chosen)) {
        best = loss;
        chosen = lambda;
      }
    }
  }
  return FitLogisticL2(batch.features, batch.labels, chosen, opts);
}

absl::StatusOr<StochasticPrediction> StochasticPredict(
    const MetaClassifier& model, const QueryRelease& rel) {
  if (rel.answers.size() != model.num_features()) {
    return absl::InvalidArgumentError(
        absl::StrCat("model expects ", model.num_features(),
                     " features, release has ", rel.answers.size()));
  }
  std::vector<double> x(rel.answers.begin(), rel.answers.end());
  StochasticPrediction out;
  out.value = model.Predict(x);
  out.score = model.ProbabilityOf(x, 1);
  return out;
}

std::string DesiaMethodName(const DesiaConfig& c) {
  std::vector<std::string> off;
  if (c.finder == FeasibleValueFinder::kSynthetic) off.push_back("finder=synthetic");
  if (!c.uniqueness_constraint) off.push_back("uniqueness=off");
  if (!c.verification) off.push_back("verification=off");
  if (!c.stochastic_module) off.push_back("stochastic=off");
  if (off.empty()) return "desia";
  return absl::StrCat("desia[", absl::StrJoin(off, ","), "]");
}

absl::StatusOr<DesiaSharedState> PrepareDesiaShared(const AttackerView& view,
                                                    const DesiaConfig& config,
                                                    uint64_t seed) {
  DesiaSharedState shared;
  if (config.finder == FeasibleValueFinder::kSynthetic &&
      !config.uniqueness_constraint) {
    auto recon = RapReconstruct(*view.release, view.schema, 1, nullptr,
                                DeriveSeed({seed, 0x73796eULL}), config.rap);
    if (!recon.ok()) return recon.status();
    shared.synthetic = *std::move(recon);
  }
  return shared;
}

absl::StatusOr<AttackResult> DesiaAttack(const AttackerView& view,
                                         const TargetUser& target,
                                         const DesiaConfig& config,
                                         uint64_t seed,
                                         const DesiaSharedState* shared) {
  if (view.release == nullptr || view.schema == nullptr) {
    return absl::InvalidArgumentError("attacker view is incomplete");
  }
  const AttributeSchema& schema = *view.schema;
  const int vn = schema.sensitive_domain_size();
  AttackResult result;
  result.target = target.id;
  result.method = DesiaMethodName(config);

  // Deterministic module: find a feasible value, then try to refute it.
  const bool needs_solver = config.finder == FeasibleValueFinder::kSolver ||
                            config.verification;
  std::optional<FeasibilityProblem> base;
  if (needs_solver) {
    auto b = BaseProblem(*view.release, view.schema);
    if (!b.ok()) return b.status();
    base = *std::move(b);
  }
  const std::vector<uint32_t> vars = CompletionVars(schema, target.partial);

  std::optional<Code> candidate;
  switch (config.finder) {
    case FeasibleValueFinder::kSolver: {
      auto f = SolverFind(*base, vars, config.uniqueness_constraint,
                          config.limits, DeriveSeed({seed, 0}));
      if (!f.ok()) return f.status();
      candidate = f->value;
      break;
    }
    case FeasibleValueFinder::kSynthetic: {
      if (config.uniqueness_constraint) {
        auto f = SyntheticPinned(view, target, config.rap, DeriveSeed({seed, 2}));
        if (!f.ok()) return f.status();
        candidate = *f;
      } else {
        std::optional<DesiaSharedState> local;
        if (shared == nullptr || !shared->synthetic) {
          auto prepared = PrepareDesiaShared(view, config, seed);
          if (!prepared.ok()) return prepared.status();
          local = *std::move(prepared);
          shared = &*local;
        }
        candidate = SyntheticModal(target, *shared->synthetic, vn);
      }
      break;
    }
  }

  if (candidate) {
    bool verified = !config.verification;
    if (config.verification) {
      auto verdict = Verify(*base, vars, config.uniqueness_constraint,
                            *candidate, config.limits, DeriveSeed({seed, 1}));
      if (!verdict.ok()) return verdict.status();
      verified = *verdict == SolveStatus::kInfeasible;
    }
    if (verified) {
      result.prediction = *candidate;
      result.score = *candidate == 1 ? 1.0 : 0.0;
      result.deterministic = true;
      return result;
    }
  }

  // Stochastic module.
  if (!config.stochastic_module || view.aux == nullptr) {
    const Vote v = CoinFlip(vn, DeriveSeed({seed, 3}));
    result.prediction = v.value;
    result.score = v.score;
    return result;
  }
  const size_t s =
      static_cast<size_t>(std::max<int64_t>(view.release->dataset_size, 1));
  auto batch = SampleShadowDatasetsAia(*view.aux, target, view.release->queries,
                                       s, config.num_shadows,
                                       DeriveSeed({seed, 4}));
  if (!batch.ok()) return batch.status();
  auto model = TrainMetaClassifier(*batch, config.lambda_grid, config.logistic);
  if (!model.ok()) return model.status();
  auto pred = StochasticPredict(*model, *view.release);
  if (!pred.ok()) return pred.status();
  result.prediction = pred->value;
  result.score = pred->score;
  return result;
}

absl::StatusOr<AttackResult> DesiaAttackMia(const AttackerView& view,
                                            const Record& target,
                                            const DesiaConfig& config,
                                            uint64_t seed) {
  if (view.release == nullptr || view.schema == nullptr) {
    return absl::InvalidArgumentError("attacker view is incomplete");
  }
  AttackResult result;
  result.method = absl::StrCat(DesiaMethodName(config), "-mia");
  std::vector<std::string> parts;
  for (Code c : target.values) parts.push_back(absl::StrCat(c));
  result.target = absl::StrJoin(parts, "-");

  auto det = DeterministicMia(*view.release, view.schema, target, config.limits,
                              DeriveSeed({seed, 0}));
  if (!det.ok()) return det.status();
  const std::optional<Code> claimed =
      config.verification ? det->value : det->candidate;
  if (claimed) {
    result.prediction = *claimed;
    result.score = *claimed == 1 ? 1.0 : 0.0;
    result.deterministic = true;
    return result;
  }
  if (!config.stochastic_module || view.aux == nullptr) {
    const Vote v = CoinFlip(2, DeriveSeed({seed, 3}));
    result.prediction = v.value;
    result.score = v.score;
    return result;
  }
  const size_t size =
      static_cast<size_t>(std::max<int64_t>(view.release->dataset_size, 1));
  auto batch = SampleShadowDatasetsMia(*view.aux, target, view.release->queries,
                                       size, config.num_shadows,
                                       DeriveSeed({seed, 4}));
  if (!batch.ok()) return batch.status();
  auto model = TrainMetaClassifier(*batch, config.lambda_grid, config.logistic);
  if (!model.ok()) return model.status();
  auto pred = StochasticPredict(*model, *view.release);
  if (!pred.ok()) return pred.status();
  result.prediction = pred->value;
  result.score = pred->score;
  return result;
}

}  // namespace desia
