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

#include "desia/solver.h"

#include <algorithm>
#include <chrono>
#include <numeric>

#include "absl/strings/str_cat.h"
#include "desia/random.h"

namespace desia {

FeasibilityProblem FeasibilityProblem::WithVariables(size_t n,
                                                     int64_t upper_bound) {
  FeasibilityProblem p;
  p.dataset_size = upper_bound;
  p.lower.assign(n, 0);
  p.upper.assign(n, upper_bound);
  return p;
}

bool FeasibilityProblem::IsSatisfiedBy(const Assignment& a) const {
  if (a.values.size() != num_variables()) return false;
  for (size_t v = 0; v < a.values.size(); ++v) {
    if (a.values[v] < lower[v] || a.values[v] > upper[v]) return false;
  }
  for (const SumConstraint& c : constraints) {
    int64_t sum = 0;
    for (uint32_t v : c.vars) sum += a.values[v];
    if (sum != c.target) return false;
  }
  return true;
}

std::vector<uint32_t> CoveredCells(const AggregateQuery& q,
                                   const AttributeSchema& schema) {
  const size_t n = schema.num_attributes();
  std::vector<uint32_t> out;
  std::vector<size_t> pos(n, 0);
  // Odometer over the per-attribute subsets, last attribute fastest, which
  // yields ascending cell indices.
  while (true) {
    uint64_t cell = 0;
    for (size_t i = 0; i < n; ++i) {
      cell = cell * schema.domain_size(i) + q.subsets[i].codes()[pos[i]];
    }
    out.push_back(static_cast<uint32_t>(cell));
    size_t i = n;
    while (i > 0) {
      --i;
      if (++pos[i] < q.subsets[i].size()) break;
      pos[i] = 0;
      if (i == 0) return out;
    }
  }
}

absl::StatusOr<FeasibilityProblem> BuildProblem(const QueryRelease& rel,
                                                SchemaPtr schema,
                                                uint64_t variable_cap) {
  const AttributeSchema& sc = *schema;
  if (sc.num_cells() > variable_cap) {
    return absl::ResourceExhaustedError(
        absl::StrCat("domain product of ", sc.num_cells(),
                     " potential records exceeds the solver cap of ",
                     variable_cap));
  }
  if (rel.answers.size() != rel.queries.size()) {
    return absl::InvalidArgumentError("release answers/queries mismatch");
  }
  FeasibilityProblem p;
  p.schema = schema;
  p.dataset_size = std::max<int64_t>(rel.dataset_size, 0);
  p.lower.assign(sc.num_cells(), 0);
  p.upper.assign(sc.num_cells(), p.dataset_size);
  for (size_t k = 0; k < rel.queries.size(); ++k) {
    if (absl::Status st = ValidateQuery(rel.queries[k], sc); !st.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat("query ", k, ": ", st.message()));
    }
    SumConstraint c;
    c.vars = CoveredCells(rel.queries[k], sc);
    c.target = rel.answers[k];
    if (c.target < 0) {
      p.warnings.push_back(absl::StrCat("query ", k, ": negative answer ",
                                        c.target, " clamped to 0"));
      c.target = 0;
    }
    p.constraints.push_back(std::move(c));
  }
  p.num_query_constraints = rel.queries.size();
  SumConstraint size;
  size.vars.resize(sc.num_cells());
  std::iota(size.vars.begin(), size.vars.end(), 0);
  size.target = p.dataset_size;
  p.constraints.push_back(std::move(size));
  return p;
}

FeasibilityProblem TightenDomains(const FeasibilityProblem& p,
                                  const QueryRelease& rel) {
  FeasibilityProblem out = p;
  for (int64_t& u : out.upper) u = std::min(u, out.dataset_size);
  const size_t m = std::min(rel.answers.size(), p.num_query_constraints);
  for (size_t k = 0; k < m; ++k) {
    const int64_t bound = std::max<int64_t>(rel.answers[k], 0);
    for (uint32_t v : out.constraints[k].vars) {
      out.upper[v] = std::min(out.upper[v], bound);
    }
  }
  return out;
}

absl::StatusOr<FeasibilityProblem> AddSumConstraint(const FeasibilityProblem& p,
                                                    std::vector<uint32_t> vars,
                                                    int64_t target) {
  for (uint32_t v : vars) {
    if (v >= p.num_variables()) {
      return absl::OutOfRangeError(absl::StrCat("variable ", v, " out of range"));
    }
  }
  FeasibilityProblem out = p;
  out.constraints.push_back({std::move(vars), target});
  return out;
}

absl::StatusOr<FeasibilityProblem> FixVariable(const FeasibilityProblem& p,
                                               uint32_t var, int64_t value) {
  if (var >= p.num_variables()) {
    return absl::OutOfRangeError(absl::StrCat("variable ", var, " out of range"));
  }
  if (value < p.lower[var] || value > p.upper[var]) {
    return absl::InvalidArgumentError(
        absl::StrCat("value ", value, " outside the domain [", p.lower[var],
                     ", ", p.upper[var], "] of variable ", var));
  }
  FeasibilityProblem out = p;
  out.lower[var] = out.upper[var] = value;
  return out;
}

absl::StatusOr<FeasibilityProblem> RestrictDomain(const FeasibilityProblem& p,
                                                  uint32_t var, int64_t lo,
                                                  int64_t hi) {
  if (var >= p.num_variables()) {
    return absl::OutOfRangeError(absl::StrCat("variable ", var, " out of range"));
  }
  FeasibilityProblem out = p;
  out.lower[var] = std::max(out.lower[var], lo);
  out.upper[var] = std::min(out.upper[var], hi);
  return out;
}

std::string_view SolveStatusName(SolveStatus s) {
  switch (s) {
    case SolveStatus::kFeasible:
      return "feasible";
    case SolveStatus::kInfeasible:
      return "infeasible";
    case SolveStatus::kUnknown:
      return "unknown";
  }
  return "?";
}

namespace {

class Search {
 public:
  Search(const FeasibilityProblem& p, uint64_t seed, const Assignment* hint,
         SolveLimits limits, bool shuffle_constraints)
      : lo_(p.lower),
        hi_(p.upper),
        hint_(hint != nullptr && hint->values.size() == p.num_variables()
                  ? hint
                  : nullptr),
        limits_(limits),
        rng_(seed) {
    const size_t nv = p.num_variables();
    std::vector<size_t> order(p.constraints.size());
    std::iota(order.begin(), order.end(), 0);
    if (shuffle_constraints) rng_.Shuffle(order);
    for (size_t idx : order) {
      cvars_.push_back(p.constraints[idx].vars);
      target_.push_back(p.constraints[idx].target);
    }
    const size_t nc = cvars_.size();
    // var -> constraints (CSR).
    std::vector<uint32_t> deg(nv + 1, 0);
    for (const auto& vars : cvars_) {
      for (uint32_t v : vars) ++deg[v + 1];
    }
    std::partial_sum(deg.begin(), deg.end(), deg.begin());
    var_start_ = deg;
    var_cons_.resize(deg[nv]);
    std::vector<uint32_t> fill(deg.begin(), deg.end() - 1);
    for (uint32_t c = 0; c < nc; ++c) {
      for (uint32_t v : cvars_[c]) var_cons_[fill[v]++] = c;
    }
    sum_lo_.assign(nc, 0);
    sum_hi_.assign(nc, 0);
    for (size_t c = 0; c < nc; ++c) {
      for (uint32_t v : cvars_[c]) {
        sum_lo_[c] += lo_[v];
        sum_hi_[c] += hi_[v];
      }
    }
    queued_.assign(nc, 0);
    weight_.assign(nv, 0);
    priority_.resize(nv);
    std::iota(priority_.begin(), priority_.end(), 0);
    rng_.Shuffle(priority_);
  }

  SolveResult Run() {
    start_ = std::chrono::steady_clock::now();
    SolveResult result;
    bool ok = true;
    for (size_t v = 0; v < lo_.size() && ok; ++v) ok = lo_[v] <= hi_[v];
    if (ok) {
      for (uint32_t c = 0; c < cvars_.size(); ++c) Enqueue(c);
      ok = Propagate();
    }
    if (ok) {
      // Restarts with growing node cutoffs; conflict weights carry over.
      const size_t root = trail_.size();
      uint64_t cutoff = 256;
      while (true) {
        cutoff_at_ = nodes_ + cutoff;
        cut_ = false;
        ok = Dfs();
        if (ok || aborted_ || !cut_) break;
        Undo(root);
        cutoff += cutoff / 2;
      }
    }
    result.nodes = nodes_;
    if (ok) {
      result.status = SolveStatus::kFeasible;
      result.assignment.values = lo_;
    } else {
      result.status = aborted_ ? SolveStatus::kUnknown : SolveStatus::kInfeasible;
    }
    return result;
  }

 private:
  struct TrailEntry {
    uint32_t var;
    int64_t lo;
    int64_t hi;
  };

  void Enqueue(uint32_t c) {
    if (!queued_[c]) {
      queued_[c] = 1;
      queue_.push_back(c);
    }
  }

  void ClearQueue() {
    for (size_t i = head_; i < queue_.size(); ++i) queued_[queue_[i]] = 0;
    queue_.clear();
    head_ = 0;
  }

  // Narrows var to [lo, hi] (already intersected by the caller).
  bool SetBounds(uint32_t v, int64_t lo, int64_t hi) {
    if (lo > hi) return false;
    trail_.push_back({v, lo_[v], hi_[v]});
    const int64_t dlo = lo - lo_[v];
    const int64_t dhi = hi - hi_[v];
    lo_[v] = lo;
    hi_[v] = hi;
    for (uint32_t k = var_start_[v]; k < var_start_[v + 1]; ++k) {
      const uint32_t c = var_cons_[k];
      sum_lo_[c] += dlo;
      sum_hi_[c] += dhi;
      Enqueue(c);
    }
    return true;
  }

  bool Propagate() {
    while (head_ < queue_.size()) {
      const uint32_t c = queue_[head_++];
      queued_[c] = 0;
      const int64_t t = target_[c];
      if (t < sum_lo_[c] || t > sum_hi_[c]) {
        Bump(c);
        ClearQueue();
        return false;
      }
      // Nothing can move unless some variable is wider than the slack on
      // either side.
      const int64_t slack = std::min(t - sum_lo_[c], sum_hi_[c] - t);
      for (uint32_t v : cvars_[c]) {
        const int64_t lo = lo_[v], hi = hi_[v];
        if (hi - lo <= slack) continue;
        const int64_t nhi = std::min(hi, t - (sum_lo_[c] - lo));
        const int64_t nlo = std::max(lo, t - (sum_hi_[c] - hi));
        if (nhi != hi || nlo != lo) {
          if (!SetBounds(v, nlo, nhi)) {
            Bump(c);
            ClearQueue();
            return false;
          }
        }
      }
      if (t < sum_lo_[c] || t > sum_hi_[c]) {
        Bump(c);
        ClearQueue();
        return false;
      }
      if (head_ > 4096 && head_ * 2 > queue_.size()) {
        queue_.erase(queue_.begin(), queue_.begin() + head_);
        head_ = 0;
      }
    }
    queue_.clear();
    head_ = 0;
    return true;
  }

  void Undo(size_t mark) {
    while (trail_.size() > mark) {
      const TrailEntry e = trail_.back();
      trail_.pop_back();
      const int64_t dlo = e.lo - lo_[e.var];
      const int64_t dhi = e.hi - hi_[e.var];
      lo_[e.var] = e.lo;
      hi_[e.var] = e.hi;
      for (uint32_t k = var_start_[e.var]; k < var_start_[e.var + 1]; ++k) {
        const uint32_t c = var_cons_[k];
        sum_lo_[c] += dlo;
        sum_hi_[c] += dhi;
      }
    }
  }

  // Conflict weight of a failing constraint, credited to its variables.
  void Bump(uint32_t c) {
    for (uint32_t v : cvars_[c]) ++weight_[v];
  }

  bool LimitHit() {
    if (++nodes_ > limits_.max_nodes) return aborted_ = true;
    if (nodes_ > cutoff_at_) return cut_ = true;
    if (limits_.max_seconds > 0 && (nodes_ & 255) == 0) {
      const std::chrono::duration<double> el =
          std::chrono::steady_clock::now() - start_;
      if (el.count() > limits_.max_seconds) return aborted_ = true;
    }
    return false;
  }

  bool Dfs() {
    // Smallest open domain; ties go to the variable with the most past
    // conflicts, then to the seeded random priority.
    uint32_t best = UINT32_MAX;
    int64_t best_w = INT64_MAX;
    for (uint32_t v = 0; v < lo_.size(); ++v) {
      const int64_t w = hi_[v] - lo_[v];
      if (w <= 0 || w > best_w) continue;
      if (w < best_w || weight_[v] > weight_[best] ||
          (weight_[v] == weight_[best] && priority_[v] < priority_[best])) {
        best = v;
        best_w = w;
      }
    }
    if (best == UINT32_MAX) return true;

    const int64_t lo = lo_[best], hi = hi_[best];
    std::vector<int64_t> values;
    values.reserve(static_cast<size_t>(std::min<int64_t>(hi - lo + 1, 1 << 16)));
    std::optional<int64_t> hinted;
    if (hint_ != nullptr) {
      const int64_t h = hint_->values[best];
      if (h >= lo && h <= hi) hinted = h;
    }
    if (hi - lo + 1 <= 64) {
      for (int64_t x = lo; x <= hi; ++x) {
        if (x != hinted) values.push_back(x);
      }
      rng_.Shuffle(values);
    } else {
      const int64_t width = hi - lo + 1;
      const int64_t start = lo + static_cast<int64_t>(rng_.UniformInt(width));
      for (int64_t k = 0; k < width; ++k) {
        const int64_t x = lo + (start - lo + k) % width;
        if (x != hinted) values.push_back(x);
      }
    }
    if (hinted.has_value()) values.insert(values.begin(), *hinted);

    for (int64_t x : values) {
      if (LimitHit()) return false;
      const size_t mark = trail_.size();
      if (SetBounds(best, x, x) && Propagate()) {
        if (Dfs()) return true;
        if (aborted_ || cut_) return false;
      } else {
        ClearQueue();
      }
      Undo(mark);
    }
    return false;
  }

  std::vector<int64_t> lo_, hi_;
  std::vector<std::vector<uint32_t>> cvars_;
  std::vector<int64_t> target_;
  std::vector<int64_t> sum_lo_, sum_hi_;
  std::vector<uint32_t> var_start_, var_cons_;
  std::vector<uint32_t> queue_;
  size_t head_ = 0;
  std::vector<char> queued_;
  std::vector<TrailEntry> trail_;
  std::vector<uint32_t> priority_;
  const Assignment* hint_;
  SolveLimits limits_;
  Rng rng_;
  std::vector<uint64_t> weight_;
  uint64_t nodes_ = 0;
  uint64_t cutoff_at_ = UINT64_MAX;
  bool aborted_ = false;
  bool cut_ = false;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

SolveResult Solve(const FeasibilityProblem& p, uint64_t seed,
                  const Assignment* hint, SolveLimits limits,
                  bool shuffle_constraints) {
  Search search(p, seed, hint, limits, shuffle_constraints);
  return search.Run();
}

Enumeration EnumerateSolutions(const FeasibilityProblem& p, size_t k,
                               uint64_t seed, const Assignment* hint,
                               SolveLimits limits) {
  Enumeration out;
  for (size_t i = 0; i < k; ++i) {
    SolveResult r = Solve(p, DeriveSeed({seed, i}), hint, limits,
                          /*shuffle_constraints=*/true);
    if (r.status == SolveStatus::kFeasible) {
      out.solutions.push_back(std::move(r.assignment));
    } else if (r.status == SolveStatus::kInfeasible) {
      ++out.infeasible;
      break;
    } else {
      ++out.unknown;
    }
  }
  return out;
}

Dataset AssignmentToDataset(const Assignment& a, SchemaPtr schema) {
  std::vector<Record> records;
  for (size_t cell = 0; cell < a.values.size(); ++cell) {
    if (a.values[cell] <= 0) continue;
    Record r = schema->CellRecord(cell);
    for (int64_t k = 0; k < a.values[cell]; ++k) records.push_back(r);
  }
  return Dataset(std::move(schema), std::move(records));
}

Assignment DatasetToAssignment(const Dataset& d) {
  Assignment a;
  for (uint32_t c : d.CellCounts()) a.values.push_back(c);
  return a;
}

}  // namespace desia
