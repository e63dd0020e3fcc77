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

// Counting aggregate statistics: per-attribute value-subset predicates, their
// evaluation on datasets, query-set builders, and the (optionally noisy)
// release the attacker observes.

#ifndef DESIA_AGGREGATES_H_
#define DESIA_AGGREGATES_H_

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "desia/core_model.h"
#include "json.hpp"

namespace desia {

// Subset V_i^q of one attribute's domain, as sorted unique dense codes.
class ValueSet {
 public:
  ValueSet() = default;
  // `codes` need not be sorted; duplicates are dropped.
  ValueSet(std::vector<Code> codes, int domain_size);
  static ValueSet Full(int domain_size);
  static ValueSet Interval(Code lo, Code hi, int domain_size);

  bool contains(Code v) const {
    if (full_) return true;
    if (interval_) return v >= codes_.front() && v <= codes_.back();
    return std::binary_search(codes_.begin(), codes_.end(), v);
  }
  bool full() const { return full_; }
  bool interval() const { return interval_; }
  bool empty() const { return codes_.empty(); }
  size_t size() const { return codes_.size(); }
  const std::vector<Code>& codes() const { return codes_; }

  friend bool operator==(const ValueSet& a, const ValueSet& b) {
    return a.codes_ == b.codes_;
  }

 private:
  std::vector<Code> codes_;
  bool full_ = false;
  bool interval_ = false;
};

// q = (V_1^q, ..., V_n^q); counts records with r^i in V_i^q for every i.
struct AggregateQuery {
  std::vector<ValueSet> subsets;

  static AggregateQuery Total(const AttributeSchema& schema);

  // True iff V_n^q is a strict subset of V_n.
  bool conditions_sensitive() const { return !subsets.back().full(); }

  friend bool operator==(const AggregateQuery&, const AggregateQuery&) = default;
};

// Checks non-empty subsets within each domain and arity.
absl::Status ValidateQuery(const AggregateQuery& q,
                           const AttributeSchema& schema);

bool Covers(const AggregateQuery& q, const Record& r);
// Conditions on the non-sensitive attributes only.
bool CoversPartial(const AggregateQuery& q, const PartialRecord& p);

int64_t Evaluate(const AggregateQuery& q, const Dataset& d);

// Batch path; identical to calling Evaluate per query.
std::vector<int64_t> EvaluateAll(std::span<const AggregateQuery> queries,
                                 const Dataset& d);

// Per-query membership bitsets over the records of one dataset (the usersets
// U_q).
class QueryMembershipIndex {
 public:
  QueryMembershipIndex(std::span<const AggregateQuery> queries,
                       const Dataset& d);

  size_t num_queries() const { return bits_.size(); }
  size_t num_records() const { return num_records_; }
  bool member(size_t query, size_t record) const {
    return (bits_[query][record / 64] >> (record % 64)) & 1;
  }
  // |U_q|.
  int64_t Count(size_t query) const;
  std::vector<uint32_t> Userset(size_t query) const;

 private:
  size_t num_records_;
  std::vector<std::vector<uint64_t>> bits_;
};

// One query per cell of every k-subset of `attributes` (internal indices;
// empty means every attribute). `bucket_widths` maps an attribute to an
// interval width for bucketization of its dense codes.
absl::StatusOr<std::vector<AggregateQuery>> MakeMarginalQueries(
    const AttributeSchema& schema, std::vector<size_t> attributes, int k,
    const std::map<size_t, int>& bucket_widths = {});

// JSON encoding keyed by attribute name with external codes:
//   {"name": "...", "conditions": {"sex": [1], "age": {"range": [0, 4]}}}
// Attributes missing from "conditions" are unconstrained.
nlohmann::json QueryToJson(const AggregateQuery& q,
                           const AttributeSchema& schema);
absl::StatusOr<AggregateQuery> QueryFromJson(const nlohmann::json& j,
                                             const AttributeSchema& schema);

// Query spec file: {"queries": [ ... ]}.
absl::StatusOr<std::vector<AggregateQuery>> ParseQuerySpec(
    const nlohmann::json& j, const AttributeSchema& schema);
absl::StatusOr<std::vector<AggregateQuery>> LoadQuerySpec(
    const std::string& path, const AttributeSchema& schema);
nlohmann::json QuerySpecToJson(std::span<const AggregateQuery> queries,
                               const AttributeSchema& schema);

// Uniform sample of m queries without replacement.
absl::StatusOr<std::vector<AggregateQuery>> SampleQueries(
    std::span<const AggregateQuery> queries, size_t m, uint64_t seed);

struct NoiseMeta {
  double epsilon = 0;
  uint64_t seed = 0;
};

// Q, Q(D) and |D| as published. Noisy answers may be negative or exceed s.
struct QueryRelease {
  std::vector<AggregateQuery> queries;
  std::vector<int64_t> answers;
  int64_t dataset_size = 0;
  std::optional<NoiseMeta> noise;
};

QueryRelease Release(std::span<const AggregateQuery> queries, const Dataset& d);

// answer_i <- round(q_i(D) + Laplace(1/epsilon)). Sensitivity 1 per query.
absl::StatusOr<QueryRelease> AddLaplaceNoise(const QueryRelease& rel,
                                             double epsilon, uint64_t seed);

// {"schema_hash": "...", "dataset_size": s, "queries": [...],
//  "answers": [...], "noise": {"epsilon": e, "seed": n}?}
nlohmann::json ReleaseToJson(const QueryRelease& rel,
                             const AttributeSchema& schema);
absl::StatusOr<QueryRelease> ReleaseFromJson(const nlohmann::json& j,
                                             const AttributeSchema& schema);

std::string HashHex(uint64_t h);

}  // namespace desia

#endif  // DESIA_AGGREGATES_H_
