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

#include "desia/aggregates.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "absl/strings/str_cat.h"
#include "desia/random.h"

namespace desia {

ValueSet::ValueSet(std::vector<Code> codes, int domain_size)
    : codes_(std::move(codes)) {
  std::sort(codes_.begin(), codes_.end());
  codes_.erase(std::unique(codes_.begin(), codes_.end()), codes_.end());
  if (!codes_.empty()) {
    interval_ = codes_.back() - codes_.front() + 1 ==
                static_cast<Code>(codes_.size());
    full_ = interval_ && codes_.front() == 0 &&
            static_cast<int>(codes_.size()) == domain_size;
  }
}

ValueSet ValueSet::Full(int domain_size) {
  std::vector<Code> all(domain_size);
  std::iota(all.begin(), all.end(), 0);
  return ValueSet(std::move(all), domain_size);
}

ValueSet ValueSet::Interval(Code lo, Code hi, int domain_size) {
  std::vector<Code> v;
  for (Code c = lo; c <= hi; ++c) v.push_back(c);
  return ValueSet(std::move(v), domain_size);
}

AggregateQuery AggregateQuery::Total(const AttributeSchema& schema) {
  AggregateQuery q;
  for (size_t i = 0; i < schema.num_attributes(); ++i) {
    q.subsets.push_back(ValueSet::Full(schema.domain_size(i)));
  }
  return q;
}

absl::Status ValidateQuery(const AggregateQuery& q,
                           const AttributeSchema& schema) {
  if (q.subsets.size() != schema.num_attributes()) {
    return absl::InvalidArgumentError(
        absl::StrCat("query has ", q.subsets.size(), " subsets, schema has ",
                     schema.num_attributes(), " attributes"));
  }
  for (size_t i = 0; i < q.subsets.size(); ++i) {
    const ValueSet& vs = q.subsets[i];
    if (vs.empty()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "empty value set for attribute '", schema.attribute(i).name, "'"));
    }
    if (vs.codes().front() < 0 || vs.codes().back() >= schema.domain_size(i)) {
      return absl::InvalidArgumentError(
          absl::StrCat("value set outside the domain of '",
                       schema.attribute(i).name, "'"));
    }
  }
  return absl::OkStatus();
}

bool Covers(const AggregateQuery& q, const Record& r) {
  for (size_t i = 0; i < q.subsets.size(); ++i) {
    if (!q.subsets[i].contains(r.values[i])) return false;
  }
  return true;
}

bool CoversPartial(const AggregateQuery& q, const PartialRecord& p) {
  for (size_t i = 0; i < p.values.size(); ++i) {
    if (!q.subsets[i].contains(p.values[i])) return false;
  }
  return true;
}

int64_t Evaluate(const AggregateQuery& q, const Dataset& d) {
  int64_t count = 0;
  for (const Record& r : d.records()) count += Covers(q, r) ? 1 : 0;
  return count;
}

std::vector<int64_t> EvaluateAll(std::span<const AggregateQuery> queries,
                                 const Dataset& d) {
  std::vector<int64_t> out(queries.size(), 0);
  if (queries.empty() || d.empty()) return out;
  const AttributeSchema& sc = d.schema();
  const size_t n = sc.num_attributes();
  // Aggregate records into occupied cells first; each query then only looks
  // at distinct records.
  std::vector<std::pair<const Record*, int64_t>> cells;
  {
    std::vector<Record> sorted(d.records().begin(), d.records().end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<Record> uniq;
    std::vector<int64_t> mult;
    for (Record& r : sorted) {
      if (!uniq.empty() && uniq.back() == r) {
        ++mult.back();
      } else {
        uniq.push_back(std::move(r));
        mult.push_back(1);
      }
    }
    // Lookup tables: per attribute, per query, membership of each code.
    std::vector<std::vector<uint8_t>> member(n);
    for (size_t i = 0; i < n; ++i) {
      const int dom = sc.domain_size(i);
      member[i].assign(queries.size() * dom, 0);
      for (size_t k = 0; k < queries.size(); ++k) {
        for (Code c : queries[k].subsets[i].codes()) member[i][k * dom + c] = 1;
      }
    }
    for (size_t k = 0; k < queries.size(); ++k) {
      int64_t total = 0;
      for (size_t u = 0; u < uniq.size(); ++u) {
        bool in = true;
        for (size_t i = 0; i < n && in; ++i) {
          in = member[i][k * sc.domain_size(i) + uniq[u].values[i]] != 0;
        }
        if (in) total += mult[u];
      }
      out[k] = total;
    }
  }
  return out;
}

QueryMembershipIndex::QueryMembershipIndex(
    std::span<const AggregateQuery> queries, const Dataset& d)
    : num_records_(d.size()) {
  const size_t words = (num_records_ + 63) / 64;
  bits_.assign(queries.size(), std::vector<uint64_t>(words, 0));
  for (size_t k = 0; k < queries.size(); ++k) {
    for (size_t r = 0; r < num_records_; ++r) {
      if (Covers(queries[k], d.record(r))) {
        bits_[k][r / 64] |= uint64_t{1} << (r % 64);
      }
    }
  }
}

int64_t QueryMembershipIndex::Count(size_t query) const {
  int64_t c = 0;
  for (uint64_t w : bits_[query]) c += std::popcount(w);
  return c;
}

std::vector<uint32_t> QueryMembershipIndex::Userset(size_t query) const {
  std::vector<uint32_t> out;
  for (size_t r = 0; r < num_records_; ++r) {
    if (member(query, r)) out.push_back(static_cast<uint32_t>(r));
  }
  return out;
}

absl::StatusOr<std::vector<AggregateQuery>> MakeMarginalQueries(
    const AttributeSchema& schema, std::vector<size_t> attributes, int k,
    const std::map<size_t, int>& bucket_widths) {
  if (attributes.empty()) {
    attributes.resize(schema.num_attributes());
    std::iota(attributes.begin(), attributes.end(), 0);
  }
  for (size_t a : attributes) {
    if (a >= schema.num_attributes()) {
      return absl::InvalidArgumentError(
          absl::StrCat("attribute index ", a, " out of range"));
    }
  }
  if (k < 1 || static_cast<size_t>(k) > attributes.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "marginal way k=", k, " must be in [1, ", attributes.size(), "]"));
  }
  for (const auto& [attr, width] : bucket_widths) {
    if (width < 1) {
      return absl::InvalidArgumentError(
          absl::StrCat("bucket width for attribute ", attr, " must be >= 1"));
    }
  }
  // Cells of each attribute: singletons or code intervals.
  auto cells_of = [&](size_t attr) {
    const int dom = schema.domain_size(attr);
    int width = 1;
    if (auto it = bucket_widths.find(attr); it != bucket_widths.end()) {
      width = it->second;
    }
    std::vector<ValueSet> cells;
    for (int lo = 0; lo < dom; lo += width) {
      cells.push_back(ValueSet::Interval(lo, std::min(dom, lo + width) - 1, dom));
    }
    return cells;
  };

  std::vector<AggregateQuery> out;
  const AggregateQuery total = AggregateQuery::Total(schema);
  std::vector<size_t> combo(k);
  std::iota(combo.begin(), combo.end(), 0);
  while (true) {
    std::vector<std::vector<ValueSet>> cells;
    for (size_t c : combo) cells.push_back(cells_of(attributes[c]));
    std::vector<size_t> pos(k, 0);
    while (true) {
      AggregateQuery q = total;
      for (int t = 0; t < k; ++t) q.subsets[attributes[combo[t]]] = cells[t][pos[t]];
      out.push_back(std::move(q));
      int t = k - 1;
      while (t >= 0 && ++pos[t] == cells[t].size()) pos[t--] = 0;
      if (t < 0) break;
    }
    // Next k-combination in lexicographic order.
    int i = k - 1;
    while (i >= 0 && combo[i] == attributes.size() - k + i) --i;
    if (i < 0) break;
    ++combo[i];
    for (int j = i + 1; j < k; ++j) combo[j] = combo[j - 1] + 1;
  }
  return out;
}

nlohmann::json QueryToJson(const AggregateQuery& q,
                           const AttributeSchema& schema) {
  nlohmann::json cond = nlohmann::json::object();
  for (size_t i = 0; i < q.subsets.size(); ++i) {
    const ValueSet& vs = q.subsets[i];
    if (vs.full()) continue;
    const std::string& name = schema.attribute(i).name;
    std::vector<int64_t> ext;
    for (Code c : vs.codes()) ext.push_back(schema.IndexToCode(i, c));
    // Emit a range only when it reads back to exactly the same subset.
    bool as_range = vs.interval() && vs.size() > 2;
    if (as_range) {
      const int64_t lo = ext.front(), hi = ext.back();
      size_t inside = 0;
      for (int64_t c : schema.attribute(i).codes) inside += (c >= lo && c <= hi);
      as_range = inside == vs.size() && std::is_sorted(ext.begin(), ext.end());
    }
    if (as_range) {
      cond[name] = {{"range", {ext.front(), ext.back()}}};
    } else {
      cond[name] = ext;
    }
  }
  return {{"conditions", std::move(cond)}};
}

absl::StatusOr<AggregateQuery> QueryFromJson(const nlohmann::json& j,
                                             const AttributeSchema& schema) {
  AggregateQuery q = AggregateQuery::Total(schema);
  const std::string label = j.is_object() && j.contains("name")
                                ? j["name"].dump()
                                : std::string("(unnamed)");
  if (!j.is_object() || !j.contains("conditions") ||
      !j["conditions"].is_object()) {
    return absl::InvalidArgumentError(
        absl::StrCat("query ", label, ": missing 'conditions' object"));
  }
  try {
    for (const auto& [name, val] : j["conditions"].items()) {
      std::optional<size_t> attr = schema.IndexOf(name);
      if (!attr.has_value()) {
        return absl::InvalidArgumentError(
            absl::StrCat("query ", label, ": unknown attribute '", name, "'"));
      }
      const int dom = schema.domain_size(*attr);
      std::vector<Code> codes;
      if (val.is_object() && val.contains("range")) {
        auto r = val["range"].get<std::vector<int64_t>>();
        if (r.size() != 2 || r[0] > r[1]) {
          return absl::InvalidArgumentError(absl::StrCat(
              "query ", label, ": bad range for '", name, "'"));
        }
        for (Code c = 0; c < dom; ++c) {
          const int64_t ext = schema.IndexToCode(*attr, c);
          if (ext >= r[0] && ext <= r[1]) codes.push_back(c);
        }
        if (!schema.CodeToIndex(*attr, r[0]) ||
            !schema.CodeToIndex(*attr, r[1])) {
          return absl::InvalidArgumentError(absl::StrCat(
              "query ", label, ": range endpoint outside the domain of '",
              name, "'"));
        }
      } else {
        for (int64_t ext : val.get<std::vector<int64_t>>()) {
          std::optional<Code> c = schema.CodeToIndex(*attr, ext);
          if (!c.has_value()) {
            return absl::InvalidArgumentError(
                absl::StrCat("query ", label, ": value ", ext,
                             " outside the domain of '", name, "'"));
          }
          codes.push_back(*c);
        }
      }
      if (codes.empty()) {
        return absl::InvalidArgumentError(absl::StrCat(
            "query ", label, ": empty value set for '", name, "'"));
      }
      q.subsets[*attr] = ValueSet(std::move(codes), dom);
    }
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("query ", label, ": ", e.what()));
  }
  return q;
}

absl::StatusOr<std::vector<AggregateQuery>> ParseQuerySpec(
    const nlohmann::json& j, const AttributeSchema& schema) {
  if (!j.is_object() || !j.contains("queries") || !j["queries"].is_array()) {
    return absl::InvalidArgumentError("query spec needs a 'queries' array");
  }
  std::vector<AggregateQuery> out;
  size_t idx = 0;
  for (const auto& jq : j["queries"]) {
    auto q = QueryFromJson(jq, schema);
    if (!q.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat("query #", idx, ": ", q.status().message()));
    }
    out.push_back(*std::move(q));
    ++idx;
  }
  return out;
}

absl::StatusOr<std::vector<AggregateQuery>> LoadQuerySpec(
    const std::string& path, const AttributeSchema& schema) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat(path, ": invalid JSON: ", e.what()));
  }
  auto qs = ParseQuerySpec(j, schema);
  if (!qs.ok()) {
    return absl::InvalidArgumentError(
        absl::StrCat(path, ": ", qs.status().message()));
  }
  return qs;
}

nlohmann::json QuerySpecToJson(std::span<const AggregateQuery> queries,
                               const AttributeSchema& schema) {
  nlohmann::json arr = nlohmann::json::array();
  for (const AggregateQuery& q : queries) arr.push_back(QueryToJson(q, schema));
  return {{"queries", std::move(arr)}};
}

absl::StatusOr<std::vector<AggregateQuery>> SampleQueries(
    std::span<const AggregateQuery> queries, size_t m, uint64_t seed) {
  if (m > queries.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "cannot sample ", m, " queries from a pool of ", queries.size()));
  }
  std::vector<uint32_t> idx(queries.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<uint32_t> chosen;
  Rng rng(seed);
  rng.SampleWithoutReplacement(idx, m, chosen);
  std::vector<AggregateQuery> out;
  out.reserve(m);
  for (uint32_t i : chosen) out.push_back(queries[i]);
  return out;
}

QueryRelease Release(std::span<const AggregateQuery> queries, const Dataset& d) {
  QueryRelease rel;
  rel.queries.assign(queries.begin(), queries.end());
  rel.answers = EvaluateAll(queries, d);
  rel.dataset_size = static_cast<int64_t>(d.size());
  return rel;
}

absl::StatusOr<QueryRelease> AddLaplaceNoise(const QueryRelease& rel,
                                             double epsilon, uint64_t seed) {
  if (!(epsilon > 0) || std::isnan(epsilon)) {
    return absl::InvalidArgumentError("epsilon must be > 0");
  }
  if (rel.noise.has_value()) {
    return absl::FailedPreconditionError("release is already noisy");
  }
  QueryRelease out = rel;
  Rng rng(seed);
  const double scale = 1.0 / epsilon;
  for (int64_t& a : out.answers) {
    a = std::llround(static_cast<double>(a) + rng.Laplace(scale));
  }
  out.noise = NoiseMeta{epsilon, seed};
  return out;
}

std::string HashHex(uint64_t h) {
  static const char* kDigits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) s[i] = kDigits[h & 0xf];
  return s;
}

nlohmann::json ReleaseToJson(const QueryRelease& rel,
                             const AttributeSchema& schema) {
  nlohmann::json j;
  j["schema_hash"] = HashHex(schema.Hash());
  j["dataset_size"] = rel.dataset_size;
  j["queries"] = QuerySpecToJson(rel.queries, schema)["queries"];
  j["answers"] = rel.answers;
  if (rel.noise.has_value()) {
    j["noise"] = {{"epsilon", rel.noise->epsilon}, {"seed", rel.noise->seed}};
  }
  return j;
}

absl::StatusOr<QueryRelease> ReleaseFromJson(const nlohmann::json& j,
                                             const AttributeSchema& schema) {
  QueryRelease rel;
  try {
    if (j.contains("schema_hash") &&
        j["schema_hash"].get<std::string>() != HashHex(schema.Hash())) {
      return absl::FailedPreconditionError(
          "release was produced under a different schema");
    }
    rel.dataset_size = j.at("dataset_size").get<int64_t>();
    auto qs = ParseQuerySpec({{"queries", j.at("queries")}}, schema);
    if (!qs.ok()) return qs.status();
    rel.queries = *std::move(qs);
    rel.answers = j.at("answers").get<std::vector<int64_t>>();
    if (j.contains("noise") && !j["noise"].is_null()) {
      rel.noise = NoiseMeta{j["noise"].at("epsilon").get<double>(),
                            j["noise"].at("seed").get<uint64_t>()};
    }
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed release JSON: ", e.what()));
  }
  if (rel.answers.size() != rel.queries.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "release has ", rel.queries.size(), " queries but ", rel.answers.size(),
        " answers"));
  }
  if (rel.dataset_size < 0) {
    return absl::InvalidArgumentError("negative dataset_size");
  }
  if (!rel.noise.has_value()) {
    for (int64_t a : rel.answers) {
      if (a < 0 || a > rel.dataset_size) {
        return absl::InvalidArgumentError(
            "exact release has an answer outside [0, dataset_size]");
      }
    }
  }
  return rel;
}

}  // namespace desia
