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

// Finite-domain tabular data: schemas, records, datasets, synthetic
// generation, and the attacker-side target selection.

#ifndef DESIA_CORE_MODEL_H_
#define DESIA_CORE_MODEL_H_

#include <compare>
#include <cstdint>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "json.hpp"

namespace desia {

// Value of one attribute as a dense code in [0, |V_i|).
using Code = int32_t;

struct Record {
  std::vector<Code> values;

  friend auto operator<=>(const Record&, const Record&) = default;
};

// A record restricted to the non-sensitive attributes.
struct PartialRecord {
  std::vector<Code> values;

  friend auto operator<=>(const PartialRecord&, const PartialRecord&) = default;
};

struct Attribute {
  std::string name;
  // External codes as they appear in files; the dense code of a value is its
  // position in this list.
  std::vector<int64_t> codes;
  // Optional human-readable labels, parallel to `codes`.
  std::vector<std::string> labels;
};

// Ordered attributes with finite domains. Internally the sensitive attribute
// is always the last one; `file_order()` maps file columns back to internal
// positions so files keep whatever column order the user supplied.
class AttributeSchema {
 public:
  static constexpr uint64_t kDefaultCellCap = 1'000'000;

  // `attributes` are in file order and `sensitive_index` refers to that
  // order. Fails on empty or duplicate domains, duplicate names, fewer than
  // two attributes, or a domain product above `cell_cap`.
  static absl::StatusOr<std::shared_ptr<const AttributeSchema>> Create(
      std::vector<Attribute> attributes, size_t sensitive_index,
      uint64_t cell_cap = kDefaultCellCap);

  // {"attributes": [{"name": .., "domain": [codes] | "range": [lo, hi],
  //                  "labels": [..]?, "sensitive": bool?}, ...]}
  static absl::StatusOr<std::shared_ptr<const AttributeSchema>> FromJson(
      const nlohmann::json& j, uint64_t cell_cap = kDefaultCellCap);
  static absl::StatusOr<std::shared_ptr<const AttributeSchema>> LoadJson(
      const std::string& path, uint64_t cell_cap = kDefaultCellCap);
  nlohmann::json ToJson() const;

  size_t num_attributes() const { return attributes_.size(); }
  size_t num_nonsensitive() const { return attributes_.size() - 1; }
  size_t sensitive_index() const { return attributes_.size() - 1; }

  // Internal order.
  const Attribute& attribute(size_t i) const { return attributes_[i]; }
  int domain_size(size_t i) const {
    return static_cast<int>(attributes_[i].codes.size());
  }
  int sensitive_domain_size() const { return domain_size(sensitive_index()); }

  // |V_1| * ... * |V_n| and the same product without the sensitive domain.
  uint64_t num_cells() const { return num_cells_; }
  uint64_t num_partial_cells() const {
    return num_cells_ / static_cast<uint64_t>(sensitive_domain_size());
  }

  // file column j holds internal attribute file_order()[j].
  const std::vector<size_t>& file_order() const { return file_order_; }

  std::optional<size_t> IndexOf(std::string_view name) const;
  std::optional<Code> CodeToIndex(size_t attr, int64_t external) const;
  int64_t IndexToCode(size_t attr, Code code) const {
    return attributes_[attr].codes[code];
  }

  // Mixed-radix index into the domain product with the sensitive value as
  // the fastest-varying digit, so the completions of one partial record are
  // contiguous: CellIndex(r) = PartialCellIndex(r') * |V_n| + r^n.
  uint64_t CellIndex(const Record& r) const;
  uint64_t PartialCellIndex(const PartialRecord& p) const;
  Record CellRecord(uint64_t cell) const;

  bool IsValid(const Record& r) const;
  bool IsValid(const PartialRecord& p) const;

  // Stable content hash (names, codes, sensitive position).
  uint64_t Hash() const;

 private:
  AttributeSchema() = default;

  std::vector<Attribute> attributes_;
  std::vector<size_t> file_order_;
  uint64_t num_cells_ = 0;
};

using SchemaPtr = std::shared_ptr<const AttributeSchema>;

// Multiset of records over a schema. Immutable once built.
class Dataset {
 public:
  // Validates every record against the schema.
  static absl::StatusOr<Dataset> Create(SchemaPtr schema,
                                        std::vector<Record> records);

  // Caller guarantees validity.
  Dataset(SchemaPtr schema, std::vector<Record> records)
      : schema_(std::move(schema)), records_(std::move(records)) {}

  const AttributeSchema& schema() const { return *schema_; }
  const SchemaPtr& schema_ptr() const { return schema_; }
  size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  std::span<const Record> records() const { return records_; }
  const Record& record(size_t i) const { return records_[i]; }

  // Multiplicity of every cell of the domain product.
  std::vector<uint32_t> CellCounts() const;

  // Equality as multisets.
  bool SameMultiset(const Dataset& other) const;

 private:
  SchemaPtr schema_;
  std::vector<Record> records_;
};

struct TargetUser {
  PartialRecord partial;
  std::string id;
};

PartialRecord Project(const Record& r);
Record Complete(const PartialRecord& p, Code sensitive);

// Header line of attribute names (file order), then one line of external
// integer codes per record. Lines starting with '#' are comments.
absl::StatusOr<Dataset> ParseDatasetCsv(std::istream& in, SchemaPtr schema);
absl::StatusOr<Dataset> LoadDatasetCsv(const std::string& path,
                                       SchemaPtr schema);
void WriteDatasetCsv(std::ostream& out, const Dataset& d,
                     std::string_view comment = {});
absl::Status SaveDatasetCsv(const std::string& path, const Dataset& d,
                            std::string_view comment = {});

// Per-attribute categorical weights, indexed by dense code. An empty entry
// (or a missing trailing entry) means uniform.
using AttributeWeights = std::vector<std::vector<double>>;

// s i.i.d. records, each attribute drawn independently.
absl::StatusOr<Dataset> GenerateSynthetic(SchemaPtr schema, size_t s,
                                          uint64_t seed,
                                          const AttributeWeights& weights = {});

// Replaces every sensitive value by a fresh uniform draw from V_n.
Dataset RandomizeSensitive(const Dataset& d, uint64_t seed);

// Users whose non-sensitive projection occurs exactly once in `d`, ordered
// lexicographically by partial values.
std::vector<TargetUser> FindUniqueTargets(const Dataset& d);

// Random partition into (private, aux) with |private| = round(fraction * s).
std::pair<Dataset, Dataset> SplitPrivateAux(const Dataset& d,
                                            double private_fraction,
                                            uint64_t seed);

std::string TargetId(const PartialRecord& p);

}  // namespace desia

#endif  // DESIA_CORE_MODEL_H_
