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

#include "desia/core_model.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "desia/random.h"

namespace desia {

absl::StatusOr<SchemaPtr> AttributeSchema::Create(
    std::vector<Attribute> attributes, size_t sensitive_index,
    uint64_t cell_cap) {
  if (attributes.size() < 2) {
    return absl::InvalidArgumentError(
        "schema needs at least one non-sensitive and one sensitive attribute");
  }
  if (sensitive_index >= attributes.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("sensitive index ", sensitive_index, " out of range"));
  }
  std::set<std::string> names;
  uint64_t cells = 1;
  for (const Attribute& a : attributes) {
    if (a.name.empty()) {
      return absl::InvalidArgumentError("attribute with empty name");
    }
    if (!names.insert(a.name).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate attribute name '", a.name, "'"));
    }
    if (a.codes.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("attribute '", a.name, "' has an empty domain"));
    }
    std::set<int64_t> seen(a.codes.begin(), a.codes.end());
    if (seen.size() != a.codes.size()) {
      return absl::InvalidArgumentError(
          absl::StrCat("attribute '", a.name, "' has duplicate domain values"));
    }
    if (!a.labels.empty() && a.labels.size() != a.codes.size()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "attribute '", a.name, "' has ", a.labels.size(), " labels for ",
          a.codes.size(), " values"));
    }
    if (cells > cell_cap / a.codes.size()) {
      return absl::ResourceExhaustedError(absl::StrCat(
          "domain product exceeds the cap of ", cell_cap, " potential records"));
    }
    cells *= a.codes.size();
  }
  if (cells > cell_cap) {
    return absl::ResourceExhaustedError(absl::StrCat(
        "domain product exceeds the cap of ", cell_cap, " potential records"));
  }

  auto schema = std::shared_ptr<AttributeSchema>(new AttributeSchema());
  const size_t n = attributes.size();
  // Internal order: file order with the sensitive attribute moved last.
  std::vector<size_t> internal_to_file;
  for (size_t j = 0; j < n; ++j) {
    if (j != sensitive_index) internal_to_file.push_back(j);
  }
  internal_to_file.push_back(sensitive_index);
  schema->file_order_.assign(n, 0);
  for (size_t i = 0; i < n; ++i) {
    schema->attributes_.push_back(std::move(attributes[internal_to_file[i]]));
    schema->file_order_[internal_to_file[i]] = i;
  }
  schema->num_cells_ = cells;
  return SchemaPtr(std::move(schema));
}

absl::StatusOr<SchemaPtr> AttributeSchema::FromJson(const nlohmann::json& j,
                                                    uint64_t cell_cap) {
  if (!j.is_object() || !j.contains("attributes") ||
      !j["attributes"].is_array()) {
    return absl::InvalidArgumentError("schema JSON needs an 'attributes' array");
  }
  std::vector<Attribute> attrs;
  std::optional<size_t> sensitive;
  try {
    for (const auto& ja : j["attributes"]) {
      Attribute a;
      a.name = ja.at("name").get<std::string>();
      if (ja.contains("domain")) {
        a.codes = ja["domain"].get<std::vector<int64_t>>();
      } else if (ja.contains("range")) {
        auto r = ja["range"].get<std::vector<int64_t>>();
        if (r.size() != 2 || r[0] > r[1]) {
          return absl::InvalidArgumentError(
              absl::StrCat("attribute '", a.name, "': bad range"));
        }
        for (int64_t v = r[0]; v <= r[1]; ++v) a.codes.push_back(v);
      } else {
        return absl::InvalidArgumentError(absl::StrCat(
            "attribute '", a.name, "' needs 'domain' or 'range'"));
      }
      if (ja.contains("labels")) {
        a.labels = ja["labels"].get<std::vector<std::string>>();
      }
      if (ja.value("sensitive", false)) {
        if (sensitive.has_value()) {
          return absl::InvalidArgumentError(
              "exactly one attribute must be flagged sensitive");
        }
        sensitive = attrs.size();
      }
      attrs.push_back(std::move(a));
    }
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed schema JSON: ", e.what()));
  }
  if (!sensitive.has_value()) {
    return absl::InvalidArgumentError(
        "exactly one attribute must be flagged sensitive");
  }
  return Create(std::move(attrs), *sensitive, cell_cap);
}

absl::StatusOr<SchemaPtr> AttributeSchema::LoadJson(const std::string& path,
                                                    uint64_t cell_cap) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat(path, ": invalid JSON: ", e.what()));
  }
  return FromJson(j, cell_cap);
}

nlohmann::json AttributeSchema::ToJson() const {
  nlohmann::json attrs = nlohmann::json::array();
  for (size_t j = 0; j < file_order_.size(); ++j) {
    const size_t i = file_order_[j];
    const Attribute& a = attributes_[i];
    nlohmann::json ja = {{"name", a.name}, {"domain", a.codes}};
    if (!a.labels.empty()) ja["labels"] = a.labels;
    if (i == sensitive_index()) ja["sensitive"] = true;
    attrs.push_back(std::move(ja));
  }
  return {{"attributes", std::move(attrs)}};
}

std::optional<size_t> AttributeSchema::IndexOf(std::string_view name) const {
  for (size_t i = 0; i < attributes_.size(); ++i) {
    if (attributes_[i].name == name) return i;
  }
  return std::nullopt;
}

std::optional<Code> AttributeSchema::CodeToIndex(size_t attr,
                                                 int64_t external) const {
  const auto& codes = attributes_[attr].codes;
  for (size_t k = 0; k < codes.size(); ++k) {
    if (codes[k] == external) return static_cast<Code>(k);
  }
  return std::nullopt;
}

uint64_t AttributeSchema::CellIndex(const Record& r) const {
  uint64_t idx = 0;
  for (size_t i = 0; i < attributes_.size(); ++i) {
    idx = idx * attributes_[i].codes.size() + static_cast<uint64_t>(r.values[i]);
  }
  return idx;
}

uint64_t AttributeSchema::PartialCellIndex(const PartialRecord& p) const {
  uint64_t idx = 0;
  for (size_t i = 0; i + 1 < attributes_.size(); ++i) {
    idx = idx * attributes_[i].codes.size() + static_cast<uint64_t>(p.values[i]);
  }
  return idx;
}

Record AttributeSchema::CellRecord(uint64_t cell) const {
  Record r;
  r.values.resize(attributes_.size());
  for (size_t i = attributes_.size(); i-- > 0;) {
    const uint64_t d = attributes_[i].codes.size();
    r.values[i] = static_cast<Code>(cell % d);
    cell /= d;
  }
  return r;
}

bool AttributeSchema::IsValid(const Record& r) const {
  if (r.values.size() != attributes_.size()) return false;
  for (size_t i = 0; i < r.values.size(); ++i) {
    if (r.values[i] < 0 || r.values[i] >= domain_size(i)) return false;
  }
  return true;
}

bool AttributeSchema::IsValid(const PartialRecord& p) const {
  if (p.values.size() != num_nonsensitive()) return false;
  for (size_t i = 0; i < p.values.size(); ++i) {
    if (p.values[i] < 0 || p.values[i] >= domain_size(i)) return false;
  }
  return true;
}

uint64_t AttributeSchema::Hash() const { return Fnv1a64(ToJson().dump()); }

absl::StatusOr<Dataset> Dataset::Create(SchemaPtr schema,
                                        std::vector<Record> records) {
  for (size_t k = 0; k < records.size(); ++k) {
    if (!schema->IsValid(records[k])) {
      return absl::InvalidArgumentError(
          absl::StrCat("record ", k, " is not valid under the schema"));
    }
  }
  return Dataset(std::move(schema), std::move(records));
}

std::vector<uint32_t> Dataset::CellCounts() const {
  std::vector<uint32_t> counts(schema_->num_cells(), 0);
  for (const Record& r : records_) ++counts[schema_->CellIndex(r)];
  return counts;
}

bool Dataset::SameMultiset(const Dataset& other) const {
  if (size() != other.size()) return false;
  std::vector<Record> a(records_.begin(), records_.end());
  std::vector<Record> b(other.records_.begin(), other.records_.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

PartialRecord Project(const Record& r) {
  return PartialRecord{{r.values.begin(), r.values.end() - 1}};
}

Record Complete(const PartialRecord& p, Code sensitive) {
  Record r{p.values};
  r.values.push_back(sensitive);
  return r;
}

absl::StatusOr<Dataset> ParseDatasetCsv(std::istream& in, SchemaPtr schema) {
  const AttributeSchema& sc = *schema;
  const size_t n = sc.num_attributes();
  std::string line;
  size_t line_no = 0;
  bool have_header = false;
  std::vector<Record> records;
  while (std::getline(in, line)) {
    ++line_no;
    absl::string_view view = absl::StripAsciiWhitespace(line);
    if (view.empty() || view.front() == '#') continue;
    std::vector<absl::string_view> fields = absl::StrSplit(view, ',');
    if (!have_header) {
      if (fields.size() != n) {
        return absl::InvalidArgumentError(absl::StrCat(
            "schema mismatch: header has ", fields.size(), " columns, schema has ",
            n, " attributes"));
      }
      for (size_t j = 0; j < n; ++j) {
        absl::string_view name = absl::StripAsciiWhitespace(fields[j]);
        const std::string& expected = sc.attribute(sc.file_order()[j]).name;
        if (name != expected) {
          return absl::InvalidArgumentError(absl::StrCat(
              "schema mismatch: column ", j + 1, " is '", name, "', expected '",
              expected, "'"));
        }
      }
      have_header = true;
      continue;
    }
    if (fields.size() != n) {
      return absl::InvalidArgumentError(absl::StrCat(
          "line ", line_no, ": expected ", n, " fields, got ", fields.size()));
    }
    Record r;
    r.values.resize(n);
    for (size_t j = 0; j < n; ++j) {
      absl::string_view f = absl::StripAsciiWhitespace(fields[j]);
      int64_t v = 0;
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        return absl::InvalidArgumentError(
            absl::StrCat("line ", line_no, ": '", f, "' is not an integer"));
      }
      const size_t attr = sc.file_order()[j];
      std::optional<Code> code = sc.CodeToIndex(attr, v);
      if (!code.has_value()) {
        return absl::InvalidArgumentError(
            absl::StrCat("line ", line_no, ": value ", v,
                         " is outside the domain of '",
                         sc.attribute(attr).name, "'"));
      }
      r.values[attr] = *code;
    }
    records.push_back(std::move(r));
  }
  if (!have_header) {
    return absl::InvalidArgumentError("schema mismatch: missing header line");
  }
  return Dataset(std::move(schema), std::move(records));
}

absl::StatusOr<Dataset> LoadDatasetCsv(const std::string& path,
                                       SchemaPtr schema) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  auto d = ParseDatasetCsv(in, std::move(schema));
  if (!d.ok()) {
    return absl::Status(d.status().code(),
                        absl::StrCat(path, ": ", d.status().message()));
  }
  return d;
}

void WriteDatasetCsv(std::ostream& out, const Dataset& d,
                     std::string_view comment) {
  const AttributeSchema& sc = d.schema();
  if (!comment.empty()) out << "# " << comment << "\n";
  const auto& order = sc.file_order();
  for (size_t j = 0; j < order.size(); ++j) {
    out << (j ? "," : "") << sc.attribute(order[j]).name;
  }
  out << "\n";
  for (const Record& r : d.records()) {
    for (size_t j = 0; j < order.size(); ++j) {
      out << (j ? "," : "") << sc.IndexToCode(order[j], r.values[order[j]]);
    }
    out << "\n";
  }
}

absl::Status SaveDatasetCsv(const std::string& path, const Dataset& d,
                            std::string_view comment) {
  std::ofstream out(path);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path));
  WriteDatasetCsv(out, d, comment);
  return out ? absl::OkStatus()
             : absl::DataLossError(absl::StrCat("write failed: ", path));
}

absl::StatusOr<Dataset> GenerateSynthetic(SchemaPtr schema, size_t s,
                                          uint64_t seed,
                                          const AttributeWeights& weights) {
  const AttributeSchema& sc = *schema;
  const size_t n = sc.num_attributes();
  if (weights.size() > n) {
    return absl::InvalidArgumentError("more weight vectors than attributes");
  }
  std::vector<std::vector<double>> w(n);
  for (size_t i = 0; i < n; ++i) {
    if (i < weights.size() && !weights[i].empty()) {
      if (weights[i].size() != static_cast<size_t>(sc.domain_size(i))) {
        return absl::InvalidArgumentError(absl::StrCat(
            "attribute '", sc.attribute(i).name, "': expected ",
            sc.domain_size(i), " weights, got ", weights[i].size()));
      }
      double total = 0;
      for (double x : weights[i]) {
        if (!(x >= 0) || !std::isfinite(x)) {
          return absl::InvalidArgumentError(absl::StrCat(
              "attribute '", sc.attribute(i).name, "': negative weight"));
        }
        total += x;
      }
      if (total <= 0) {
        return absl::InvalidArgumentError(absl::StrCat(
            "attribute '", sc.attribute(i).name, "': weights sum to zero"));
      }
      w[i] = weights[i];
    }
  }
  Rng rng(seed);
  std::vector<Record> records(s);
  for (Record& r : records) {
    r.values.resize(n);
    for (size_t i = 0; i < n; ++i) {
      r.values[i] = w[i].empty()
                        ? static_cast<Code>(rng.UniformInt(sc.domain_size(i)))
                        : static_cast<Code>(rng.Categorical(w[i]));
    }
  }
  return Dataset(std::move(schema), std::move(records));
}

Dataset RandomizeSensitive(const Dataset& d, uint64_t seed) {
  Rng rng(seed);
  const size_t sens = d.schema().sensitive_index();
  const uint64_t dom = d.schema().sensitive_domain_size();
  std::vector<Record> records(d.records().begin(), d.records().end());
  for (Record& r : records) r.values[sens] = static_cast<Code>(rng.UniformInt(dom));
  return Dataset(d.schema_ptr(), std::move(records));
}

std::vector<TargetUser> FindUniqueTargets(const Dataset& d) {
  std::map<PartialRecord, size_t> counts;
  for (const Record& r : d.records()) ++counts[Project(r)];
  std::vector<TargetUser> targets;
  for (const auto& [partial, c] : counts) {
    if (c == 1) targets.push_back({partial, TargetId(partial)});
  }
  return targets;
}

std::pair<Dataset, Dataset> SplitPrivateAux(const Dataset& d,
                                            double private_fraction,
                                            uint64_t seed) {
  std::vector<size_t> idx(d.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  rng.Shuffle(idx);
  const size_t k = static_cast<size_t>(
      std::llround(private_fraction * static_cast<double>(d.size())));
  std::vector<Record> priv, aux;
  for (size_t t = 0; t < idx.size(); ++t) {
    (t < k ? priv : aux).push_back(d.record(idx[t]));
  }
  return {Dataset(d.schema_ptr(), std::move(priv)),
          Dataset(d.schema_ptr(), std::move(aux))};
}

std::string TargetId(const PartialRecord& p) {
  return absl::StrJoin(p.values, "-");
}

}  // namespace desia
