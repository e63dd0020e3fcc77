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

#include "desia/result.h"

#include <string>

#include "absl/strings/str_cat.h"

namespace desia {

nlohmann::json ResultToJson(const AttackResult& r) {
  return {{"target", r.target},
          {"method", r.method},
          {"prediction", r.prediction},
          {"score", r.score},
          {"deterministic", r.deterministic},
          {"truth", r.truth}};
}

absl::StatusOr<AttackResult> ResultFromJson(const nlohmann::json& j) {
  AttackResult r;
  try {
    r.target = j.at("target").get<std::string>();
    r.method = j.at("method").get<std::string>();
    r.prediction = j.at("prediction").get<Code>();
    r.score = j.at("score").get<double>();
    r.deterministic = j.at("deterministic").get<bool>();
    r.truth = j.value("truth", Code{-1});
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed attack result: ", e.what()));
  }
  if (!(r.score >= 0 && r.score <= 1)) {
    return absl::InvalidArgumentError("attack score outside [0, 1]");
  }
  return r;
}

void WriteResultsJsonl(std::ostream& out, const std::vector<AttackResult>& rs) {
  for (const AttackResult& r : rs) out << ResultToJson(r).dump() << "\n";
}

absl::StatusOr<std::vector<AttackResult>> ReadResultsJsonl(std::istream& in) {
  std::vector<AttackResult> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": invalid JSON"));
    }
    auto r = ResultFromJson(j);
    if (!r.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": ", r.status().message()));
    }
    out.push_back(*std::move(r));
  }
  return out;
}

}  // namespace desia
