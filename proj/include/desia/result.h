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

#ifndef DESIA_RESULT_H_
#define DESIA_RESULT_H_

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "desia/core_model.h"
#include "json.hpp"

namespace desia {

// Outcome of one attack on one target.
struct AttackResult {
  std::string target;
  std::string method;
  // Sensitive value (AIA) or membership bit (MIA).
  Code prediction = 0;
  // Attacker probability of the positive class (code 1 / member).
  double score = 0.5;
  // Set when the deterministic module verified the prediction; the score is
  // then exactly 0 or 1.
  bool deterministic = false;
  // Ground truth, filled in by the game harness; -1 when unknown.
  Code truth = -1;

  friend bool operator==(const AttackResult&, const AttackResult&) = default;
};

nlohmann::json ResultToJson(const AttackResult& r);
absl::StatusOr<AttackResult> ResultFromJson(const nlohmann::json& j);

// One JSON object per line.
void WriteResultsJsonl(std::ostream& out, const std::vector<AttackResult>& rs);
absl::StatusOr<std::vector<AttackResult>> ReadResultsJsonl(std::istream& in);

}  // namespace desia

#endif  // DESIA_RESULT_H_
