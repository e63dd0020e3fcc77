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

// ROC analysis of attack scores: curve, AUC, TPR at a fixed FPR budget, and
// the per-run report.

#ifndef DESIA_METRICS_H_
#define DESIA_METRICS_H_

#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "desia/result.h"
#include "json.hpp"

namespace desia {

struct RocPoint {
  double fpr = 0;
  double tpr = 0;
  // Predict positive when score >= threshold; +inf for the (0, 0) point.
  double threshold = 0;
};

// Starts at (0, 0) and ends at (1, 1); tied scores form a single step.
struct RocCurve {
  std::vector<RocPoint> points;
};

// `labels` are 0/1. Fails when lengths differ or a class is missing.
absl::StatusOr<RocCurve> Roc(std::span<const double> scores,
                             std::span<const int> labels);

// Trapezoidal area under the curve.
double Auc(const RocCurve& curve);

// Largest TPR over operating points with FPR <= k (no interpolation).
absl::StatusOr<double> TprAtFpr(const RocCurve& curve, double k);

struct MethodSummary {
  size_t count = 0;
  double accuracy = 0;
  std::optional<double> auc;
  std::map<double, double> tpr_at_fpr;
  double deterministic_coverage = 0;
  // Accuracy restricted to deterministic results (1.0 when noiseless).
  std::optional<double> deterministic_accuracy;
  std::optional<RocCurve> roc;
};

struct Report {
  MethodSummary overall;
  std::map<std::string, MethodSummary> per_method;
  std::vector<std::string> warnings;
};

// AUC and TPR@k only when every truth and prediction is binary and both
// classes occur; otherwise accuracy alone.
Report Summarize(std::span<const AttackResult> results,
                 std::span<const double> ks);

nlohmann::json ReportToJson(const Report& report);
// `fpr,tpr,threshold` rows of the overall curve.
void WriteRocCsv(std::ostream& out, const RocCurve& curve,
                 std::string_view comment = {});

}  // namespace desia

#endif  // DESIA_METRICS_H_
