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

#include "desia/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "absl/strings/str_cat.h"

namespace desia {

absl::StatusOr<RocCurve> Roc(std::span<const double> scores,
                             std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    return absl::InvalidArgumentError("scores and labels differ in length");
  }
  size_t pos = 0, neg = 0;
  for (int y : labels) {
    if (y == 1) {
      ++pos;
    } else if (y == 0) {
      ++neg;
    } else {
      return absl::InvalidArgumentError("labels must be 0 or 1");
    }
  }
  if (pos == 0 || neg == 0) {
    return absl::FailedPreconditionError(
        "ROC needs both positive and negative labels");
  }
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return scores[a] > scores[b]; });
  RocCurve curve;
  curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  size_t tp = 0, fp = 0;
  for (size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      (labels[order[i]] == 1 ? tp : fp) += 1;
      ++i;
    }
    curve.points.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                            static_cast<double>(tp) / static_cast<double>(pos),
                            s});
  }
  return curve;
}

double Auc(const RocCurve& curve) {
  double area = 0;
  for (size_t i = 1; i < curve.points.size(); ++i) {
    const RocPoint& a = curve.points[i - 1];
    const RocPoint& b = curve.points[i];
    area += (b.fpr - a.fpr) * (a.tpr + b.tpr) * 0.5;
  }
  return area;
}

absl::StatusOr<double> TprAtFpr(const RocCurve& curve, double k) {
  if (!(k > 0 && k < 1)) {
    return absl::InvalidArgumentError("k must lie in (0, 1)");
  }
  double best = 0;
  for (const RocPoint& p : curve.points) {
    if (p.fpr <= k) best = std::max(best, p.tpr);
  }
  return best;
}

namespace {

MethodSummary SummarizeGroup(std::span<const AttackResult* const> rs,
                             std::span<const double> ks,
                             std::vector<std::string>& warnings,
                             const std::string& label) {
  MethodSummary m;
  m.count = rs.size();
  if (rs.empty()) return m;
  size_t correct = 0, det = 0, det_correct = 0;
  bool binary = true;
  std::vector<double> scores;
  std::vector<int> labels;
  for (const AttackResult* r : rs) {
    correct += r->prediction == r->truth;
    if (r->deterministic) {
      ++det;
      det_correct += r->prediction == r->truth;
    }
    if ((r->truth != 0 && r->truth != 1) ||
        (r->prediction != 0 && r->prediction != 1)) {
      binary = false;
    }
    scores.push_back(r->score);
    labels.push_back(r->truth);
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(rs.size());
  m.deterministic_coverage =
      static_cast<double>(det) / static_cast<double>(rs.size());
  if (det > 0) {
    m.deterministic_accuracy =
        static_cast<double>(det_correct) / static_cast<double>(det);
  }
  if (!binary) {
    warnings.push_back(absl::StrCat(
        label, ": non-binary labels, reporting accuracy only"));
    return m;
  }
  auto curve = Roc(scores, labels);
  if (!curve.ok()) {
    warnings.push_back(absl::StrCat(label, ": ", curve.status().message()));
    return m;
  }
  m.auc = Auc(*curve);
  for (double k : ks) {
    auto t = TprAtFpr(*curve, k);
    if (t.ok()) m.tpr_at_fpr[k] = *t;
  }
  m.roc = *std::move(curve);
  return m;
}

nlohmann::json SummaryToJson(const MethodSummary& m) {
  nlohmann::json j;
  j["count"] = m.count;
  j["accuracy"] = m.accuracy;
  j["auc"] = m.auc.has_value() ? nlohmann::json(*m.auc) : nlohmann::json();
  nlohmann::json tprs = nlohmann::json::object();
  for (const auto& [k, v] : m.tpr_at_fpr) tprs[absl::StrCat(k)] = v;
  j["tpr_at_fpr"] = std::move(tprs);
  j["deterministic_coverage"] = m.deterministic_coverage;
  j["deterministic_accuracy"] = m.deterministic_accuracy.has_value()
                                    ? nlohmann::json(*m.deterministic_accuracy)
                                    : nlohmann::json();
  return j;
}

}  // namespace

Report Summarize(std::span<const AttackResult> results,
                 std::span<const double> ks) {
  Report report;
  if (results.empty()) {
    report.warnings.push_back("empty run: no attack results");
    return report;
  }
  std::vector<const AttackResult*> all;
  std::map<std::string, std::vector<const AttackResult*>> by_method;
  for (const AttackResult& r : results) {
    all.push_back(&r);
    by_method[r.method].push_back(&r);
  }
  report.overall = SummarizeGroup(all, ks, report.warnings, "overall");
  for (const auto& [method, rs] : by_method) {
    report.per_method[method] = SummarizeGroup(rs, ks, report.warnings, method);
  }
  return report;
}

nlohmann::json ReportToJson(const Report& report) {
  nlohmann::json j;
  j["overall"] = SummaryToJson(report.overall);
  nlohmann::json per = nlohmann::json::object();
  for (const auto& [method, m] : report.per_method) {
    per[method] = SummaryToJson(m);
  }
  j["per_method"] = std::move(per);
  j["warnings"] = report.warnings;
  return j;
}

void WriteRocCsv(std::ostream& out, const RocCurve& curve,
                 std::string_view comment) {
  if (!comment.empty()) out << "# " << comment << "\n";
  out << "fpr,tpr,threshold\n";
  for (const RocPoint& p : curve.points) {
    out << absl::StrCat(p.fpr) << "," << absl::StrCat(p.tpr) << ","
        << (std::isinf(p.threshold) ? std::string("inf")
                                    : absl::StrCat(p.threshold))
        << "\n";
  }
}

}  // namespace desia
