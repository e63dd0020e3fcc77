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

#include <cmath>
#include <sstream>

#include "gtest/gtest.h"
#include "desia/random.h"

namespace desia {
namespace {

double PairwiseAuc(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0, pairs = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1;
      wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
    }
  }
  return wins / pairs;
}

TEST(Roc, AucMatchesPairwiseOracle) {
  Rng rng(77);
  for (int i = 0; i < 500; ++i) {
    const size_t n = 2 + rng.UniformInt(199);
    std::vector<double> s(n);
    std::vector<int> y(n);
    // Coarse scores force plenty of ties.
    const int levels = 1 + static_cast<int>(rng.UniformInt(20));
    for (size_t k = 0; k < n; ++k) {
      s[k] = static_cast<double>(rng.UniformInt(levels)) / levels;
      y[k] = rng.Bernoulli(0.4);
    }
    y[0] = 0;
    y[1] = 1;
    auto c = Roc(s, y);
    ASSERT_TRUE(c.ok());
    EXPECT_NEAR(Auc(*c), PairwiseAuc(s, y), 1e-12);
  }
}

TEST(Roc, PerfectAndDiagonal) {
  std::vector<double> s = {0.9, 0.1};
  std::vector<int> y = {1, 0};
  auto c = Roc(s, y);
  ASSERT_TRUE(c.ok());
  EXPECT_EQ(Auc(*c), 1.0);
  EXPECT_EQ(*TprAtFpr(*c, 1e-3), 1.0);
  std::vector<double> flat(10, 0.3);
  std::vector<int> mix = {0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
  auto d = Roc(flat, mix);
  ASSERT_EQ(d->points.size(), 2u);
  EXPECT_EQ(Auc(*d), 0.5);
  EXPECT_EQ(*TprAtFpr(*d, 0.1), 0.0);
}

// Hand sweep of scores (0.8, 0.6, 0.4) with labels (1, 0, 1): thresholds
// 0.8, 0.6, 0.4 give (0, 1/2), (1, 1/2), (1, 1).
TEST(Roc, ThreePointSweep) {
  std::vector<double> s = {0.8, 0.6, 0.4};
  std::vector<int> y = {1, 0, 1};
  auto c = Roc(s, y);
  ASSERT_TRUE(c.ok());
  ASSERT_EQ(c->points.size(), 4u);
  const double want[4][2] = {{0, 0}, {0, 0.5}, {1, 0.5}, {1, 1}};
  for (size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(c->points[k].fpr, want[k][0]);
    EXPECT_EQ(c->points[k].tpr, want[k][1]);
  }
  EXPECT_TRUE(std::isinf(c->points[0].threshold));
  EXPECT_EQ(c->points[1].threshold, 0.8);
  EXPECT_EQ(Auc(*c), 0.5);
  EXPECT_EQ(Auc(*c), PairwiseAuc(s, y));
  EXPECT_EQ(*TprAtFpr(*c, 0.5), 0.5);
}

TEST(Roc, MonotoneTransformsAndStepTpr) {
  Rng rng(9);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> s(60), t(60);
    std::vector<int> y(60);
    for (size_t k = 0; k < 60; ++k) {
      s[k] = rng.UniformDouble();
      t[k] = 3 * s[k] - 7;
      y[k] = k % 2;
    }
    auto a = Roc(s, y), b = Roc(t, y);
    EXPECT_NEAR(Auc(*a), Auc(*b), 1e-15);
    double prev = 0;
    for (double k : {0.01, 0.05, 0.1, 0.3, 0.7, 0.99}) {
      EXPECT_EQ(*TprAtFpr(*a, k), *TprAtFpr(*b, k));
      EXPECT_GE(*TprAtFpr(*a, k), prev);
      prev = *TprAtFpr(*a, k);
      // Step value: best TPR among points left of k, never interpolated.
      double best = 0;
      for (const RocPoint& p : a->points) {
        if (p.fpr <= k) best = std::max(best, p.tpr);
      }
      EXPECT_EQ(*TprAtFpr(*a, k), best);
    }
    for (size_t k = 1; k < a->points.size(); ++k) {
      EXPECT_GE(a->points[k].fpr, a->points[k - 1].fpr);
      EXPECT_GE(a->points[k].tpr, a->points[k - 1].tpr);
    }
  }
}

TEST(Roc, Errors) {
  std::vector<double> s = {0.1, 0.2};
  std::vector<int> same = {1, 1};
  EXPECT_FALSE(Roc(s, same).ok());
  std::vector<int> short_labels = {1};
  EXPECT_FALSE(Roc(s, short_labels).ok());
  std::vector<int> y = {0, 1};
  auto c = Roc(s, y);
  EXPECT_FALSE(TprAtFpr(*c, 0.0).ok());
  EXPECT_FALSE(TprAtFpr(*c, 1.0).ok());
}

AttackResult R(Code pred, double score, Code truth, bool det, std::string method = "m") {
  AttackResult r;
  r.target = "t";
  r.method = method;
  r.prediction = pred;
  r.score = score;
  r.truth = truth;
  r.deterministic = det;
  return r;
}

TEST(Summarize, AccuracyCoverageAndAuc) {
  std::vector<AttackResult> rs = {R(1, 1.0, 1, true), R(0, 0.3, 0, false),
                                  R(1, 0.6, 0, false), R(0, 0.2, 1, false, "n")};
  std::vector<double> ks = {0.5};
  Report rep = Summarize(rs, ks);
  EXPECT_EQ(rep.overall.count, 4u);
  EXPECT_DOUBLE_EQ(rep.overall.accuracy, 0.5);
  EXPECT_DOUBLE_EQ(rep.overall.deterministic_coverage, 0.25);
  EXPECT_EQ(rep.overall.deterministic_accuracy, 1.0);
  std::vector<double> s = {1.0, 0.3, 0.6, 0.2};
  std::vector<int> y = {1, 0, 0, 1};
  ASSERT_TRUE(rep.overall.auc.has_value());
  EXPECT_DOUBLE_EQ(*rep.overall.auc, PairwiseAuc(s, y));
  EXPECT_EQ(rep.per_method.size(), 2u);
  EXPECT_EQ(rep.per_method["m"].count, 3u);
  const nlohmann::json j = ReportToJson(rep);
  EXPECT_TRUE(j.contains("overall"));
  std::ostringstream csv;
  WriteRocCsv(csv, *rep.overall.roc);
  EXPECT_EQ(csv.str().substr(0, 18), "fpr,tpr,threshold\n");
}

TEST(Summarize, EmptyRunWarns) {
  Report rep = Summarize({}, {});
  EXPECT_EQ(rep.overall.count, 0u);
  EXPECT_FALSE(rep.warnings.empty());
}

TEST(Summarize, NonBinaryFallsBackToAccuracy) {
  std::vector<AttackResult> rs = {R(2, 0.5, 2, false), R(0, 0.5, 1, false)};
  Report rep = Summarize(rs, {});
  EXPECT_FALSE(rep.overall.auc.has_value());
  EXPECT_DOUBLE_EQ(rep.overall.accuracy, 0.5);
}

TEST(ResultJson, RoundTrip) {
  std::vector<AttackResult> rs = {R(1, 0.25, 0, false), R(0, 0.0, 0, true)};
  std::stringstream io;
  WriteResultsJsonl(io, rs);
  auto back = ReadResultsJsonl(io);
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(*back, rs);
}

}  // namespace
}  // namespace desia
