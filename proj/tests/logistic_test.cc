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

#include "desia/logistic.h"

#include <cmath>
#include <numeric>

#include "gtest/gtest.h"
#include "desia/random.h"

namespace desia {
namespace {

FeatureMatrix RandomFeatures(Rng& rng, size_t rows, size_t cols) {
  FeatureMatrix x(rows, cols);
  for (double& v : x.data) v = rng.Normal();
  return x;
}

// Central differences; returns the largest relative error.
double GradientError(const FeatureMatrix& x, const std::vector<int>& y,
                     size_t classes, double lambda, std::vector<double> w) {
  std::vector<double> g;
  LogisticObjective(x, y, classes, lambda, w, &g);
  double worst = 0;
  for (size_t i = 0; i < w.size(); ++i) {
    const double h = 1e-5 * std::max(1.0, std::abs(w[i]));
    const double keep = w[i];
    w[i] = keep + h;
    const double up = LogisticObjective(x, y, classes, lambda, w, nullptr);
    w[i] = keep - h;
    const double down = LogisticObjective(x, y, classes, lambda, w, nullptr);
    w[i] = keep;
    const double fd = (up - down) / (2 * h);
    worst = std::max(worst, std::abs(fd - g[i]) / std::max(1e-3, std::abs(g[i])));
  }
  return worst;
}

TEST(LogisticObjective, GradientMatchesFiniteDifferences) {
  Rng rng(5);
  for (size_t classes : {2u, 3u}) {
    for (int rep = 0; rep < 10; ++rep) {
      FeatureMatrix x = RandomFeatures(rng, 40, 6);
      std::vector<int> y(40);
      for (int& v : y) v = static_cast<int>(rng.UniformInt(classes));
      std::vector<double> w(7 * (classes - 1));
      for (double& v : w) v = rng.Normal();
      EXPECT_LT(GradientError(x, y, classes, 0.3, w), 1e-5);
    }
  }
}

TEST(LogisticObjective, InterceptIsNotPenalized) {
  FeatureMatrix x(2, 1);
  x.at(0, 0) = 1;
  x.at(1, 0) = -1;
  std::vector<int> y = {1, 0};
  const double a = LogisticObjective(x, y, 2, 10, std::vector<double>{0, 0}, nullptr);
  const double b = LogisticObjective(x, y, 2, 10, std::vector<double>{0, 2}, nullptr);
  EXPECT_NEAR(a, std::log(2.0), 1e-12);
  // Penalty is lambda/2 * 4 on top of the data term.
  const double data = 0.5 * (std::log1p(std::exp(-2.0)) + std::log1p(std::exp(-2.0)));
  EXPECT_NEAR(b, data + 20.0, 1e-12);
}

TEST(FitLogistic, StationaryPointOfTheObjective) {
  Rng rng(8);
  FeatureMatrix x = RandomFeatures(rng, 200, 4);
  std::vector<Code> y(200);
  for (size_t i = 0; i < 200; ++i) {
    y[i] = x.at(i, 0) + 0.5 * rng.Normal() > 0 ? 1 : 0;
  }
  auto m = FitLogisticL2(x, y, 0.01);
  ASSERT_TRUE(m.ok());
  EXPECT_TRUE(m->converged);
  // Redo the standardization and check the gradient there.
  FeatureMatrix z(200, 4);
  for (size_t i = 0; i < 200; ++i) {
    for (size_t j = 0; j < 4; ++j) z.at(i, j) = (x.at(i, j) - m->mean[j]) / m->scale[j];
  }
  std::vector<int> yi(y.begin(), y.end());
  std::vector<double> g;
  LogisticObjective(z, yi, 2, 0.01, m->weights, &g);
  for (double v : g) EXPECT_LT(std::abs(v), 1e-5);
  for (size_t k = 1; k < m->loss_history.size(); ++k) {
    EXPECT_LE(m->loss_history[k], m->loss_history[k - 1] + 1e-12);
  }
}

TEST(FitLogistic, SeparableDataIsClassifiedPerfectly) {
  FeatureMatrix x(100, 2);
  std::vector<Code> y(100);
  Rng rng(2);
  for (size_t i = 0; i < 100; ++i) {
    x.at(i, 0) = rng.UniformDouble();
    x.at(i, 1) = rng.Normal();
    y[i] = x.at(i, 0) > 0.5;
  }
  auto m = FitLogisticL2(x, y, 1e-4);
  ASSERT_TRUE(m.ok());
  for (size_t i = 0; i < 100; ++i) EXPECT_EQ(m->Predict(x.row(i)), y[i]);
}

TEST(FitLogistic, ConstantFeaturesGiveTheBaseRate) {
  FeatureMatrix x(10, 3);
  for (double& v : x.data) v = 4.0;
  std::vector<Code> y = {1, 1, 1, 0, 0, 0, 0, 0, 0, 0};
  auto m = FitLogisticL2(x, y, 1.0);
  ASSERT_TRUE(m.ok());
  EXPECT_NEAR(m->ProbabilityOf(x.row(0), 1), 0.3, 1e-6);
  EXPECT_NEAR(LogLoss(*m, x, y), -(0.3 * std::log(0.3) + 0.7 * std::log(0.7)), 1e-6);
}

TEST(FitLogistic, MulticlassProbabilities) {
  Rng rng(4);
  FeatureMatrix x = RandomFeatures(rng, 90, 3);
  std::vector<Code> y(90);
  for (size_t i = 0; i < 90; ++i) y[i] = static_cast<Code>(i % 3) * 2;
  auto m = FitLogisticL2(x, y, 0.1);
  ASSERT_TRUE(m.ok());
  EXPECT_EQ(m->classes, (std::vector<Code>{0, 2, 4}));
  const auto p = m->PredictProba(x.row(0));
  EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
  EXPECT_EQ(m->ProbabilityOf(x.row(0), 1), 0.0);
}

TEST(FitLogistic, RejectsBadInput) {
  FeatureMatrix x(3, 1);
  std::vector<Code> one = {1, 1, 1};
  EXPECT_EQ(FitLogisticL2(x, one, 0.1).status().code(),
            absl::StatusCode::kFailedPrecondition);
  std::vector<Code> two = {1, 0};
  EXPECT_FALSE(FitLogisticL2(x, two, 0.1).ok());
  std::vector<Code> ok = {1, 0, 1};
  EXPECT_FALSE(FitLogisticL2(x, ok, -1).ok());
}

}  // namespace
}  // namespace desia
