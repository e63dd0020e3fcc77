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

// L2-penalized (multinomial) logistic regression used as the meta-classifier
// over vectors of query answers.

#ifndef DESIA_LOGISTIC_H_
#define DESIA_LOGISTIC_H_

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "desia/core_model.h"

namespace desia {

// Dense row-major matrix of features.
struct FeatureMatrix {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> data;

  FeatureMatrix() = default;
  FeatureMatrix(size_t r, size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  std::span<double> row(size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const double> row(size_t i) const {
    return {data.data() + i * cols, cols};
  }
  double& at(size_t i, size_t j) { return data[i * cols + j]; }
  double at(size_t i, size_t j) const { return data[i * cols + j]; }

  FeatureMatrix SelectRows(std::span<const uint32_t> rows) const;
};

struct LogisticOptions {
  int max_iterations = 1000;
  double gradient_tolerance = 1e-6;
};

class MetaClassifier {
 public:
  // Sorted distinct training labels; class 0 is the reference class.
  std::vector<Code> classes;
  // Standardization applied to raw features before the linear map.
  std::vector<double> mean;
  std::vector<double> scale;
  // (cols + 1) x (classes - 1), column-major; row 0 of each column is the
  // intercept. With two classes this is the usual m+1 logistic weights.
  std::vector<double> weights;
  double lambda = 0;
  int iterations = 0;
  bool converged = false;
  // Objective value after every accepted step, starting at the initial point.
  std::vector<double> loss_history;

  size_t num_features() const { return mean.size(); }

  // Probabilities over `classes`, summing to 1.
  std::vector<double> PredictProba(std::span<const double> features) const;
  // Label with the highest probability; ties go to the lower code.
  Code Predict(std::span<const double> features) const;
  // Probability of `label` (0 if it was never seen in training).
  double ProbabilityOf(std::span<const double> features, Code label) const;
};

// Mean multinomial log-loss plus (lambda / 2) * |W|^2 (intercepts not
// penalized) for already standardized features and labels given as class
// indices. `params` uses the MetaClassifier::weights layout. Writes the
// gradient when `grad` is non-null.
double LogisticObjective(const FeatureMatrix& x,
                         std::span<const int> class_index, size_t num_classes,
                         double lambda, std::span<const double> params,
                         std::vector<double>* grad);

absl::StatusOr<MetaClassifier> FitLogisticL2(const FeatureMatrix& features,
                                             std::span<const Code> labels,
                                             double lambda,
                                             const LogisticOptions& opts = {});

// Mean negative log-likelihood of `labels` under the model.
double LogLoss(const MetaClassifier& model, const FeatureMatrix& features,
               std::span<const Code> labels);

}  // namespace desia

#endif  // DESIA_LOGISTIC_H_
