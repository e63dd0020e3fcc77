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

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "absl/strings/str_cat.h"

namespace desia {
namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstRowMap = Eigen::Map<const RowMatrix>;

// Logits of all classes; column 0 is the reference class and stays 0.
void ComputeLogits(const ConstRowMap& x, std::span<const double> params,
                   size_t num_classes, Eigen::MatrixXd& logits) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  const Eigen::Index k = static_cast<Eigen::Index>(num_classes) - 1;
  Eigen::Map<const Eigen::MatrixXd> w(params.data(), d + 1, k);
  logits.resize(n, k + 1);
  logits.col(0).setZero();
  logits.rightCols(k) = x * w.bottomRows(d);
  logits.rightCols(k).rowwise() += w.row(0);
}

}  // namespace

FeatureMatrix FeatureMatrix::SelectRows(std::span<const uint32_t> idx) const {
  FeatureMatrix out(idx.size(), cols);
  for (size_t i = 0; i < idx.size(); ++i) {
    std::copy_n(data.begin() + idx[i] * cols, cols, out.data.begin() + i * cols);
  }
  return out;
}

double LogisticObjective(const FeatureMatrix& x,
                         std::span<const int> class_index, size_t num_classes,
                         double lambda, std::span<const double> params,
                         std::vector<double>* grad) {
  const Eigen::Index n = static_cast<Eigen::Index>(x.rows);
  const Eigen::Index d = static_cast<Eigen::Index>(x.cols);
  const Eigen::Index k = static_cast<Eigen::Index>(num_classes) - 1;
  ConstRowMap xm(x.data.data(), n, d);
  Eigen::MatrixXd logits;
  ComputeLogits(xm, params, num_classes, logits);

  double loss = 0;
  Eigen::MatrixXd resid(n, k);  // p_c - 1[y = c] for non-reference classes
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mx = logits.row(i).maxCoeff();
    double z = 0;
    for (Eigen::Index c = 0; c <= k; ++c) z += std::exp(logits(i, c) - mx);
    const double lse = mx + std::log(z);
    loss += lse - logits(i, class_index[i]);
    for (Eigen::Index c = 1; c <= k; ++c) {
      resid(i, c - 1) = std::exp(logits(i, c) - lse) -
                        (class_index[i] == c ? 1.0 : 0.0);
    }
  }
  const double inv_n = n > 0 ? 1.0 / static_cast<double>(n) : 0.0;
  loss *= inv_n;
  Eigen::Map<const Eigen::MatrixXd> w(params.data(), d + 1, k);
  loss += 0.5 * lambda * w.bottomRows(d).squaredNorm();

  if (grad != nullptr) {
    grad->assign(params.size(), 0.0);
    Eigen::Map<Eigen::MatrixXd> g(grad->data(), d + 1, k);
    g.row(0) = resid.colwise().sum() * inv_n;
    g.bottomRows(d) = (xm.transpose() * resid) * inv_n;
    g.bottomRows(d) += lambda * w.bottomRows(d);
  }
  return loss;
}

absl::StatusOr<MetaClassifier> FitLogisticL2(const FeatureMatrix& features,
                                             std::span<const Code> labels,
                                             double lambda,
                                             const LogisticOptions& opts) {
  if (labels.size() != features.rows) {
    return absl::InvalidArgumentError(
        absl::StrCat(features.rows, " feature rows but ", labels.size(),
                     " labels"));
  }
  if (!(lambda >= 0)) {
    return absl::InvalidArgumentError("lambda must be >= 0");
  }
  MetaClassifier model;
  model.classes.assign(labels.begin(), labels.end());
  std::sort(model.classes.begin(), model.classes.end());
  model.classes.erase(std::unique(model.classes.begin(), model.classes.end()),
                      model.classes.end());
  if (model.classes.size() < 2) {
    return absl::FailedPreconditionError(
        "degenerate fit: labels contain fewer than two classes");
  }
  const size_t n = features.rows, d = features.cols;
  const size_t num_classes = model.classes.size();
  model.lambda = lambda;

  // Standardize; constant columns keep scale 1 so they center to zero and
  // their weights never move off zero.
  model.mean.assign(d, 0.0);
  model.scale.assign(d, 1.0);
  for (size_t j = 0; j < d; ++j) {
    double s = 0;
    for (size_t i = 0; i < n; ++i) s += features.at(i, j);
    const double mu = s / static_cast<double>(n);
    double v = 0;
    for (size_t i = 0; i < n; ++i) {
      const double c = features.at(i, j) - mu;
      v += c * c;
    }
    const double sd = std::sqrt(v / static_cast<double>(n));
    model.mean[j] = mu;
    model.scale[j] = sd > 1e-12 ? sd : 1.0;
  }
  FeatureMatrix x(n, d);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < d; ++j) {
      x.at(i, j) = (features.at(i, j) - model.mean[j]) / model.scale[j];
    }
  }
  std::vector<int> cls(n);
  for (size_t i = 0; i < n; ++i) {
    cls[i] = static_cast<int>(
        std::lower_bound(model.classes.begin(), model.classes.end(), labels[i]) -
        model.classes.begin());
  }

  // L-BFGS with Armijo backtracking; every accepted step lowers the loss.
  const size_t p = (d + 1) * (num_classes - 1);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(p);
  std::vector<double> gbuf;
  auto eval = [&](const Eigen::VectorXd& at, Eigen::VectorXd& g) {
    const double f = LogisticObjective(x, cls, num_classes, lambda,
                                       {at.data(), p}, &gbuf);
    g = Eigen::Map<const Eigen::VectorXd>(gbuf.data(), p);
    return f;
  };
  Eigen::VectorXd g(p);
  double f = eval(w, g);
  model.loss_history.push_back(f);
  constexpr size_t kHistory = 10;
  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;
  Eigen::VectorXd g_new(p);
  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    if (g.lpNorm<Eigen::Infinity>() < opts.gradient_tolerance) {
      model.converged = true;
      break;
    }
    // Two-loop recursion.
    Eigen::VectorXd q = g;
    std::vector<double> alpha(s_hist.size());
    for (size_t k = s_hist.size(); k-- > 0;) {
      alpha[k] = rho_hist[k] * s_hist[k].dot(q);
      q -= alpha[k] * y_hist[k];
    }
    if (!s_hist.empty()) {
      q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    }
    for (size_t k = 0; k < s_hist.size(); ++k) {
      const double beta = rho_hist[k] * y_hist[k].dot(q);
      q += (alpha[k] - beta) * s_hist[k];
    }
    Eigen::VectorXd dir = -q;
    double slope = g.dot(dir);
    if (!(slope < 0)) {
      dir = -g;
      slope = -g.squaredNorm();
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }
    double step = s_hist.empty() ? std::min(1.0, 1.0 / g.norm()) : 1.0;
    bool accepted = false;
    Eigen::VectorXd w_new;
    double f_new = f;
    for (int ls = 0; ls < 60; ++ls) {
      w_new = w + step * dir;
      f_new = eval(w_new, g_new);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No further decrease representable; treat as converged.
      model.converged = true;
      break;
    }
    Eigen::VectorXd s = w_new - w;
    Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (s_hist.size() > kHistory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    const double rel = std::abs(f - f_new) / std::max(1.0, std::abs(f));
    w = w_new;
    g = g_new;
    f = f_new;
    model.loss_history.push_back(f);
    if (rel < 1e-12) {
      model.converged = true;
      ++it;
      break;
    }
  }
  model.iterations = it;
  model.weights.assign(w.data(), w.data() + p);
  return model;
}

std::vector<double> MetaClassifier::PredictProba(
    std::span<const double> features) const {
  const size_t d = num_features();
  const size_t k = classes.size() - 1;
  std::vector<double> logits(k + 1, 0.0);
  for (size_t c = 0; c < k; ++c) {
    const double* col = weights.data() + c * (d + 1);
    double z = col[0];
    for (size_t j = 0; j < d; ++j) {
      z += col[j + 1] * (features[j] - mean[j]) / scale[j];
    }
    logits[c + 1] = z;
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  double total = 0;
  for (double& l : logits) {
    l = std::exp(l - mx);
    total += l;
  }
  for (double& l : logits) l /= total;
  return logits;
}

Code MetaClassifier::Predict(std::span<const double> features) const {
  const std::vector<double> p = PredictProba(features);
  size_t best = 0;
  for (size_t c = 1; c < p.size(); ++c) {
    if (p[c] > p[best]) best = c;
  }
  return classes[best];
}

double MetaClassifier::ProbabilityOf(std::span<const double> features,
                                     Code label) const {
  auto it = std::lower_bound(classes.begin(), classes.end(), label);
  if (it == classes.end() || *it != label) return 0.0;
  return PredictProba(features)[it - classes.begin()];
}

double LogLoss(const MetaClassifier& model, const FeatureMatrix& features,
               std::span<const Code> labels) {
  double total = 0;
  for (size_t i = 0; i < features.rows; ++i) {
    const double p = model.ProbabilityOf(features.row(i), labels[i]);
    total -= std::log(std::max(p, 1e-300));
  }
  return features.rows ? total / static_cast<double>(features.rows) : 0.0;
}

}  // namespace desia
