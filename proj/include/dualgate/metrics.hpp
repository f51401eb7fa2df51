// Copyright 2026 The dualgate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dualgate/core.hpp"

namespace dualgate {

// Perturbation tags for the two robustness metrics.
inline constexpr std::string_view kJpegRobustnessTag = "jpeg_qf90";
inline constexpr std::string_view kResizeRobustnessTag = "resize_0.9";

struct LabeledScore {
  std::string sample_id;
  double fake_score = 0.5;
  Label label = Label::Real;
  std::string perturbation{kCleanTag};
};

struct ClassAccuracy {
  double r_acc = 0.0;
  double f_acc = 0.0;
  double b_acc = 0.0;
};

// Metrics for one slice of rows.
struct SliceMetrics {
  std::size_t n_real = 0;
  std::size_t n_fake = 0;
  ClassAccuracy acc;
  std::optional<double> auc;
  double f1 = 0.0;
};

struct MetricReport {
  SliceMetrics overall;
  // One entry per perturbation tag, sorted by tag. Tags lacking one of the
  // classes are skipped.
  std::vector<std::pair<std::string, SliceMetrics>> by_perturbation;
  std::optional<double> j_rob;
  std::optional<double> r_rob;

  double b_acc() const { return overall.acc.b_acc; }
};

// Real rows are correct when score <= threshold, fake rows when score >
// threshold. EvaluationError names a class with no rows.
ClassAccuracy balanced_accuracy(std::span<const LabeledScore> rows, double threshold = 0.5);

// Mann-Whitney AUC with average ranks for ties.
double auc(std::span<const LabeledScore> rows);

// F1 of the fake class; 0 when precision + recall is 0.
double f1(std::span<const LabeledScore> rows, double threshold = 0.5);

// Balanced accuracy over rows carrying `perturbed_tag`. EvaluationError when
// the tag is absent.
double robustness_metric(std::span<const LabeledScore> rows, std::string_view perturbed_tag,
                         double threshold = 0.5);

inline constexpr double kFocalClamp = 1e-12;
inline constexpr double kDefaultFocalGamma = 2.0;

// -(1 - p_c)^gamma * ln(p_c) where p_c is the true-class probability and
// p_fake is clamped into [kFocalClamp, 1 - kFocalClamp].
double focal_loss(double p_fake, Label label, double gamma = kDefaultFocalGamma);

// d/dp_c of the focal loss at the true-class probability p_c.
double focal_loss_grad(double p_true, double gamma = kDefaultFocalGamma);

// Overall metrics, per-tag slices, and J.Rob/R.Rob when their tags exist.
// `with_auc` is false for label-only predictions.
MetricReport evaluate(std::span<const LabeledScore> rows, double threshold = 0.5,
                      bool with_auc = true);

}  // namespace dualgate
