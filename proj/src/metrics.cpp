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

#include "dualgate/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "dualgate/error.hpp"

namespace dualgate {

namespace {

struct Tally {
  std::size_t n_real = 0;
  std::size_t n_fake = 0;
  std::size_t real_correct = 0;  // true negatives
  std::size_t fake_correct = 0;  // true positives
};

Tally tally(std::span<const LabeledScore> rows, double threshold) {
  Tally t;
  for (const auto& r : rows) {
    const bool says_fake = r.fake_score > threshold;
    if (r.label == Label::Real) {
      ++t.n_real;
      if (!says_fake) ++t.real_correct;
    } else {
      ++t.n_fake;
      if (says_fake) ++t.fake_correct;
    }
  }
  return t;
}

void require_both_classes(std::size_t n_real, std::size_t n_fake, const char* metric) {
  if (n_real == 0) throw EvaluationError(std::string(metric) + ": no rows of class real");
  if (n_fake == 0) throw EvaluationError(std::string(metric) + ": no rows of class fake");
}

SliceMetrics slice_metrics(std::span<const LabeledScore> rows, double threshold,
                           bool with_auc) {
  SliceMetrics m;
  const Tally t = tally(rows, threshold);
  m.n_real = t.n_real;
  m.n_fake = t.n_fake;
  m.acc = balanced_accuracy(rows, threshold);
  if (with_auc) m.auc = auc(rows);
  m.f1 = f1(rows, threshold);
  return m;
}

}  // namespace

ClassAccuracy balanced_accuracy(std::span<const LabeledScore> rows, double threshold) {
  const Tally t = tally(rows, threshold);
  require_both_classes(t.n_real, t.n_fake, "balanced_accuracy");
  ClassAccuracy acc;
  acc.r_acc = static_cast<double>(t.real_correct) / static_cast<double>(t.n_real);
  acc.f_acc = static_cast<double>(t.fake_correct) / static_cast<double>(t.n_fake);
  acc.b_acc = (acc.r_acc + acc.f_acc) / 2.0;
  return acc;
}

double auc(std::span<const LabeledScore> rows) {
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return rows[a].fake_score < rows[b].fake_score;
  });

  // Sum of fake-row ranks, kept doubled so tie averages stay integral.
  std::size_t n_fake = 0;
  std::size_t n_real = 0;
  double fake_rank_sum_x2 = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && rows[order[j]].fake_score == rows[order[i]].fake_score) ++j;
    // 1-based ranks i+1..j share the average (i+1+j)/2.
    const double rank_x2 = static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (rows[order[k]].label == Label::Fake) {
        fake_rank_sum_x2 += rank_x2;
        ++n_fake;
      } else {
        ++n_real;
      }
    }
    i = j;
  }
  require_both_classes(n_real, n_fake, "auc");

  // U counted in half-wins: 2U = 2R - n1(n1+1).
  const double nf = static_cast<double>(n_fake);
  const double u_x2 = fake_rank_sum_x2 - nf * (nf + 1.0);
  return u_x2 / (2.0 * nf * static_cast<double>(n_real));
}

double f1(std::span<const LabeledScore> rows, double threshold) {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  for (const auto& r : rows) {
    const bool says_fake = r.fake_score > threshold;
    if (r.label == Label::Fake) {
      says_fake ? ++tp : ++fn;
    } else if (says_fake) {
      ++fp;
    }
  }
  if (tp == 0) return 0.0;
  // 2PR/(P+R) = 2TP/(2TP+FP+FN)
  return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

double robustness_metric(std::span<const LabeledScore> rows, std::string_view perturbed_tag,
                         double threshold) {
  std::vector<LabeledScore> subset;
  for (const auto& r : rows) {
    if (r.perturbation == perturbed_tag) subset.push_back(r);
  }
  if (subset.empty()) {
    throw EvaluationError("no rows tagged '" + std::string(perturbed_tag) + "'");
  }
  return balanced_accuracy(subset, threshold).b_acc;
}

double focal_loss(double p_fake, Label label, double gamma) {
  const double p = std::clamp(p_fake, kFocalClamp, 1.0 - kFocalClamp);
  const double p_true = label == Label::Fake ? p : 1.0 - p;
  return -std::pow(1.0 - p_true, gamma) * std::log(p_true);
}

double focal_loss_grad(double p_true, double gamma) {
  const double q = 1.0 - p_true;
  double grad = -std::pow(q, gamma) / p_true;
  if (gamma != 0.0) grad += gamma * std::pow(q, gamma - 1.0) * std::log(p_true);
  return grad;
}

MetricReport evaluate(std::span<const LabeledScore> rows, double threshold, bool with_auc) {
  MetricReport report;
  report.overall = slice_metrics(rows, threshold, with_auc);

  std::map<std::string, std::vector<LabeledScore>> by_tag;
  for (const auto& r : rows) by_tag[r.perturbation].push_back(r);
  for (const auto& [tag, subset] : by_tag) {
    const Tally t = tally(subset, threshold);
    if (t.n_real == 0 || t.n_fake == 0) continue;
    report.by_perturbation.emplace_back(tag, slice_metrics(subset, threshold, with_auc));
    if (tag == kJpegRobustnessTag) report.j_rob = report.by_perturbation.back().second.acc.b_acc;
    if (tag == kResizeRobustnessTag) report.r_rob = report.by_perturbation.back().second.acc.b_acc;
  }
  return report;
}

}  // namespace dualgate
