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

#include <optional>
#include <string>
#include <vector>

#include "dualgate/core.hpp"
#include "dualgate/distort.hpp"
#include "dualgate/harness/cohort.hpp"
#include "dualgate/harness/report.hpp"
#include "dualgate/metrics.hpp"

namespace dualgate::harness {

struct PredictionRow {
  std::string perturbation{kCleanTag};
  std::optional<Label> label;
  std::optional<std::string> group;
  Prediction prediction;
};

// decide() over every sample, sorted by (perturbation, sample_id). Warnings
// from TTA merging are appended to `warnings` when given.
std::vector<PredictionRow> run_ensemble(const Cohort& cohort, const EnsembleConfig& cfg,
                                        std::vector<std::string>* warnings = nullptr);

// Full-precision predictions table (one row per prediction).
Table predictions_table(const std::vector<PredictionRow>& rows);
// Inverse of predictions_table applied to CSV text.
std::vector<PredictionRow> parse_predictions(const std::string& csv_text);

// EvaluationError when any row is unlabeled.
std::vector<LabeledScore> to_labeled_scores(const std::vector<PredictionRow>& rows);

Table metric_table(const MetricReport& report);

// ---------------------------------------------------------------------------
// Ablation
// ---------------------------------------------------------------------------

struct AblationCell {
  std::optional<double> auc;  // absent for majority voting
  double f1 = 0.0;
  double b_acc = 0.0;
};

struct AblationRow {
  std::string configuration;
  AblationCell clean;
  AblationCell robust;
};

struct AblationTable {
  std::vector<AblationRow> rows;
};

// Variant configurations in table order. Gate rows are left out when the
// base weights lack a model the gate needs.
std::vector<std::pair<std::string, EnsembleConfig>> ablation_configs(const EnsembleConfig& base);

// Evaluates every variant on the "clean" rows and on all other tags pooled
// as the robust split. EvaluationError when the cohort is unlabeled or a
// split is missing.
AblationTable run_ablation(const Cohort& cohort, const EnsembleConfig& base);

Table ablation_table(const AblationTable& table);

// ---------------------------------------------------------------------------
// Robustness sweeps
// ---------------------------------------------------------------------------

struct SweepRow {
  double intensity = 0.0;
  std::string tag;
  std::size_t n_samples = 0;
  ClassAccuracy acc;
};

// B.Acc per grid intensity, reading the rows tagged sweep_tag(kind, v).
// EvaluationError when any grid point has no rows.
std::vector<SweepRow> run_sweep(const Cohort& cohort, const EnsembleConfig& cfg, SweepKind kind);

Table sweep_table(SweepKind kind, const std::vector<SweepRow>& rows);

// Intensity as printed in sweep reports ("100", "0.75", "1.0").
std::string format_sweep_intensity(SweepKind kind, double intensity);

}  // namespace dualgate::harness
