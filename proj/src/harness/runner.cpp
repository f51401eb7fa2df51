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

#include "dualgate/harness/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "dualgate/error.hpp"
#include "dualgate/gating.hpp"

namespace dualgate::harness {

namespace {

std::string full_precision(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join_models(const ModelSet& models) {
  std::string out;
  for (ModelId m : models) {
    if (!out.empty()) out += ';';
    out += to_string(m);
  }
  return out;
}

ModelSet split_models(const std::string& text) {
  ModelSet out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (!item.empty()) out.insert(parse_model_id(item));
  }
  return out;
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw InputError("expected true/false, got '" + s + "'");
}

double parse_double(const std::string& s, const char* column) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InputError(std::string("bad number in column ") + column + ": '" + s + "'");
  }
}

AblationCell evaluate_split(const std::vector<PredictionRow>& rows, bool scored) {
  const auto scores = to_labeled_scores(rows);
  AblationCell cell;
  if (scored) cell.auc = auc(scores);
  cell.f1 = f1(scores);
  cell.b_acc = balanced_accuracy(scores).b_acc;
  return cell;
}

bool covers(const WeightMap& weights, const ModelSet& models) {
  return std::all_of(models.begin(), models.end(),
                     [&](ModelId m) { return weights.count(m) != 0; });
}

}  // namespace

std::vector<PredictionRow> run_ensemble(const Cohort& cohort, const EnsembleConfig& cfg,
                                        std::vector<std::string>* warnings) {
  validate(cfg);
  std::vector<PredictionRow> out;
  for (const auto& [key, records] : cohort.samples()) {
    Decision decision = decide(records, cfg);
    PredictionRow row;
    row.perturbation = key.perturbation;
    for (const auto& r : records) {
      if (r.label) row.label = r.label;
      if (r.group) row.group = r.group;
    }
    row.prediction = std::move(decision.prediction);
    if (warnings != nullptr) {
      warnings->insert(warnings->end(), decision.warnings.begin(), decision.warnings.end());
    }
    out.push_back(std::move(row));
  }
  return out;
}

Table predictions_table(const std::vector<PredictionRow>& rows) {
  Table t;
  t.columns = {"sample_id",  "perturbation",    "label",     "group",
               "fused_d",    "fake_score",      "predicted_label", "has_score",
               "gate1_fired", "gate2_fired",    "excluded_models"};
  for (const auto& r : rows) {
    const Prediction& p = r.prediction;
    t.rows.push_back({p.sample_id,
                      r.perturbation,
                      r.label ? std::string(to_string(*r.label)) : std::string(),
                      r.group.value_or(""),
                      full_precision(p.fused_d),
                      full_precision(p.fake_score),
                      std::string(to_string(p.predicted_label)),
                      std::string(p.has_score ? "true" : "false"),
                      std::string(p.gate1_fired ? "true" : "false"),
                      std::string(p.gate2_fired ? "true" : "false"),
                      join_models(p.excluded_models)});
  }
  return t;
}

std::vector<PredictionRow> parse_predictions(const std::string& csv_text) {
  const auto table = parse_csv(csv_text);
  if (table.empty()) throw InputError("predictions: empty file");
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < table[0].size(); ++i) col[table[0][i]] = i;
  for (const char* required : {"sample_id", "fused_d", "fake_score", "predicted_label"}) {
    if (col.count(required) == 0) {
      throw InputError(std::string("predictions: missing column '") + required + "'");
    }
  }
  auto field = [&](const std::vector<std::string>& row, const char* name) -> std::string {
    auto it = col.find(name);
    if (it == col.end() || it->second >= row.size()) return {};
    return row[it->second];
  };

  std::vector<PredictionRow> out;
  for (std::size_t line = 1; line < table.size(); ++line) {
    const auto& row = table[line];
    if (row.size() == 1 && row[0].empty()) continue;
    try {
      PredictionRow r;
      r.prediction.sample_id = field(row, "sample_id");
      if (auto tag = field(row, "perturbation"); !tag.empty()) r.perturbation = tag;
      if (auto label = field(row, "label"); !label.empty()) r.label = parse_label(label);
      if (auto group = field(row, "group"); !group.empty()) r.group = group;
      r.prediction.fused_d = parse_double(field(row, "fused_d"), "fused_d");
      r.prediction.fake_score = parse_double(field(row, "fake_score"), "fake_score");
      r.prediction.predicted_label = parse_label(field(row, "predicted_label"));
      if (auto v = field(row, "has_score"); !v.empty()) r.prediction.has_score = parse_bool(v);
      if (auto v = field(row, "gate1_fired"); !v.empty()) r.prediction.gate1_fired = parse_bool(v);
      if (auto v = field(row, "gate2_fired"); !v.empty()) r.prediction.gate2_fired = parse_bool(v);
      r.prediction.excluded_models = split_models(field(row, "excluded_models"));
      out.push_back(std::move(r));
    } catch (const InputError& e) {
      throw InputError("predictions line " + std::to_string(line + 1) + ": " + e.what());
    }
  }
  return out;
}

std::vector<LabeledScore> to_labeled_scores(const std::vector<PredictionRow>& rows) {
  std::vector<LabeledScore> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    if (!r.label) {
      throw EvaluationError("sample '" + r.prediction.sample_id + "' (" + r.perturbation +
                            ") has no label");
    }
    out.push_back(LabeledScore{r.prediction.sample_id, r.prediction.fake_score, *r.label,
                               r.perturbation});
  }
  return out;
}

Table metric_table(const MetricReport& report) {
  Table t;
  t.columns = {"slice", "n_real", "n_fake", "r_acc", "f_acc", "b_acc", "auc", "f1"};
  auto add = [&](const std::string& name, const SliceMetrics& m) {
    t.rows.push_back({name, static_cast<long long>(m.n_real), static_cast<long long>(m.n_fake),
                      m.acc.r_acc, m.acc.f_acc, m.acc.b_acc,
                      m.auc ? Cell(*m.auc) : Cell(std::monostate{}), m.f1});
  };
  add("overall", report.overall);
  for (const auto& [tag, m] : report.by_perturbation) add(tag, m);
  auto add_summary = [&](const char* name, const std::optional<double>& v) {
    if (!v) return;
    t.rows.push_back({std::string(name), std::monostate{}, std::monostate{}, std::monostate{},
                      std::monostate{}, *v, std::monostate{}, std::monostate{}});
  };
  add_summary("J.Rob", report.j_rob);
  add_summary("R.Rob", report.r_rob);
  return t;
}

std::vector<std::pair<std::string, EnsembleConfig>> ablation_configs(const EnsembleConfig& base) {
  auto variant = [&](FusionStrategy s, bool g1, bool g2) {
    EnsembleConfig c = base;
    c.strategy = s;
    c.gate1.enabled = g1;
    c.gate2.enabled = g2;
    return c;
  };
  ModelSet gate1_models = base.gate1.jury;
  gate1_models.insert(base.gate1.outlier_model);
  const bool gate1_ok = covers(base.weights, gate1_models);
  const bool gate2_ok = covers(base.weights, {base.gate2.witness_a, base.gate2.witness_b});

  std::vector<std::pair<std::string, EnsembleConfig>> out;
  out.emplace_back("majority_vote", variant(FusionStrategy::MajorityVote, false, false));
  out.emplace_back("prob_average", variant(FusionStrategy::ProbAverage, false, false));
  out.emplace_back("equal_logit", variant(FusionStrategy::EqualLogit, false, false));
  out.emplace_back("weighted_logit", variant(FusionStrategy::WeightedLogit, false, false));
  if (gate1_ok) {
    out.emplace_back("weighted_logit+gate1", variant(FusionStrategy::WeightedLogit, true, false));
  }
  if (gate2_ok) {
    out.emplace_back("weighted_logit+gate2", variant(FusionStrategy::WeightedLogit, false, true));
  }
  if (gate1_ok && gate2_ok) {
    out.emplace_back("full", variant(FusionStrategy::WeightedLogit, true, true));
  }
  return out;
}

AblationTable run_ablation(const Cohort& cohort, const EnsembleConfig& base) {
  if (!cohort.labeled()) throw EvaluationError("ablation needs a fully labeled cohort");
  const auto tags = cohort.perturbations();
  const bool has_clean = std::find(tags.begin(), tags.end(), kCleanTag) != tags.end();
  if (!has_clean) throw EvaluationError("ablation needs rows tagged 'clean'");
  if (tags.size() < 2) throw EvaluationError("ablation needs at least one perturbed tag");

  AblationTable table;
  for (const auto& [name, cfg] : ablation_configs(base)) {
    const auto predictions = run_ensemble(cohort, cfg);
    std::vector<PredictionRow> clean;
    std::vector<PredictionRow> robust;
    for (const auto& p : predictions) {
      (p.perturbation == kCleanTag ? clean : robust).push_back(p);
    }
    const bool scored = cfg.strategy != FusionStrategy::MajorityVote;
    table.rows.push_back(AblationRow{name, evaluate_split(clean, scored), evaluate_split(robust, scored)});
  }
  return table;
}

Table ablation_table(const AblationTable& table) {
  Table t;
  t.columns = {"configuration", "clean_auc",  "clean_f1",   "clean_b_acc",
               "robust_auc",    "robust_f1",  "robust_b_acc"};
  auto opt = [](const std::optional<double>& v) { return v ? Cell(*v) : Cell(std::monostate{}); };
  for (const auto& r : table.rows) {
    t.rows.push_back({r.configuration, opt(r.clean.auc), r.clean.f1, r.clean.b_acc,
                      opt(r.robust.auc), r.robust.f1, r.robust.b_acc});
  }
  return t;
}

std::vector<SweepRow> run_sweep(const Cohort& cohort, const EnsembleConfig& cfg, SweepKind kind) {
  const auto predictions = run_ensemble(cohort, cfg);
  std::map<std::string, std::vector<PredictionRow>> by_tag;
  for (const auto& p : predictions) by_tag[p.perturbation].push_back(p);

  std::vector<SweepRow> out;
  for (double intensity : sweep_grid(kind)) {
    const std::string tag = sweep_tag(kind, intensity);
    auto it = by_tag.find(tag);
    if (it == by_tag.end()) {
      throw EvaluationError("sweep: no cohort rows tagged '" + tag + "'");
    }
    const auto scores = to_labeled_scores(it->second);
    out.push_back(SweepRow{intensity, tag, scores.size(), balanced_accuracy(scores)});
  }
  return out;
}

std::string format_sweep_intensity(SweepKind kind, double intensity) {
  if (kind == SweepKind::Jpeg) return std::to_string(static_cast<int>(std::lround(intensity)));
  const std::string tag = sweep_tag(kind, intensity);
  return tag.substr(tag.find('_') + 1);
}

Table sweep_table(SweepKind kind, const std::vector<SweepRow>& rows) {
  Table t;
  t.columns = {"intensity", "b_acc", "r_acc", "f_acc", "n_samples"};
  for (const auto& r : rows) {
    t.rows.push_back({format_sweep_intensity(kind, r.intensity), r.acc.b_acc, r.acc.r_acc,
                      r.acc.f_acc, static_cast<long long>(r.n_samples)});
  }
  return t;
}

}  // namespace dualgate::harness
