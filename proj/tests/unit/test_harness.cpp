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

#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "dualgate/error.hpp"
#include "dualgate/harness/cohort.hpp"
#include "dualgate/harness/config.hpp"
#include "dualgate/harness/manifest.hpp"
#include "dualgate/harness/report.hpp"
#include "dualgate/harness/runner.hpp"
#include "dualgate/harness/synth.hpp"
#include "dualgate/metrics.hpp"

using namespace dualgate;
using namespace dualgate::harness;

namespace {

std::string line(const std::string& id, const std::string& model, double d,
                 const std::string& extra = "") {
  std::ostringstream os;
  os << R"({"sample_id":")" << id << R"(","model_id":")" << model << R"(","logit_real":)"
     << -d / 2 << R"(,"logit_fake":)" << d / 2 << extra << "}";
  return os.str();
}

std::string five_lines(const std::string& id, const std::string& extra = "") {
  std::string out;
  for (const char* m : {"M1", "M2", "M3", "M4", "M5"}) out += line(id, m, 1.0, extra) + "\n";
  return out;
}

Cohort parse(const std::string& text, LoadOptions opts = {}, ValidationReport* rep = nullptr) {
  std::istringstream in(text);
  return parse_cohort(in, opts, "test.jsonl", rep);
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

EnsembleConfig gates(bool g1, bool g2) {
  auto cfg = default_config();
  cfg.gate1.enabled = g1;
  cfg.gate2.enabled = g2;
  return cfg;
}

double b_acc_of(const Cohort& c, const EnsembleConfig& cfg,
                const std::optional<std::string>& group = std::nullopt) {
  std::vector<PredictionRow> rows;
  for (auto& r : run_ensemble(c, cfg)) {
    if (!group || r.group == group) rows.push_back(r);
  }
  return balanced_accuracy(to_labeled_scores(rows)).b_acc;
}

}  // namespace

TEST_CASE("load cohort examples") {
  CHECK(error_of([] { parse(""); }).find("empty cohort") != std::string::npos);
  CHECK(error_of([] { parse("\n  \n"); }).find("empty cohort") != std::string::npos);

  const auto c = parse(five_lines("a"));
  CHECK(c.records().size() == 5);
  CHECK(c.models().size() == 5);
  CHECK(c.samples().size() == 1);
  CHECK_FALSE(c.labeled());

  const auto dup = error_of([] { parse(five_lines("a") + line("a", "M2", 3.0)); });
  CHECK(dup.find("duplicate") != std::string::npos);
  CHECK(dup.find("sample_id=a") != std::string::npos);
  CHECK(dup.find("model_id=M2") != std::string::npos);

  const auto bad = error_of([] { parse(five_lines("a") + "\n{not json\n"); });
  CHECK(bad.find("test.jsonl:7") != std::string::npos);
  CHECK(error_of([] { parse(line("a", "M9", 1.0)); }).find("test.jsonl:1") != std::string::npos);
  CHECK_THROWS_AS(parse(R"({"sample_id":"a","model_id":"M1","logit_real":1})"), InputError);
}

TEST_CASE("strict and lenient validation") {
  const std::string text = five_lines("a") + line("b", "M1", 1.0) + "\n";
  CHECK_THROWS_AS(parse(text), InputError);

  ValidationReport rep;
  LoadOptions lenient;
  lenient.strict = false;
  const auto c = parse(text, lenient, &rep);
  CHECK(c.samples().size() == 1);
  REQUIRE(rep.dropped.size() == 1);
  CHECK(rep.dropped[0].find("b") != std::string::npos);

  const std::string conflict = five_lines("a", R"(,"label":"fake")") +
                               line("a2", "M1", 1, R"(,"label":"real")") + "\n";
  std::string labels;
  for (const char* m : {"M1", "M2", "M3", "M4"}) labels += line("c", m, 1, R"(,"label":"real")") + "\n";
  labels += line("c", "M5", 1, R"(,"label":"fake")") + "\n";
  CHECK(error_of([&] { parse(labels); }).find("conflicting labels") != std::string::npos);
  (void)conflict;

  LoadOptions declared;
  declared.models = ModelSet{ModelId::M1, ModelId::M2};
  CHECK(parse(line("x", "M1", 1) + "\n" + line("x", "M2", 1) + "\n", declared).models().size() == 2);
}

TEST_CASE("unknown fields warn once") {
  ValidationReport rep;
  parse(five_lines("a", R"(,"extra":1)") + five_lines("b", R"(,"extra":2)"), {}, &rep);
  REQUIRE(rep.warnings.size() == 1);
  CHECK(rep.warnings[0].find("extra") != std::string::npos);
}

TEST_CASE("cohort write and load round trip") {
  SynthSpec spec;
  spec.n_real = 5;
  spec.n_fake = 4;
  spec.noise_stddev = 0.7;
  spec.outlier_rate = 0.3;
  spec.seed = 4;
  const auto c = synth_cohort(spec);
  std::ostringstream out;
  write_cohort(out, c);
  const auto back = parse(out.str());
  REQUIRE(back.records().size() == c.records().size());
  for (std::size_t i = 0; i < c.records().size(); ++i) {
    const auto& a = c.records()[i];
    const auto& b = back.records()[i];
    CHECK(a.sample_id == b.sample_id);
    CHECK(a.logit_real == b.logit_real);
    CHECK(a.logit_fake == b.logit_fake);
    CHECK(a.label == b.label);
    CHECK(a.group == b.group);
    CHECK(a.view == b.view);
  }
  CHECK_THROWS_AS(load_cohort("/nonexistent/cohort.jsonl"), IoError);
}

TEST_CASE("run_ensemble is independent of record order") {
  SynthSpec spec;
  spec.n_real = 40;
  spec.n_fake = 40;
  spec.noise_stddev = 3.0;
  spec.outlier_rate = 0.2;
  spec.consensus_override_rate = 0.2;
  spec.perturbations = {"clean", "jpeg_qf90"};
  spec.seed = 12;
  const auto c = synth_cohort(spec);
  auto records = c.records();
  std::mt19937_64 gen(1);
  std::shuffle(records.begin(), records.end(), gen);
  const auto shuffled = Cohort::build(records, LoadOptions{});
  const auto a = run_ensemble(c, default_config());
  const auto b = run_ensemble(shuffled, default_config());
  REQUIRE(a.size() == 160);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].prediction.sample_id == b[i].prediction.sample_id);
    CHECK(a[i].perturbation == b[i].perturbation);
    CHECK(a[i].prediction.fused_d == b[i].prediction.fused_d);
  }

  const auto single = parse(five_lines("only"));
  CHECK(run_ensemble(single, default_config()).size() == 1);
}

TEST_CASE("synthetic cohort examples") {
  SynthSpec spec;
  spec.n_real = 50;
  spec.n_fake = 50;
  spec.seed = 3;

  const auto clean = synth_cohort(spec);
  CHECK(clean.labeled());
  CHECK(b_acc_of(clean, gates(false, false)) == 1.0);

  spec.outlier_rate = 1.0;
  const auto outliers = synth_cohort(spec);
  for (const auto& r : run_ensemble(outliers, gates(true, false))) {
    CHECK(r.prediction.gate1_fired);
    CHECK(r.group == std::optional<std::string>(kOutlierGroup));
  }
  CHECK(b_acc_of(outliers, gates(true, false)) == 1.0);
  CHECK(b_acc_of(outliers, gates(false, false)) < 1.0);

  spec.outlier_rate = 0.0;
  spec.consensus_override_rate = 1.0;
  const auto override = synth_cohort(spec);
  CHECK(b_acc_of(override, gates(false, false)) == 0.0);
  CHECK(b_acc_of(override, gates(false, true)) == 1.0);
  for (const auto& r : run_ensemble(override, gates(false, false))) {
    const double s = r.label == Label::Fake ? 1.0 : -1.0;
    CHECK(r.prediction.fused_d == doctest::Approx(-1.59 * s));
  }
  for (const auto& r : run_ensemble(override, gates(false, true))) {
    const double s = r.label == Label::Fake ? 1.0 : -1.0;
    CHECK(r.prediction.fused_d == doctest::Approx(0.91 * s));
  }

  SynthSpec bad;
  bad.outlier_rate = 0.7;
  bad.consensus_override_rate = 0.7;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = SynthSpec{};
  bad.n_real = 0;
  CHECK_THROWS_AS(validate(bad), ConfigError);
}

TEST_CASE("synthetic cohort determinism and gate counts") {
  SynthSpec spec;
  spec.n_real = 100;
  spec.n_fake = 100;
  spec.outlier_rate = 0.15;
  spec.consensus_override_rate = 0.1;
  spec.seed = 77;
  const auto a = synth_cohort(spec);
  const auto b = synth_cohort(spec);
  std::ostringstream sa, sb;
  write_cohort(sa, a);
  write_cohort(sb, b);
  CHECK(sa.str() == sb.str());

  std::size_t failures = 0;
  for (const auto& r : run_ensemble(a, gates(false, false))) {
    if (r.group != std::optional<std::string>(kNominalGroup)) {
      ++failures;
      CHECK(r.prediction.predicted_label != *r.label);
    } else {
      CHECK(r.prediction.predicted_label == *r.label);
    }
  }
  CHECK(failures > 0);
  CHECK(b_acc_of(a, gates(true, true), std::string(kNominalGroup)) == 1.0);
  CHECK(b_acc_of(a, gates(true, false), std::string(kOutlierGroup)) == 1.0);
  CHECK(b_acc_of(a, gates(false, true), std::string(kOverrideGroup)) == 1.0);
  CHECK(b_acc_of(a, gates(true, true)) > b_acc_of(a, gates(false, false)));
}

TEST_CASE("ablation") {
  SynthSpec spec;
  spec.n_real = 60;
  spec.n_fake = 60;
  spec.noise_stddev = 1.0;
  spec.outlier_rate = 0.1;
  spec.consensus_override_rate = 0.1;
  spec.perturbations = {"clean", "jpeg_qf90"};
  spec.seed = 5;
  const auto c = synth_cohort(spec);
  const auto t = run_ablation(c, default_config());
  REQUIRE(t.rows.size() == 7);
  CHECK(t.rows[0].configuration == "majority_vote");
  CHECK_FALSE(t.rows[0].clean.auc.has_value());
  CHECK_FALSE(t.rows[0].robust.auc.has_value());
  for (std::size_t i = 1; i < t.rows.size(); ++i) CHECK(t.rows[i].clean.auc.has_value());

  const auto find = [&](const std::string& name) {
    return *std::find_if(t.rows.begin(), t.rows.end(),
                         [&](const auto& r) { return r.configuration == name; });
  };
  CHECK(find("full").clean.b_acc >= find("weighted_logit").clean.b_acc);

  std::vector<PredictionRow> clean;
  for (auto& r : run_ensemble(c, gates(false, false))) {
    if (r.perturbation == "clean") clean.push_back(r);
  }
  const auto scores = to_labeled_scores(clean);
  const auto wl = find("weighted_logit");
  CHECK(wl.clean.b_acc == balanced_accuracy(scores).b_acc);
  CHECK(*wl.clean.auc == auc(scores));
  CHECK(wl.clean.f1 == f1(scores));

  const auto table = ablation_table(t);
  CHECK(table.columns.size() == 7);
  CHECK(std::holds_alternative<std::monostate>(table.rows[0][1]));

  CHECK_THROWS_AS(run_ablation(synth_cohort(SynthSpec{}), default_config()), EvaluationError);
  CHECK_THROWS_AS(run_ablation(parse(five_lines("a")), default_config()), EvaluationError);
}

TEST_CASE("ablation on a one-model cohort") {
  std::string text;
  std::mt19937_64 gen(2);
  std::normal_distribution<double> z(0.0, 2.0);
  for (int i = 0; i < 30; ++i) {
    const bool fake = i % 2 == 0;
    const double d = (fake ? 1 : -1) + z(gen);
    for (const char* tag : {"clean", "resize_0.9"}) {
      text += line("s" + std::to_string(i), "M5", d,
                   std::string(R"(,"label":")") + (fake ? "fake" : "real") +
                       R"(","perturbation":")" + tag + "\"") +
              "\n";
    }
  }
  auto cfg = default_config();
  cfg.weights = {{ModelId::M5, 1.0}};
  cfg.tta_models = {};
  cfg.gate1.enabled = false;
  cfg.gate2.enabled = false;
  const auto t = run_ablation(parse(text), cfg);
  REQUIRE(t.rows.size() == 4);
  for (const auto& r : t.rows) {
    CHECK(r.clean.b_acc == t.rows[0].clean.b_acc);
    CHECK(r.clean.f1 == t.rows[0].clean.f1);
    CHECK(r.robust.b_acc == t.rows[0].robust.b_acc);
  }
}

TEST_CASE("report emission") {
  Table t;
  t.columns = {"name", "value", "count"};
  CHECK(to_csv(t) == "name,value,count\n");
  t.rows.push_back({std::string("plain"), 0.12345, 3LL});
  t.rows.push_back({std::string("with, comma \"quoted\""), std::monostate{}, 10LL});
  const auto csv = to_csv(t);
  const auto parsed = parse_csv(csv);
  REQUIRE(parsed.size() == 3);
  CHECK(parsed[0] == std::vector<std::string>{"name", "value", "count"});
  CHECK(parsed[1] == std::vector<std::string>{"plain", "0.1235", "3"});
  CHECK(parsed[2] == std::vector<std::string>{"with, comma \"quoted\"", "", "10"});

  const auto md = to_markdown(t);
  CHECK(std::count(md.begin(), md.end(), '\n') == 4);
  CHECK(md.find("--") != std::string::npos);
  CHECK(parse_report_format("markdown") == ReportFormat::Markdown);
  CHECK_THROWS_AS(parse_report_format("xml"), InputError);

  const auto path = (std::filesystem::temp_directory_path() / "dualgate_report.csv").string();
  emit_report(t, ReportFormat::Csv, path);
  CHECK(read_text_file(path) == csv);
  std::remove(path.c_str());
  CHECK_THROWS_AS(emit_report(t, ReportFormat::Csv, "/nonexistent/dir/out.csv"), IoError);
}

TEST_CASE("predictions round trip and byte-identical reports") {
  SynthSpec spec;
  spec.n_real = 20;
  spec.n_fake = 20;
  spec.noise_stddev = 2.0;
  spec.outlier_rate = 0.2;
  spec.consensus_override_rate = 0.2;
  spec.seed = 21;
  const auto rows = run_ensemble(synth_cohort(spec), default_config());
  const auto csv = to_csv(predictions_table(rows));
  CHECK(csv == to_csv(predictions_table(run_ensemble(synth_cohort(spec), default_config()))));

  const auto back = parse_predictions(csv);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].prediction.sample_id == rows[i].prediction.sample_id);
    CHECK(back[i].prediction.fused_d == rows[i].prediction.fused_d);
    CHECK(back[i].prediction.fake_score == rows[i].prediction.fake_score);
    CHECK(back[i].prediction.excluded_models == rows[i].prediction.excluded_models);
    CHECK(back[i].prediction.gate2_fired == rows[i].prediction.gate2_fired);
    CHECK(back[i].label == rows[i].label);
    CHECK(back[i].group == rows[i].group);
  }

  const auto rep = evaluate(to_labeled_scores(rows));
  CHECK(to_csv(metric_table(rep)) == to_csv(metric_table(evaluate(to_labeled_scores(back)))));
}

TEST_CASE("config round trip and validation") {
  auto cfg = default_config();
  cfg.gate2.tau1 = 7.5;
  cfg.gate1.quorum = 2;
  cfg.strategy = FusionStrategy::EqualLogit;
  const auto back = config_from_json(config_to_json(cfg));
  CHECK(back.weights == cfg.weights);
  CHECK(back.gate2.tau1 == 7.5);
  CHECK(back.gate1.quorum == 2);
  CHECK(back.strategy == FusionStrategy::EqualLogit);
  CHECK(back.tta_models == cfg.tta_models);
  CHECK(config_to_json(back) == config_to_json(cfg));

  const auto h = config_from_json(
      R"({"hierarchy":{"route_a_internal":[1,1,1],"route_a_vs_b":[1,1],"dino_vs_c":[1,1]}})");
  CHECK(h.weights.at(ModelId::M5) == doctest::Approx(0.5));
  CHECK_THROWS_AS(config_from_json(R"({"bogus":1})"), ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"gate2":{"tau1":-1}})"), ConfigError);
  CHECK_THROWS_AS(config_from_json("not json"), ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"weights":{"M1":0.5,"M2":0.2}})"), ConfigError);
}

TEST_CASE("sweep runner") {
  SynthSpec spec;
  spec.n_real = 10;
  spec.n_fake = 10;
  spec.perturbations.clear();
  for (double q : kJpegSweepQualities) spec.perturbations.push_back(sweep_tag(SweepKind::Jpeg, q));
  const auto rows = run_sweep(synth_cohort(spec), default_config(), SweepKind::Jpeg);
  REQUIRE(rows.size() == 7);
  const auto t = sweep_table(SweepKind::Jpeg, rows);
  CHECK(std::get<std::string>(t.rows[0][0]) == "100");
  CHECK(std::get<std::string>(t.rows[6][0]) == "40");
  CHECK_THROWS_AS(run_sweep(synth_cohort(spec), default_config(), SweepKind::Blur), EvaluationError);
  CHECK(format_sweep_intensity(SweepKind::Resize, 1.0) == "1.0");
  CHECK(format_sweep_intensity(SweepKind::Resize, 0.75) == "0.75");
}

TEST_CASE("manifest round trip") {
  DistortionPlan plan{12345678901234ULL, 3,
                      {{DistortionGroup::Jpeg, 2}, {DistortionGroup::Spatial, 1}}};
  const auto text = manifest_line("a.png", 0, plan) + "\n" + manifest_line("a.png", 1, DistortionPlan{}) + "\n";
  const auto plans = parse_manifest(text);
  REQUIRE(plans.size() == 2);
  CHECK(plans[0] == plan);
  CHECK(plans[1].steps.empty());
}
