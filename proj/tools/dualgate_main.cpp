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

// dualgate command-line driver.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dualgate/core.hpp"
#include "dualgate/distort.hpp"
#include "dualgate/error.hpp"
#include "dualgate/harness/cohort.hpp"
#include "dualgate/harness/config.hpp"
#include "dualgate/harness/manifest.hpp"
#include "dualgate/harness/report.hpp"
#include "dualgate/harness/runner.hpp"
#include "dualgate/harness/synth.hpp"
#include "dualgate/metrics.hpp"
#include "dualgate/random.hpp"

namespace fs = std::filesystem;
using namespace dualgate;
using namespace dualgate::harness;

namespace {

struct EnsembleFlags {
  std::string config_path;
  std::optional<std::string> strategy;
  std::optional<std::string> gate1;
  std::optional<std::string> gate2;
  std::optional<double> tau1;
  std::optional<double> tau2;
  std::optional<double> delta;
  std::optional<int> quorum;
};

void add_ensemble_flags(CLI::App* cmd, EnsembleFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON ensemble configuration");
  cmd->add_option("--strategy", f.strategy,
                  "weighted_logit | equal_logit | prob_average | majority_vote");
  cmd->add_option("--gate1", f.gate1, "on | off")->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--gate2", f.gate2, "on | off")->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--tau1", f.tau1, "Gate-2 threshold on the first witness");
  cmd->add_option("--tau2", f.tau2, "Gate-2 threshold on the second witness");
  cmd->add_option("--delta", f.delta, "Gate-2 correction magnitude");
  cmd->add_option("--quorum", f.quorum, "Gate-1 jury quorum");
}

EnsembleConfig resolve_config(const EnsembleFlags& f) {
  EnsembleConfig cfg = f.config_path.empty() ? default_config() : load_config(f.config_path);
  if (f.strategy) cfg.strategy = parse_strategy(*f.strategy);
  if (f.gate1) cfg.gate1.enabled = *f.gate1 == "on";
  if (f.gate2) cfg.gate2.enabled = *f.gate2 == "on";
  if (f.tau1) cfg.gate2.tau1 = *f.tau1;
  if (f.tau2) cfg.gate2.tau2 = *f.tau2;
  if (f.delta) cfg.gate2.delta = *f.delta;
  if (f.quorum) cfg.gate1.quorum = *f.quorum;
  // Gates are only defined for logit-space strategies.
  if (f.strategy && !f.gate1 && !f.gate2 &&
      (cfg.strategy == FusionStrategy::ProbAverage || cfg.strategy == FusionStrategy::MajorityVote)) {
    cfg.gate1.enabled = false;
    cfg.gate2.enabled = false;
  }
  validate(cfg);
  return cfg;
}

Cohort read_cohorts(const std::vector<std::string>& paths, bool lenient) {
  LoadOptions opts;
  opts.strict = !lenient;
  ValidationReport report;
  Cohort c = load_cohorts(paths, opts, &report);
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
  return c;
}

void write_table(const Table& table, ReportFormat format, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << (format == ReportFormat::Csv ? to_csv(table) : to_markdown(table));
    return;
  }
  emit_report(table, format, path);
}

bool is_image(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".ppm" || (ext == ".png" && png_supported());
}

std::vector<fs::path> list_images(const std::string& dir) {
  std::error_code ec;
  fs::directory_iterator it(dir, ec);
  if (ec) throw IoError(dir, "cannot read image directory");
  std::vector<fs::path> out;
  for (const auto& entry : it) {
    if (entry.is_regular_file() && is_image(entry.path())) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(dir.string(), "cannot create directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Logit-space detector ensemble with outlier and consensus gates"};
  app.require_subcommand(1);

  EnsembleFlags flags;
  bool lenient = false;
  std::string output;
  std::string format_text = "csv";
  std::vector<std::string> cohort_paths;

  auto* fuse = app.add_subcommand("fuse", "Fuse a cohort into per-sample predictions");
  fuse->add_option("--cohort", cohort_paths, "Cohort JSONL file(s)")->required();
  fuse->add_option("--output,-o", output, "Predictions CSV (default stdout)");
  fuse->add_flag("--lenient", lenient, "Drop incomplete samples instead of failing");
  add_ensemble_flags(fuse, flags);

  std::string predictions_path;
  double threshold = 0.5;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Compute metrics from predictions");
  evaluate_cmd->add_option("--predictions", predictions_path, "Predictions CSV from fuse")->required();
  evaluate_cmd->add_option("--output,-o", output, "Report file (default stdout)");
  evaluate_cmd->add_option("--format", format_text, "csv | markdown");
  evaluate_cmd->add_option("--threshold", threshold, "Fake-score decision threshold");

  auto* ablate = app.add_subcommand("ablate", "Run the fusion/gating ablation table");
  ablate->add_option("--cohort", cohort_paths, "Labeled cohort JSONL file(s)")->required();
  ablate->add_option("--output,-o", output, "Report file (default stdout)");
  ablate->add_option("--format", format_text, "csv | markdown");
  ablate->add_flag("--lenient", lenient, "Drop incomplete samples instead of failing");
  add_ensemble_flags(ablate, flags);

  std::string sweep_kind;
  auto* sweep_cmd = app.add_subcommand("sweep", "Balanced accuracy across a perturbation grid");
  sweep_cmd->add_option("--kind", sweep_kind, "jpeg | resize | blur")->required();
  sweep_cmd->add_option("--cohort", cohort_paths, "Per-intensity cohort JSONL file(s)")->required();
  sweep_cmd->add_option("--output,-o", output, "Report file (default stdout)");
  sweep_cmd->add_option("--format", format_text, "csv | markdown");
  sweep_cmd->add_flag("--lenient", lenient, "Drop incomplete samples instead of failing");
  add_ensemble_flags(sweep_cmd, flags);

  std::string input_dir;
  std::string output_dir;
  int hops = 0;
  std::uint64_t seed = 0;
  AugParams aug;
  std::string distort_sweep;
  auto* distort_cmd = app.add_subcommand("distort", "Degrade a directory of PPM/PNG images");
  distort_cmd->add_option("--input", input_dir, "Source image directory")->required();
  distort_cmd->add_option("--output", output_dir, "Destination directory")->required();
  distort_cmd->add_option("--hops", hops, "Chain-degradation hops (0 = one sampled plan)");
  distort_cmd->add_option("--seed", seed, "Random seed");
  distort_cmd->add_option("--max-distortions", aug.max_distortions, "Groups per plan");
  distort_cmd->add_option("--num-levels", aug.num_levels, "Severity levels");
  distort_cmd->add_option("--aug-prob", aug.aug_prob, "Probability of applying a plan");
  distort_cmd->add_option("--sweep", distort_sweep,
                          "Write one subdirectory per intensity of jpeg | resize | blur");

  SynthSpec spec;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic labeled cohort");
  synth->add_option("--output,-o", output, "Cohort JSONL (default stdout)");
  synth->add_option("--n-real", spec.n_real, "Real samples");
  synth->add_option("--n-fake", spec.n_fake, "Fake samples");
  synth->add_option("--scale", spec.evidence_scale, "Base evidence magnitude");
  synth->add_option("--noise", spec.noise_stddev, "Per-model evidence noise stddev");
  synth->add_option("--outlier-rate", spec.outlier_rate, "Fraction with a flipped M4");
  synth->add_option("--override-rate", spec.consensus_override_rate,
                    "Fraction where M1-M3 outvote strong M4/M5");
  synth->add_option("--seed", spec.seed, "Random seed");
  synth->add_option("--perturbations", spec.perturbations, "Perturbation tags to emit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (fuse->parsed()) {
      const auto cfg = resolve_config(flags);
      std::vector<std::string> warnings;
      const auto rows = run_ensemble(read_cohorts(cohort_paths, lenient), cfg, &warnings);
      for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
      write_table(predictions_table(rows), ReportFormat::Csv, output);
    } else if (evaluate_cmd->parsed()) {
      const auto format = parse_report_format(format_text);
      const auto rows = parse_predictions(read_text_file(predictions_path));
      const bool scored = std::all_of(rows.begin(), rows.end(),
                                      [](const auto& r) { return r.prediction.has_score; });
      const auto report = evaluate(to_labeled_scores(rows), threshold, scored);
      write_table(metric_table(report), format, output);
    } else if (ablate->parsed()) {
      const auto format = parse_report_format(format_text);
      const auto cfg = resolve_config(flags);
      const auto table = run_ablation(read_cohorts(cohort_paths, lenient), cfg);
      write_table(ablation_table(table), format, output);
    } else if (sweep_cmd->parsed()) {
      const auto format = parse_report_format(format_text);
      const auto kind = parse_sweep_kind(sweep_kind);
      const auto cfg = resolve_config(flags);
      const auto rows = run_sweep(read_cohorts(cohort_paths, lenient), cfg, kind);
      write_table(sweep_table(kind, rows), format, output);
    } else if (distort_cmd->parsed()) {
      validate(aug);
      if (hops < 0) throw InputError("--hops must be >= 0");
      const auto codec = make_default_codec();
      const auto images = list_images(input_dir);
      if (images.empty()) throw InputError("no .ppm or .png images in " + input_dir);
      ensure_dir(output_dir);

      if (!distort_sweep.empty()) {
        const auto kind = parse_sweep_kind(distort_sweep);
        for (const auto& path : images) {
          for (const auto& point : sweep(read_image(path.string()), kind, codec.get())) {
            const fs::path dir = fs::path(output_dir) / sweep_tag(kind, point.intensity);
            ensure_dir(dir);
            write_image((dir / path.filename()).string(), point.image);
          }
        }
      } else {
        const std::string manifest_path = (fs::path(output_dir) / "manifest.jsonl").string();
        std::ofstream manifest(manifest_path);
        if (!manifest) throw IoError(manifest_path, "cannot open manifest for writing");
        for (std::size_t i = 0; i < images.size(); ++i) {
          const auto& path = images[i];
          const std::string name = path.filename().string();
          rng::Engine engine(rng::splitmix64(seed + i));
          const auto img = read_image(path.string());
          PixelBuffer out = img;
          if (hops > 0) {
            const auto chain = chain_degrade(img, hops, aug, engine, codec.get());
            out = chain.image;
            for (std::size_t h = 0; h < chain.hops.size(); ++h) {
              manifest << manifest_line(name, static_cast<int>(h), chain.hops[h]) << "\n";
            }
          } else if (auto plan = sample_plan(aug, engine)) {
            out = apply_plan(img, *plan, codec.get());
            manifest << manifest_line(name, 0, *plan) << "\n";
          }
          write_image((fs::path(output_dir) / path.filename()).string(), out);
        }
        if (!manifest) throw IoError(manifest_path, "write failed");
      }
    } else if (synth->parsed()) {
      const auto cohort = synth_cohort(spec);
      if (output.empty() || output == "-") {
        write_cohort(std::cout, cohort);
      } else {
        save_cohort(output, cohort);
      }
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
