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

#include "dualgate/harness/synth.hpp"

#include <cmath>
#include <cstdio>

#include "dualgate/error.hpp"
#include "dualgate/random.hpp"

namespace dualgate::harness {

namespace {

std::string sample_name(char prefix, int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%06d", prefix, index);
  return buf;
}

}  // namespace

void validate(const SynthSpec& spec) {
  if (spec.n_real < 1 || spec.n_fake < 1) throw ConfigError("synth: counts must be >= 1");
  auto rate_ok = [](double r) { return r >= 0.0 && r <= 1.0; };
  if (!rate_ok(spec.outlier_rate) || !rate_ok(spec.consensus_override_rate)) {
    throw ConfigError("synth: rates must lie in [0, 1]");
  }
  if (spec.outlier_rate + spec.consensus_override_rate > 1.0 + 1e-12) {
    throw ConfigError("synth: outlier_rate + consensus_override_rate must not exceed 1");
  }
  for (double v : {spec.evidence_scale, spec.noise_stddev, spec.outlier_magnitude,
                   spec.override_magnitude, spec.witness_a_magnitude, spec.witness_b_magnitude}) {
    if (!std::isfinite(v) || v < 0.0) throw ConfigError("synth: magnitudes must be finite and >= 0");
  }
  if (spec.perturbations.empty()) throw ConfigError("synth: need at least one perturbation tag");
}

Cohort synth_cohort(const SynthSpec& spec) {
  validate(spec);
  rng::Engine engine(spec.seed);
  std::vector<LogitRecord> records;
  records.reserve(static_cast<std::size_t>(spec.n_real + spec.n_fake) * spec.perturbations.size() * 7);

  for (const auto& tag : spec.perturbations) {
    for (int i = 0; i < spec.n_real + spec.n_fake; ++i) {
      const bool fake = i >= spec.n_real;
      const double s = fake ? 1.0 : -1.0;
      const std::string id = fake ? sample_name('f', i - spec.n_real) : sample_name('r', i);

      // Fixed draw count per sample keeps streams aligned across settings.
      const double u = rng::uniform01(engine);
      std::array<double, 5> d{};
      for (double& v : d) v = s * spec.evidence_scale + spec.noise_stddev * rng::standard_normal(engine);

      const char* group = kNominalGroup;
      if (u < spec.outlier_rate) {
        group = kOutlierGroup;
        d[3] = -s * spec.outlier_magnitude;
      } else if (u < spec.outlier_rate + spec.consensus_override_rate) {
        group = kOverrideGroup;
        d[0] = d[1] = d[2] = -s * spec.override_magnitude;
        d[3] = s * spec.witness_a_magnitude;
        d[4] = s * spec.witness_b_magnitude;
      }

      for (std::size_t m = 0; m < kAllModels.size(); ++m) {
        LogitRecord r;
        r.sample_id = id;
        r.model_id = kAllModels[m];
        r.logit_real = -d[m] / 2.0;
        r.logit_fake = d[m] / 2.0;
        r.label = fake ? Label::Fake : Label::Real;
        r.perturbation = tag;
        r.group = group;
        records.push_back(r);
        if (spec.tta_models.count(r.model_id) != 0) {
          r.view = View::HFlip;
          records.push_back(r);
        }
      }
    }
  }
  return Cohort::build(std::move(records), LoadOptions{true, ModelSet(kAllModels.begin(), kAllModels.end())});
}

}  // namespace dualgate::harness
