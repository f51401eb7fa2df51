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

#include <cstdint>
#include <string>
#include <vector>

#include "dualgate/core.hpp"
#include "dualgate/harness/cohort.hpp"

namespace dualgate::harness {

// Group tags written on synthetic records.
inline constexpr const char* kNominalGroup = "nominal";
inline constexpr const char* kOutlierGroup = "outlier";
inline constexpr const char* kOverrideGroup = "override";

// Generator for cohorts with the two failure patterns the gates target.
// Evidence is s * evidence_scale + N(0, noise_stddev²) for ground-truth
// direction s (+1 fake, -1 real), emitted as logits (-d/2, +d/2).
struct SynthSpec {
  int n_real = 1000;
  int n_fake = 1000;
  double evidence_scale = 2.0;
  double noise_stddev = 0.0;
  // Each sample is an outlier with probability outlier_rate, an override
  // with probability consensus_override_rate, nominal otherwise; the two
  // rates must sum to at most 1.
  double outlier_rate = 0.0;
  double consensus_override_rate = 0.0;
  std::uint64_t seed = 0;

  // Outlier: M4 evidence becomes -s * outlier_magnitude.
  double outlier_magnitude = 9.0;
  // Override: M1..M3 become -s * override_magnitude, M4 and M5 become
  // s * witness_a_magnitude and s * witness_b_magnitude.
  double override_magnitude = 12.0;
  double witness_a_magnitude = 9.0;
  double witness_b_magnitude = 8.0;

  std::vector<std::string> perturbations{std::string(kCleanTag)};
  // Models that receive an hflip copy of their orig record.
  ModelSet tta_models{ModelId::M3, ModelId::M4};
};

void validate(const SynthSpec& spec);

// Deterministic given spec.seed. Sample ids are "r000000"... for real and
// "f000000"... for fake samples; group records the injected pattern.
Cohort synth_cohort(const SynthSpec& spec);

}  // namespace dualgate::harness
