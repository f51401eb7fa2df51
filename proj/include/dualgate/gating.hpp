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

#include <map>
#include <span>
#include <string>
#include <vector>

#include "dualgate/core.hpp"
#include "dualgate/fusion.hpp"

namespace dualgate {

using EvidenceMap = std::map<ModelId, BranchEvidence>;

struct Gate1Decision {
  bool fired = false;
  // Direction (+1 fake, -1 real) held by the agreeing jury members when a
  // quorum exists against the outlier; 0 otherwise.
  int jury_direction = 0;
  ModelSet agreeing_jury;
};

struct Gate2Decision {
  bool fired = false;
  double corrected_d = 0.0;
};

// Audit trail of one decision.
struct GateTrace {
  bool gate1_fired = false;
  bool gate2_fired = false;
  ModelSet agreeing_jury;
  double pre_correction_d = 0.0;
  double post_correction_d = 0.0;
};

struct Decision {
  Prediction prediction;
  GateTrace trace;
  std::vector<BranchEvidence> evidences;  // in model order, after gating
  std::vector<std::string> warnings;
};

// Outlier suppression predicate. Ignores p.enabled. Throws InputError when
// the outlier model or a jury member has no evidence.
Gate1Decision gate1_evaluate(const EvidenceMap& evidences, const Gate1Params& p);

// Consensus correction: shifts fused_d by delta toward the witnesses when
// both are confident, agree, and the fusion points the other way. Ignores
// p.enabled.
Gate2Decision gate2_evaluate(double d_a, double d_b, double fused_d, const Gate2Params& p);

// Weights re-normalized after dropping `excluded`. ConfigError if nothing
// with positive weight remains.
WeightMap renormalize_without(const WeightMap& weights, const ModelSet& excluded);

// Full decision for one sample: TTA merge, evidence, Gate-1, fusion,
// Gate-2, score. `records` are all records of one sample under one
// perturbation tag. Models not carrying a weight in cfg are ignored.
Decision decide(std::span<const LogitRecord> records, const EnsembleConfig& cfg);

// Merges the records of one sample into one ModelOutput per weighted model,
// in model order. TTA models average every view they supply; others use the
// orig view. Missing TTA views are reported through `warnings`.
std::vector<ModelOutput> merge_views(std::span<const LogitRecord> records,
                                     const EnsembleConfig& cfg,
                                     std::vector<std::string>* warnings = nullptr);

}  // namespace dualgate
