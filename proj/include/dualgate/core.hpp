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

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace dualgate {

// ---------------------------------------------------------------------------
// Identifiers
// ---------------------------------------------------------------------------

// The five ensemble members. M1..M3 share a backbone and resolution, M4 is
// the high-resolution branch, M5 the structurally distinct backbone.
enum class ModelId { M1 = 0, M2, M3, M4, M5 };

inline constexpr std::array<ModelId, 5> kAllModels = {
    ModelId::M1, ModelId::M2, ModelId::M3, ModelId::M4, ModelId::M5};

enum class View { Orig, HFlip };

// Class index 0 is real, index 1 is fake.
enum class Label { Real = 0, Fake = 1 };

enum class FusionStrategy { WeightedLogit, EqualLogit, ProbAverage, MajorityVote };

std::string_view to_string(ModelId id);
std::string_view to_string(View view);
std::string_view to_string(Label label);
std::string_view to_string(FusionStrategy strategy);

// Parsers throw InputError on unknown names.
ModelId parse_model_id(std::string_view text);
View parse_view(std::string_view text);
Label parse_label(std::string_view text);
FusionStrategy parse_strategy(std::string_view text);

using ModelSet = std::set<ModelId>;
using WeightMap = std::map<ModelId, double>;

// ---------------------------------------------------------------------------
// Records and configuration
// ---------------------------------------------------------------------------

inline constexpr std::string_view kCleanTag = "clean";

// One model's raw binary logits for one view of one sample.
struct LogitRecord {
  std::string sample_id;
  ModelId model_id = ModelId::M1;
  View view = View::Orig;
  double logit_real = 0.0;
  double logit_fake = 0.0;
  std::optional<Label> label;
  std::string perturbation{kCleanTag};
  std::optional<std::string> group;
};

// Ratios at each level of the weight tree. Each group is normalized on its
// own, so (7, 3) and (70, 30) are equivalent.
struct WeightHierarchy {
  std::array<double, 3> route_a_internal{0.75, 0.15, 0.10};  // M1, M2, M3
  std::array<double, 2> route_a_vs_b{7.0, 3.0};              // Route A, M4
  std::array<double, 2> dino_vs_c{7.0, 3.0};                 // M1..M4, M5
};

struct Gate1Params {
  bool enabled = true;
  ModelId outlier_model = ModelId::M4;
  int quorum = 3;
  ModelSet jury{ModelId::M1, ModelId::M2, ModelId::M3, ModelId::M5};
};

struct Gate2Params {
  bool enabled = true;
  double tau1 = 8.0;   // confidence threshold on witness_a
  double tau2 = 3.0;   // confidence threshold on witness_b
  double delta = 2.5;  // correction magnitude
  ModelId witness_a = ModelId::M4;
  ModelId witness_b = ModelId::M5;
  // When Gate-1 has excluded a model, test Gate-2's opposition condition
  // against the post-exclusion fused logit (true) or the pre-exclusion one.
  bool after_gate1_exclusion = true;
};

struct EnsembleConfig {
  WeightMap weights;
  ModelSet tta_models{ModelId::M3, ModelId::M4};
  Gate1Params gate1;
  Gate2Params gate2;
  FusionStrategy strategy = FusionStrategy::WeightedLogit;
};

// Tolerance on the sum of ensemble weights.
inline constexpr double kWeightSumTolerance = 1e-9;

void validate(const WeightHierarchy& h);
void validate(const Gate1Params& p);
void validate(const Gate2Params& p);
// Checks weights, gate parameters, and that gate models have weights.
void validate(const EnsembleConfig& cfg);

// Weights from the published hierarchy, TTA on M3/M4, both gates enabled.
EnsembleConfig default_config();

// ---------------------------------------------------------------------------
// Evidence and predictions
// ---------------------------------------------------------------------------

struct BranchEvidence {
  ModelId model_id = ModelId::M1;
  double d = 0.0;
  bool included = true;
};

struct Prediction {
  std::string sample_id;
  double fused_d = 0.0;
  double fake_score = 0.5;
  Label predicted_label = Label::Real;
  bool gate1_fired = false;
  bool gate2_fired = false;
  ModelSet excluded_models;
  // False for majority voting, which yields a label but no graded score.
  bool has_score = true;
};

// Normalizes each ratio group and multiplies down the tree. Throws
// ConfigError when a group is all zero or has a negative/non-finite entry.
WeightMap derive_weights(const WeightHierarchy& h);

// logit_fake - logit_real. Throws InputError on non-finite input.
double directional_evidence(double logit_real, double logit_fake);

// Strict sign: zero evidence supports neither direction.
constexpr int strict_sign(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

// Numerically stable 1 / (1 + exp(-x)).
double logistic(double x);

// Ties at exactly 0.5 resolve to real.
constexpr Label label_for_score(double fake_score) {
  return fake_score > 0.5 ? Label::Fake : Label::Real;
}

}  // namespace dualgate
