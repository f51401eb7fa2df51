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

#include "dualgate/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "dualgate/error.hpp"

namespace dualgate {

namespace {

void require_finite(const ModelOutput& o) {
  if (!std::isfinite(o.logit_real) || !std::isfinite(o.logit_fake)) {
    throw InputError("non-finite logits for " + std::string(to_string(o.model_id)));
  }
}

// Checks that weights and outputs cover the same models and returns the
// weights in output order.
std::vector<double> aligned_weights(std::span<const ModelOutput> outputs,
                                    const WeightMap& weights) {
  if (outputs.empty()) throw InputError("fusion needs at least one model output");
  std::vector<double> aligned;
  aligned.reserve(outputs.size());
  ModelSet seen;
  double total = 0.0;
  for (const auto& o : outputs) {
    require_finite(o);
    if (!seen.insert(o.model_id).second) {
      throw InputError("duplicate output for " + std::string(to_string(o.model_id)));
    }
    auto it = weights.find(o.model_id);
    if (it == weights.end()) {
      throw ConfigError("no weight for model " + std::string(to_string(o.model_id)));
    }
    aligned.push_back(it->second);
    total += it->second;
  }
  for (const auto& [model, w] : weights) {
    if (seen.count(model) == 0) {
      throw ConfigError("weight given for absent model " + std::string(to_string(model)));
    }
  }
  if (std::abs(total - 1.0) > kWeightSumTolerance) {
    throw ConfigError("fusion weights must sum to 1 over the present models");
  }
  return aligned;
}

}  // namespace

double softmax_fake(double logit_real, double logit_fake) {
  const double m = std::max(logit_real, logit_fake);
  const double er = std::exp(logit_real - m);
  const double ef = std::exp(logit_fake - m);
  return ef / (er + ef);
}

ModelOutput tta_merge(ModelId model, std::span<const LogitPair> views) {
  if (views.empty()) {
    throw InputError("tta_merge: no views for " + std::string(to_string(model)));
  }
  double sum_real = 0.0;
  double sum_fake = 0.0;
  for (const auto& v : views) {
    if (!std::isfinite(v.logit_real) || !std::isfinite(v.logit_fake)) {
      throw InputError("tta_merge: non-finite logits for " + std::string(to_string(model)));
    }
    sum_real += v.logit_real;
    sum_fake += v.logit_fake;
  }
  const auto n = static_cast<double>(views.size());
  return ModelOutput{model, sum_real / n, sum_fake / n};
}

FusedOutput fuse_weighted_logit(std::span<const ModelOutput> outputs,
                                const WeightMap& weights) {
  const auto w = aligned_weights(outputs, weights);
  FusedOutput fused;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    fused.z_real += w[i] * outputs[i].logit_real;
    fused.z_fake += w[i] * outputs[i].logit_fake;
  }
  return fused;
}

double fuse_prob_average(std::span<const ModelOutput> outputs, const WeightMap& weights) {
  const auto w = aligned_weights(outputs, weights);
  double score = 0.0;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    score += w[i] * logistic(outputs[i].d());
  }
  return std::clamp(score, 0.0, 1.0);
}

WeightMap equal_weights(std::span<const ModelOutput> outputs) {
  WeightMap w;
  const double share = 1.0 / static_cast<double>(outputs.size());
  for (const auto& o : outputs) w[o.model_id] = share;
  return w;
}

FusedOutput fuse_equal_logit(std::span<const ModelOutput> outputs) {
  if (outputs.empty()) throw InputError("fusion needs at least one model output");
  FusedOutput fused = fuse_weighted_logit(outputs, equal_weights(outputs));
  fused.strategy = FusionStrategy::EqualLogit;
  return fused;
}

Label fuse_majority_vote(std::span<const ModelOutput> outputs) {
  if (outputs.empty()) throw InputError("fusion needs at least one model output");
  int fake_votes = 0;
  int real_votes = 0;
  for (const auto& o : outputs) {
    require_finite(o);
    switch (strict_sign(o.d())) {
      case 1: ++fake_votes; break;
      case -1: ++real_votes; break;
      default: break;
    }
  }
  return fake_votes > real_votes ? Label::Fake : Label::Real;
}

}  // namespace dualgate
