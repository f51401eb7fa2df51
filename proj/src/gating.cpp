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

#include "dualgate/gating.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "dualgate/error.hpp"

namespace dualgate {

namespace {

std::string name(ModelId m) { return std::string(to_string(m)); }

const BranchEvidence& evidence_for(const EvidenceMap& evidences, ModelId m,
                                   const char* who) {
  auto it = evidences.find(m);
  if (it == evidences.end()) {
    throw InputError(std::string(who) + ": missing evidence for " + name(m));
  }
  return it->second;
}

// Keeps the logit of a probability finite for scores that round to 0 or 1.
double score_to_logit(double score) {
  constexpr double kEps = 1e-15;
  const double p = std::clamp(score, kEps, 1.0 - kEps);
  return std::log(p) - std::log1p(-p);
}

}  // namespace

Gate1Decision gate1_evaluate(const EvidenceMap& evidences, const Gate1Params& p) {
  const int outlier_sign = strict_sign(evidence_for(evidences, p.outlier_model, "gate1").d);
  ModelSet positive;
  ModelSet negative;
  for (ModelId juror : p.jury) {
    switch (strict_sign(evidence_for(evidences, juror, "gate1").d)) {
      case 1: positive.insert(juror); break;
      case -1: negative.insert(juror); break;
      default: break;
    }
  }

  Gate1Decision out;
  if (outlier_sign == 0) return out;
  // Only the direction opposite to the outlier can trigger exclusion.
  const int direction = -outlier_sign;
  const ModelSet& agreeing = direction > 0 ? positive : negative;
  if (agreeing.size() >= static_cast<std::size_t>(p.quorum)) {
    out.fired = true;
    out.jury_direction = direction;
    out.agreeing_jury = agreeing;
  }
  return out;
}

Gate2Decision gate2_evaluate(double d_a, double d_b, double fused_d, const Gate2Params& p) {
  if (!std::isfinite(d_a) || !std::isfinite(d_b) || !std::isfinite(fused_d)) {
    throw InputError("gate2: non-finite input");
  }
  const int direction = strict_sign(d_a);
  const bool fires = direction != 0 && strict_sign(d_b) == direction &&
                     std::abs(d_a) >= p.tau1 && std::abs(d_b) >= p.tau2 &&
                     strict_sign(fused_d) == -direction;
  if (!fires) return Gate2Decision{false, fused_d};
  return Gate2Decision{true, fused_d + direction * p.delta};
}

WeightMap renormalize_without(const WeightMap& weights, const ModelSet& excluded) {
  WeightMap kept;
  double total = 0.0;
  for (const auto& [model, w] : weights) {
    if (excluded.count(model) != 0) continue;
    kept[model] = w;
    total += w;
  }
  if (!(total > 0.0)) {
    throw ConfigError("no positive weight remains after excluding models");
  }
  for (auto& [model, w] : kept) w /= total;
  return kept;
}

std::vector<ModelOutput> merge_views(std::span<const LogitRecord> records,
                                     const EnsembleConfig& cfg,
                                     std::vector<std::string>* warnings) {
  if (records.empty()) throw InputError("decide: no records");
  const std::string& sample_id = records.front().sample_id;

  // Index into (model, view).
  std::map<ModelId, std::array<std::optional<LogitPair>, 2>> by_model;
  for (const auto& r : records) {
    if (r.sample_id != sample_id) {
      throw InputError("decide: records mix samples '" + sample_id + "' and '" +
                       r.sample_id + "'");
    }
    auto& slot = by_model[r.model_id][static_cast<std::size_t>(r.view)];
    if (slot) {
      throw InputError("decide: duplicate " + std::string(to_string(r.view)) +
                       " view for " + name(r.model_id) + " on sample '" + sample_id + "'");
    }
    slot = LogitPair{r.logit_real, r.logit_fake};
  }

  std::vector<ModelOutput> outputs;
  outputs.reserve(cfg.weights.size());
  for (const auto& [model, weight] : cfg.weights) {
    auto it = by_model.find(model);
    if (it == by_model.end()) {
      throw InputError("decide: sample '" + sample_id + "' has no records for " + name(model));
    }
    const auto& [orig, hflip] = it->second;
    std::vector<LogitPair> views;
    if (cfg.tta_models.count(model) != 0) {
      if (orig) views.push_back(*orig);
      if (hflip) views.push_back(*hflip);
      if (views.size() == 1 && warnings != nullptr) {
        warnings->push_back("sample '" + sample_id + "': TTA model " + name(model) +
                            " supplied a single view");
      }
    } else {
      if (!orig) {
        throw InputError("decide: sample '" + sample_id + "' has no orig view for " +
                         name(model));
      }
      views.push_back(*orig);
    }
    outputs.push_back(tta_merge(model, views));
  }
  return outputs;
}

Decision decide(std::span<const LogitRecord> records, const EnsembleConfig& cfg) {
  validate(cfg);
  Decision out;
  auto outputs = merge_views(records, cfg, &out.warnings);
  out.prediction.sample_id = records.front().sample_id;

  EvidenceMap evidences;
  for (const auto& o : outputs) {
    evidences[o.model_id] =
        BranchEvidence{o.model_id, directional_evidence(o.logit_real, o.logit_fake), true};
  }

  Prediction& pred = out.prediction;
  switch (cfg.strategy) {
    case FusionStrategy::ProbAverage: {
      pred.fake_score = fuse_prob_average(outputs, cfg.weights);
      pred.fused_d = score_to_logit(pred.fake_score);
      pred.predicted_label = label_for_score(pred.fake_score);
      out.trace.pre_correction_d = out.trace.post_correction_d = pred.fused_d;
      break;
    }
    case FusionStrategy::MajorityVote: {
      pred.predicted_label = fuse_majority_vote(outputs);
      pred.has_score = false;
      int margin = 0;
      for (const auto& o : outputs) margin += strict_sign(o.d());
      pred.fused_d = margin;
      pred.fake_score = pred.predicted_label == Label::Fake ? 1.0 : 0.0;
      out.trace.pre_correction_d = out.trace.post_correction_d = pred.fused_d;
      break;
    }
    case FusionStrategy::WeightedLogit:
    case FusionStrategy::EqualLogit: {
      const WeightMap base_weights = cfg.strategy == FusionStrategy::EqualLogit
                                         ? equal_weights(outputs)
                                         : cfg.weights;
      WeightMap weights = base_weights;
      if (cfg.gate1.enabled) {
        const auto g1 = gate1_evaluate(evidences, cfg.gate1);
        out.trace.agreeing_jury = g1.agreeing_jury;
        if (g1.fired) {
          out.trace.gate1_fired = true;
          pred.excluded_models.insert(cfg.gate1.outlier_model);
          evidences[cfg.gate1.outlier_model].included = false;
          weights = renormalize_without(base_weights, pred.excluded_models);
        }
      }

      std::vector<ModelOutput> included;
      for (const auto& o : outputs) {
        if (pred.excluded_models.count(o.model_id) == 0) included.push_back(o);
      }
      const double fused_d = fuse_weighted_logit(included, weights).fused_d();
      out.trace.pre_correction_d = fused_d;
      double final_d = fused_d;

      if (cfg.gate2.enabled) {
        // Witness evidences are the original ones, even for an excluded model.
        const double d_a = evidences.at(cfg.gate2.witness_a).d;
        const double d_b = evidences.at(cfg.gate2.witness_b).d;
        double tested_d = fused_d;
        if (!cfg.gate2.after_gate1_exclusion && out.trace.gate1_fired) {
          tested_d = fuse_weighted_logit(outputs, base_weights).fused_d();
        }
        const auto g2 = gate2_evaluate(d_a, d_b, tested_d, cfg.gate2);
        if (g2.fired) {
          out.trace.gate2_fired = true;
          final_d = fused_d + strict_sign(d_a) * cfg.gate2.delta;
        }
      }
      out.trace.post_correction_d = final_d;
      pred.fused_d = final_d;
      pred.fake_score = logistic(final_d);
      pred.predicted_label = label_for_score(pred.fake_score);
      break;
    }
  }

  pred.gate1_fired = out.trace.gate1_fired;
  pred.gate2_fired = out.trace.gate2_fired;
  for (const auto& [model, ev] : evidences) out.evidences.push_back(ev);
  return out;
}

}  // namespace dualgate
