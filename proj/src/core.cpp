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

#include "dualgate/core.hpp"

#include <cmath>
#include <numeric>
#include <span>
#include <sstream>

#include "dualgate/error.hpp"

namespace dualgate {

namespace {

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view text, const std::array<Enum, N>& values,
                std::string_view what) {
  for (Enum v : values) {
    if (to_string(v) == text) return v;
  }
  throw InputError("unknown " + std::string(what) + " '" + std::string(text) + "'");
}

// Normalizes one level of the hierarchy.
template <std::size_t N>
std::array<double, N> normalize_group(const std::array<double, N>& ratios,
                                      std::string_view name) {
  double total = 0.0;
  for (double r : ratios) {
    if (!std::isfinite(r) || r < 0.0) {
      throw ConfigError("weight group '" + std::string(name) +
                        "' has a negative or non-finite ratio");
    }
    total += r;
  }
  if (!(total > 0.0)) {
    throw ConfigError("weight group '" + std::string(name) + "' is all zero");
  }
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = ratios[i] / total;
  return out;
}

}  // namespace

std::string_view to_string(ModelId id) {
  switch (id) {
    case ModelId::M1: return "M1";
    case ModelId::M2: return "M2";
    case ModelId::M3: return "M3";
    case ModelId::M4: return "M4";
    case ModelId::M5: return "M5";
  }
  return "?";
}

std::string_view to_string(View view) {
  return view == View::Orig ? "orig" : "hflip";
}

std::string_view to_string(Label label) {
  return label == Label::Real ? "real" : "fake";
}

std::string_view to_string(FusionStrategy strategy) {
  switch (strategy) {
    case FusionStrategy::WeightedLogit: return "weighted_logit";
    case FusionStrategy::EqualLogit: return "equal_logit";
    case FusionStrategy::ProbAverage: return "prob_average";
    case FusionStrategy::MajorityVote: return "majority_vote";
  }
  return "?";
}

ModelId parse_model_id(std::string_view text) {
  return parse_enum(text, kAllModels, "model_id");
}

View parse_view(std::string_view text) {
  return parse_enum(text, std::array{View::Orig, View::HFlip}, "view");
}

Label parse_label(std::string_view text) {
  return parse_enum(text, std::array{Label::Real, Label::Fake}, "label");
}

FusionStrategy parse_strategy(std::string_view text) {
  return parse_enum(text,
                    std::array{FusionStrategy::WeightedLogit, FusionStrategy::EqualLogit,
                               FusionStrategy::ProbAverage, FusionStrategy::MajorityVote},
                    "strategy");
}

void validate(const WeightHierarchy& h) {
  normalize_group(h.route_a_internal, "route_a_internal");
  normalize_group(h.route_a_vs_b, "route_a_vs_b");
  normalize_group(h.dino_vs_c, "dino_vs_c");
}

void validate(const Gate1Params& p) {
  if (p.jury.count(p.outlier_model) != 0) {
    throw ConfigError("gate1: outlier model " + std::string(to_string(p.outlier_model)) +
                      " must not sit on the jury");
  }
  if (p.quorum < 1 || static_cast<std::size_t>(p.quorum) > p.jury.size()) {
    throw ConfigError("gate1: quorum " + std::to_string(p.quorum) +
                      " must lie in [1, " + std::to_string(p.jury.size()) + "]");
  }
}

void validate(const Gate2Params& p) {
  for (double v : {p.tau1, p.tau2, p.delta}) {
    if (!std::isfinite(v) || v < 0.0) {
      throw ConfigError("gate2: tau1, tau2 and delta must be finite and non-negative");
    }
  }
  if (p.witness_a == p.witness_b) {
    throw ConfigError("gate2: witness_a and witness_b must differ");
  }
}

void validate(const EnsembleConfig& cfg) {
  if (cfg.weights.empty()) throw ConfigError("ensemble has no weighted models");
  double total = 0.0;
  for (const auto& [model, w] : cfg.weights) {
    if (!std::isfinite(w) || w < 0.0) {
      throw ConfigError("weight of " + std::string(to_string(model)) +
                        " must be finite and non-negative");
    }
    total += w;
  }
  if (std::abs(total - 1.0) > kWeightSumTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "ensemble weights sum to " << total << ", expected 1";
    throw ConfigError(os.str());
  }
  const bool logit_space = cfg.strategy == FusionStrategy::WeightedLogit ||
                           cfg.strategy == FusionStrategy::EqualLogit;
  if (!logit_space && (cfg.gate1.enabled || cfg.gate2.enabled)) {
    throw ConfigError("gates operate on fused logits; disable them for strategy " +
                      std::string(to_string(cfg.strategy)));
  }
  if (cfg.gate1.enabled) {
    validate(cfg.gate1);
    ModelSet needed = cfg.gate1.jury;
    needed.insert(cfg.gate1.outlier_model);
    for (ModelId m : needed) {
      if (cfg.weights.count(m) == 0) {
        throw ConfigError("gate1 references " + std::string(to_string(m)) +
                          ", which has no ensemble weight");
      }
    }
  }
  if (cfg.gate2.enabled) {
    validate(cfg.gate2);
    for (ModelId m : {cfg.gate2.witness_a, cfg.gate2.witness_b}) {
      if (cfg.weights.count(m) == 0) {
        throw ConfigError("gate2 references " + std::string(to_string(m)) +
                          ", which has no ensemble weight");
      }
    }
  }
}

EnsembleConfig default_config() {
  EnsembleConfig cfg;
  cfg.weights = derive_weights(WeightHierarchy{});
  return cfg;
}

WeightMap derive_weights(const WeightHierarchy& h) {
  const auto internal = normalize_group(h.route_a_internal, "route_a_internal");
  const auto a_vs_b = normalize_group(h.route_a_vs_b, "route_a_vs_b");
  const auto dino_vs_c = normalize_group(h.dino_vs_c, "dino_vs_c");

  const double dino_share = dino_vs_c[0];
  const double route_a_share = a_vs_b[0] * dino_share;

  WeightMap w;
  w[ModelId::M1] = internal[0] * route_a_share;
  w[ModelId::M2] = internal[1] * route_a_share;
  w[ModelId::M3] = internal[2] * route_a_share;
  w[ModelId::M4] = a_vs_b[1] * dino_share;
  w[ModelId::M5] = dino_vs_c[1];
  return w;
}

double directional_evidence(double logit_real, double logit_fake) {
  if (!std::isfinite(logit_real) || !std::isfinite(logit_fake)) {
    throw InputError("directional evidence needs finite logits");
  }
  return logit_fake - logit_real;
}

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace dualgate
