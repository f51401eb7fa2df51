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

#include <span>

#include "dualgate/core.hpp"

namespace dualgate {

struct LogitPair {
  double logit_real = 0.0;
  double logit_fake = 0.0;
};

// A model's logits after TTA views have been merged.
struct ModelOutput {
  ModelId model_id = ModelId::M1;
  double logit_real = 0.0;
  double logit_fake = 0.0;

  double d() const { return logit_fake - logit_real; }
};

struct FusedOutput {
  double z_real = 0.0;
  double z_fake = 0.0;
  FusionStrategy strategy = FusionStrategy::WeightedLogit;

  double fused_d() const { return z_fake - z_real; }
  // softmax(z)_fake, computed as the logistic of the logit difference.
  double fake_score() const { return logistic(fused_d()); }
};

// Two-class softmax probability of the fake class, computed directly from
// the pair (max-subtracted exponentials).
double softmax_fake(double logit_real, double logit_fake);

// Component-wise mean over views. Throws InputError on an empty list or
// non-finite logits.
ModelOutput tta_merge(ModelId model, std::span<const LogitPair> views);

// z = sum_m alpha_m z^(m). The weight keys must match the output models
// exactly and sum to one; otherwise ConfigError.
FusedOutput fuse_weighted_logit(std::span<const ModelOutput> outputs,
                                const WeightMap& weights);

// sum_m alpha_m softmax(z^(m))_fake, same weight contract as above.
double fuse_prob_average(std::span<const ModelOutput> outputs, const WeightMap& weights);

// Weighted logit fusion with alpha_m = 1/M.
FusedOutput fuse_equal_logit(std::span<const ModelOutput> outputs);

// One vote per model by the sign of its evidence; zero evidence abstains.
// Ties resolve to real.
Label fuse_majority_vote(std::span<const ModelOutput> outputs);

// Uniform weights over the given models.
WeightMap equal_weights(std::span<const ModelOutput> outputs);

}  // namespace dualgate
