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

#include <string>
#include <vector>

#include "dualgate/distort.hpp"

namespace dualgate::harness {

// One JSON object per line: {"image", "hop", "seed", "num_levels", "steps":
// [{"group", "severity", ...resolved parameters}]}. Single plans use hop 0.
std::string manifest_line(const std::string& image, int hop, const DistortionPlan& plan);

// Reads the plans back (resolved parameters are informational only).
std::vector<DistortionPlan> parse_manifest(const std::string& text);

}  // namespace dualgate::harness
