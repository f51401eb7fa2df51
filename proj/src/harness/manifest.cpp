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

#include "dualgate/harness/manifest.hpp"

#include <sstream>

#include <json.hpp>

#include "dualgate/error.hpp"

namespace dualgate::harness {

using nlohmann::json;

std::string manifest_line(const std::string& image, int hop, const DistortionPlan& plan) {
  json steps = json::array();
  const auto realized = realize_plan(plan);
  for (const auto& r : realized) {
    json step = {{"group", std::string(to_string(r.group))}, {"severity", r.severity}};
    switch (r.group) {
      case DistortionGroup::Blur: step["sigma"] = r.value; break;
      case DistortionGroup::Noise:
        step["stddev"] = r.value;
        step["noise_seed"] = r.noise_seed;
        break;
      case DistortionGroup::Jpeg: step["quality"] = static_cast<int>(r.value); break;
      case DistortionGroup::Brightness: step["offset"] = r.value; break;
      case DistortionGroup::Contrast: step["gain"] = r.value; break;
      case DistortionGroup::ColorShift: step["offsets"] = r.channel_offsets; break;
      case DistortionGroup::Spatial:
        step["dx_frac"] = r.spatial.dx_frac;
        step["dy_frac"] = r.spatial.dy_frac;
        step["rotation_deg"] = r.spatial.rotation_deg;
        break;
    }
    steps.push_back(std::move(step));
  }
  json line = {{"image", image}, {"hop", hop}, {"seed", plan.seed},
               {"num_levels", plan.num_levels}, {"steps", steps}};
  return line.dump();
}

std::vector<DistortionPlan> parse_manifest(const std::string& text) {
  std::vector<DistortionPlan> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json obj = json::parse(line);
      DistortionPlan plan;
      plan.seed = obj.at("seed").get<std::uint64_t>();
      plan.num_levels = obj.at("num_levels").get<int>();
      for (const auto& s : obj.at("steps")) {
        plan.steps.push_back(DistortionStep{parse_group(s.at("group").get<std::string>()),
                                            s.at("severity").get<int>()});
      }
      out.push_back(std::move(plan));
    } catch (const json::exception& e) {
      throw InputError("manifest line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace dualgate::harness
