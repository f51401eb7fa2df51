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

#include "dualgate/harness/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dualgate/error.hpp"

namespace dualgate::harness {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (known.count(key) == 0) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
T get_as(const json& obj, const char* key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad value for '" + std::string(key) + "' in " + where);
  }
}

ModelId model_from(const json& v, const std::string& where) {
  if (!v.is_string()) throw ConfigError("model ids in " + where + " must be strings");
  try {
    return parse_model_id(v.get<std::string>());
  } catch (const InputError& e) {
    throw ConfigError(std::string(e.what()) + " in " + where);
  }
}

ModelSet model_set_from(const json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + " must be an array of model ids");
  ModelSet out;
  for (const auto& item : v) out.insert(model_from(item, where));
  return out;
}

template <std::size_t N>
std::array<double, N> ratio_group(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != N) {
    throw ConfigError(where + " must be an array of " + std::to_string(N) + " numbers");
  }
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    if (!v[i].is_number()) throw ConfigError(where + " must hold numbers");
    out[i] = v[i].get<double>();
  }
  return out;
}

json model_set_json(const ModelSet& set) {
  json arr = json::array();
  for (ModelId m : set) arr.push_back(std::string(to_string(m)));
  return arr;
}

}  // namespace

EnsembleConfig config_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(doc, {"weights", "hierarchy", "tta_models", "strategy", "gate1", "gate2"},
                 "config");

  EnsembleConfig cfg = default_config();
  if (doc.contains("weights") && doc.contains("hierarchy")) {
    throw ConfigError("config gives both 'weights' and 'hierarchy'");
  }
  if (doc.contains("weights")) {
    const json& w = doc["weights"];
    if (!w.is_object()) throw ConfigError("'weights' must map model ids to numbers");
    cfg.weights.clear();
    for (const auto& [key, value] : w.items()) {
      if (!value.is_number()) throw ConfigError("weight of " + key + " must be a number");
      cfg.weights[model_from(json(key), "weights")] = value.get<double>();
    }
  }
  if (doc.contains("hierarchy")) {
    const json& h = doc["hierarchy"];
    reject_unknown(h, {"route_a_internal", "route_a_vs_b", "dino_vs_c"}, "hierarchy");
    WeightHierarchy hierarchy;
    if (h.contains("route_a_internal")) {
      hierarchy.route_a_internal = ratio_group<3>(h["route_a_internal"], "route_a_internal");
    }
    if (h.contains("route_a_vs_b")) hierarchy.route_a_vs_b = ratio_group<2>(h["route_a_vs_b"], "route_a_vs_b");
    if (h.contains("dino_vs_c")) hierarchy.dino_vs_c = ratio_group<2>(h["dino_vs_c"], "dino_vs_c");
    cfg.weights = derive_weights(hierarchy);
  }
  if (doc.contains("tta_models")) cfg.tta_models = model_set_from(doc["tta_models"], "tta_models");
  if (doc.contains("strategy")) {
    try {
      cfg.strategy = parse_strategy(get_as<std::string>(doc, "strategy", "config"));
    } catch (const InputError& e) {
      throw ConfigError(e.what());
    }
  }
  if (doc.contains("gate1")) {
    const json& g = doc["gate1"];
    reject_unknown(g, {"enabled", "outlier_model", "quorum", "jury"}, "gate1");
    if (g.contains("enabled")) cfg.gate1.enabled = get_as<bool>(g, "enabled", "gate1");
    if (g.contains("outlier_model")) cfg.gate1.outlier_model = model_from(g["outlier_model"], "gate1");
    if (g.contains("quorum")) cfg.gate1.quorum = get_as<int>(g, "quorum", "gate1");
    if (g.contains("jury")) cfg.gate1.jury = model_set_from(g["jury"], "gate1.jury");
  }
  if (doc.contains("gate2")) {
    const json& g = doc["gate2"];
    reject_unknown(g, {"enabled", "tau1", "tau2", "delta", "witness_a", "witness_b",
                       "after_gate1_exclusion"},
                   "gate2");
    if (g.contains("enabled")) cfg.gate2.enabled = get_as<bool>(g, "enabled", "gate2");
    if (g.contains("tau1")) cfg.gate2.tau1 = get_as<double>(g, "tau1", "gate2");
    if (g.contains("tau2")) cfg.gate2.tau2 = get_as<double>(g, "tau2", "gate2");
    if (g.contains("delta")) cfg.gate2.delta = get_as<double>(g, "delta", "gate2");
    if (g.contains("witness_a")) cfg.gate2.witness_a = model_from(g["witness_a"], "gate2");
    if (g.contains("witness_b")) cfg.gate2.witness_b = model_from(g["witness_b"], "gate2");
    if (g.contains("after_gate1_exclusion")) {
      cfg.gate2.after_gate1_exclusion = get_as<bool>(g, "after_gate1_exclusion", "gate2");
    }
  }
  validate(cfg);
  return cfg;
}

std::string config_to_json(const EnsembleConfig& cfg) {
  json doc;
  json weights = json::object();
  for (const auto& [m, w] : cfg.weights) weights[std::string(to_string(m))] = w;
  doc["weights"] = weights;
  doc["tta_models"] = model_set_json(cfg.tta_models);
  doc["strategy"] = std::string(to_string(cfg.strategy));
  doc["gate1"] = {{"enabled", cfg.gate1.enabled},
                  {"outlier_model", std::string(to_string(cfg.gate1.outlier_model))},
                  {"quorum", cfg.gate1.quorum},
                  {"jury", model_set_json(cfg.gate1.jury)}};
  doc["gate2"] = {{"enabled", cfg.gate2.enabled},
                  {"tau1", cfg.gate2.tau1},
                  {"tau2", cfg.gate2.tau2},
                  {"delta", cfg.gate2.delta},
                  {"witness_a", std::string(to_string(cfg.gate2.witness_a))},
                  {"witness_b", std::string(to_string(cfg.gate2.witness_b))},
                  {"after_gate1_exclusion", cfg.gate2.after_gate1_exclusion}};
  return doc.dump(2);
}

EnsembleConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return config_from_json(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace dualgate::harness
