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

#include "dualgate/harness/cohort.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "dualgate/error.hpp"

namespace dualgate::harness {

namespace {

using nlohmann::json;

const std::set<std::string> kKnownFields = {"sample_id", "model_id",   "view",
                                            "logit_real", "logit_fake", "label",
                                            "perturbation", "group"};

std::string describe_key(const LogitRecord& r) {
  return "(sample_id=" + r.sample_id + ", model_id=" + std::string(to_string(r.model_id)) +
         ", view=" + std::string(to_string(r.view)) + ", perturbation=" + r.perturbation + ")";
}

std::string required_string(const json& obj, const char* field) {
  auto it = obj.find(field);
  if (it == obj.end()) throw InputError(std::string("missing field '") + field + "'");
  if (!it->is_string()) throw InputError(std::string("field '") + field + "' must be a string");
  return it->get<std::string>();
}

double required_number(const json& obj, const char* field) {
  auto it = obj.find(field);
  if (it == obj.end()) throw InputError(std::string("missing field '") + field + "'");
  if (!it->is_number()) throw InputError(std::string("field '") + field + "' must be a number");
  const double v = it->get<double>();
  if (!std::isfinite(v)) throw InputError(std::string("field '") + field + "' must be finite");
  return v;
}

std::optional<std::string> optional_string(const json& obj, const char* field) {
  auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw InputError(std::string("field '") + field + "' must be a string");
  return it->get<std::string>();
}

LogitRecord parse_record(const json& obj, std::set<std::string>& unknown) {
  if (!obj.is_object()) throw InputError("record must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    if (kKnownFields.count(key) == 0) unknown.insert(key);
  }
  LogitRecord r;
  r.sample_id = required_string(obj, "sample_id");
  if (r.sample_id.empty()) throw InputError("sample_id must not be empty");
  r.model_id = parse_model_id(required_string(obj, "model_id"));
  if (auto view = optional_string(obj, "view")) r.view = parse_view(*view);
  r.logit_real = required_number(obj, "logit_real");
  r.logit_fake = required_number(obj, "logit_fake");
  if (auto label = optional_string(obj, "label")) r.label = parse_label(*label);
  if (auto tag = optional_string(obj, "perturbation")) {
    if (tag->empty()) throw InputError("perturbation must not be empty");
    r.perturbation = *tag;
  }
  r.group = optional_string(obj, "group");
  return r;
}

}  // namespace

Cohort Cohort::build(std::vector<LogitRecord> records, const LoadOptions& options,
                     ValidationReport* report) {
  if (records.empty()) throw InputError("empty cohort");

  using Key = std::tuple<std::string, ModelId, View, std::string>;
  std::set<Key> keys;
  ModelSet seen;
  for (const auto& r : records) {
    if (!std::isfinite(r.logit_real) || !std::isfinite(r.logit_fake)) {
      throw InputError("non-finite logits for " + describe_key(r));
    }
    if (!keys.emplace(r.sample_id, r.model_id, r.view, r.perturbation).second) {
      throw InputError("duplicate record key " + describe_key(r));
    }
    seen.insert(r.model_id);
  }
  const ModelSet models = options.models.value_or(seen);

  // Coverage per sample and label per sample_id.
  std::map<SampleKey, ModelSet> coverage;
  std::map<std::string, std::set<Label>> labels;
  for (const auto& r : records) {
    coverage[SampleKey{r.perturbation, r.sample_id}].insert(r.model_id);
    if (r.label) labels[r.sample_id].insert(*r.label);
  }

  std::set<SampleKey> bad_keys;
  std::set<std::string> bad_ids;
  std::vector<std::string> problems;
  for (const auto& [key, covered] : coverage) {
    std::string missing;
    for (ModelId m : models) {
      if (covered.count(m) == 0) missing += (missing.empty() ? "" : ",") + std::string(to_string(m));
    }
    if (!missing.empty()) {
      bad_keys.insert(key);
      problems.push_back("sample '" + key.sample_id + "' (" + key.perturbation +
                         ") lacks models " + missing);
    }
  }
  for (const auto& [id, set] : labels) {
    if (set.size() > 1) {
      bad_ids.insert(id);
      problems.push_back("sample '" + id + "' has conflicting labels");
    }
  }

  if (!problems.empty()) {
    if (options.strict) {
      std::ostringstream os;
      os << problems.size() << " invalid sample(s): ";
      for (std::size_t i = 0; i < problems.size() && i < 5; ++i) {
        os << (i ? "; " : "") << problems[i];
      }
      if (problems.size() > 5) os << "; ...";
      throw InputError(os.str());
    }
    std::vector<LogitRecord> kept;
    std::set<std::string> dropped;
    for (auto& r : records) {
      const SampleKey key{r.perturbation, r.sample_id};
      if (bad_keys.count(key) != 0 || bad_ids.count(r.sample_id) != 0) {
        dropped.insert(key.perturbation + "/" + key.sample_id);
        continue;
      }
      kept.push_back(std::move(r));
    }
    if (report != nullptr) {
      report->dropped.insert(report->dropped.end(), dropped.begin(), dropped.end());
      for (const auto& p : problems) report->warnings.push_back("dropped: " + p);
    }
    records = std::move(kept);
    if (records.empty()) throw InputError("empty cohort after dropping invalid samples");
  }

  Cohort cohort;
  cohort.records_ = std::move(records);
  cohort.models_ = models;
  return cohort;
}

std::map<SampleKey, std::vector<LogitRecord>> Cohort::samples() const {
  std::map<SampleKey, std::vector<LogitRecord>> out;
  for (const auto& r : records_) out[SampleKey{r.perturbation, r.sample_id}].push_back(r);
  return out;
}

std::vector<std::string> Cohort::perturbations() const {
  std::set<std::string> tags;
  for (const auto& r : records_) tags.insert(r.perturbation);
  return {tags.begin(), tags.end()};
}

bool Cohort::labeled() const {
  for (const auto& r : records_) {
    if (!r.label) return false;
  }
  return !records_.empty();
}

Cohort parse_cohort(std::istream& in, const LoadOptions& options, const std::string& source,
                    ValidationReport* report) {
  std::vector<LogitRecord> records;
  std::set<std::string> unknown;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(parse_record(json::parse(line), unknown));
    } catch (const json::exception& e) {
      throw InputError(source + ":" + std::to_string(line_no) + ": malformed record: " + e.what());
    } catch (const InputError& e) {
      throw InputError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (report != nullptr) {
    for (const auto& field : unknown) {
      report->warnings.push_back(source + ": ignoring unknown field '" + field + "'");
    }
  }
  try {
    return Cohort::build(std::move(records), options, report);
  } catch (const InputError& e) {
    throw InputError(source + ": " + e.what());
  }
}

Cohort load_cohort(const std::string& path, const LoadOptions& options, ValidationReport* report) {
  return load_cohorts({path}, options, report);
}

Cohort load_cohorts(const std::vector<std::string>& paths, const LoadOptions& options,
                    ValidationReport* report) {
  if (paths.size() == 1) {
    std::ifstream in(paths.front());
    if (!in) throw IoError(paths.front(), "cannot open cohort file");
    return parse_cohort(in, options, paths.front(), report);
  }
  std::stringstream merged;
  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) throw IoError(path, "cannot open cohort file");
    merged << in.rdbuf() << '\n';
  }
  return parse_cohort(merged, options, "merged cohort", report);
}

std::string record_to_json(const LogitRecord& r) {
  json obj;
  obj["sample_id"] = r.sample_id;
  obj["model_id"] = std::string(to_string(r.model_id));
  obj["view"] = std::string(to_string(r.view));
  obj["logit_real"] = r.logit_real;
  obj["logit_fake"] = r.logit_fake;
  if (r.label) obj["label"] = std::string(to_string(*r.label));
  obj["perturbation"] = r.perturbation;
  if (r.group) obj["group"] = *r.group;
  return obj.dump();
}

void write_cohort(std::ostream& out, const Cohort& cohort) {
  for (const auto& r : cohort.records()) out << record_to_json(r) << '\n';
}

void save_cohort(const std::string& path, const Cohort& cohort) {
  std::ofstream out(path);
  if (!out) throw IoError(path, "cannot open for writing");
  write_cohort(out, cohort);
  if (!out) throw IoError(path, "write failed");
}

}  // namespace dualgate::harness
