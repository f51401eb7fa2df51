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

#include <compare>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dualgate/core.hpp"

namespace dualgate::harness {

// Identifies one sample under one perturbation.
struct SampleKey {
  std::string perturbation;
  std::string sample_id;

  auto operator<=>(const SampleKey&) const = default;
};

struct ValidationReport {
  std::vector<std::string> warnings;
  // Samples removed in lenient mode, as "perturbation/sample_id".
  std::vector<std::string> dropped;
};

struct LoadOptions {
  bool strict = true;
  // Models every sample must cover. Defaults to every model seen in the file.
  std::optional<ModelSet> models;
};

// A validated set of logit records: keys are unique and every sample covers
// every declared model.
class Cohort {
 public:
  Cohort() = default;

  // Validates in the given mode. Strict mode throws InputError on
  // incomplete samples or conflicting labels; lenient mode drops them and
  // records the drop in `report`. Duplicate keys always throw.
  static Cohort build(std::vector<LogitRecord> records, const LoadOptions& options,
                      ValidationReport* report = nullptr);

  const std::vector<LogitRecord>& records() const { return records_; }
  const ModelSet& models() const { return models_; }
  bool empty() const { return records_.empty(); }

  // Records grouped per sample, keys in sorted order.
  std::map<SampleKey, std::vector<LogitRecord>> samples() const;
  std::vector<std::string> perturbations() const;
  // True when every record carries a label.
  bool labeled() const;

 private:
  std::vector<LogitRecord> records_;
  ModelSet models_;
};

// Parses line-delimited JSON records. Blank lines are skipped; `source`
// names the input in error messages.
Cohort parse_cohort(std::istream& in, const LoadOptions& options, const std::string& source,
                    ValidationReport* report = nullptr);

// IoError when the file cannot be opened.
Cohort load_cohort(const std::string& path, const LoadOptions& options = {},
                   ValidationReport* report = nullptr);

// Concatenates several cohort files and validates them as one cohort.
Cohort load_cohorts(const std::vector<std::string>& paths, const LoadOptions& options = {},
                    ValidationReport* report = nullptr);

std::string record_to_json(const LogitRecord& record);
void write_cohort(std::ostream& out, const Cohort& cohort);
void save_cohort(const std::string& path, const Cohort& cohort);

}  // namespace dualgate::harness
