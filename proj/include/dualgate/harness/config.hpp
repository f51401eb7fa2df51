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

#include "dualgate/core.hpp"

namespace dualgate::harness {

// JSON document mirroring EnsembleConfig. Absent keys keep the defaults of
// default_config(); "weights" and "hierarchy" are alternatives. Unknown keys
// and malformed values raise ConfigError.
EnsembleConfig config_from_json(const std::string& text);
std::string config_to_json(const EnsembleConfig& cfg);

// IoError when unreadable.
EnsembleConfig load_config(const std::string& path);

}  // namespace dualgate::harness
