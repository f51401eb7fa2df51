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

#include <stdexcept>
#include <string>

namespace dualgate {

// Base of every error thrown by the library. The CLI maps IoError to exit
// code 2 and every other subclass to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid weights, gate parameters, or a weight/model mismatch.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or incomplete input data (non-finite logits, missing models,
// bad cohort lines).
class InputError : public Error {
 public:
  using Error::Error;
};

// A metric cannot be computed on the rows given (e.g. a class is absent).
class EvaluationError : public Error {
 public:
  using Error::Error;
};

// A degradation op failed, typically inside the codec adapter. Carries the
// name of the distortion group that failed.
class DegradationError : public Error {
 public:
  DegradationError(std::string group, const std::string& what)
      : Error("degradation '" + group + "' failed: " + what),
        group_(std::move(group)) {}

  const std::string& group() const noexcept { return group_; }

 private:
  std::string group_;
};

class IoError : public Error {
 public:
  IoError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace dualgate
