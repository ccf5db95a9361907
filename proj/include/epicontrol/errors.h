// Copyright 2026 The Epicontrol Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef EPICONTROL_ERRORS_H_
#define EPICONTROL_ERRORS_H_

#include <stdexcept>
#include <string>

namespace epicontrol {

// Invalid user-supplied configuration. `field()` names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// A caller violated an operation's precondition (shape mismatch, stale cache,
// wrong action-vector length, ...).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Non-finite values reached a numeric routine.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace epicontrol

#endif  // EPICONTROL_ERRORS_H_
