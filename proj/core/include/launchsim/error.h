// Copyright 2026 The launchsim Authors
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

#ifndef LAUNCHSIM_ERROR_H_
#define LAUNCHSIM_ERROR_H_

#include <stdexcept>
#include <string>
#include <utility>

namespace launchsim {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad device configuration or out-of-domain numeric argument.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed input. `line` is 1-based, 0 when not line oriented.
class ParseError : public Error {
 public:
  ParseError(int line, std::string field, const std::string& message)
      : Error(Format(line, field, message)),
        line_(line),
        field_(std::move(field)),
        message_(message) {}

  int line() const { return line_; }
  const std::string& field() const { return field_; }
  const std::string& message() const { return message_; }

 private:
  static std::string Format(int line, const std::string& field,
                            const std::string& message) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    if (!field.empty()) out += "field '" + field + "': ";
    return out + message;
  }

  int line_;
  std::string field_;
  std::string message_;
};

// Identifier that names nothing (app, file, segment range).
class ReferenceError : public Error {
 public:
  using Error::Error;
};

// Caller broke a documented precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

// Memory accounting broke mid-simulation.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace launchsim

#endif  // LAUNCHSIM_ERROR_H_
