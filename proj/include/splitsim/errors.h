// Copyright 2026 The splitsim Authors
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

#ifndef SPLITSIM_ERRORS_H_
#define SPLITSIM_ERRORS_H_

#include <stdexcept>
#include <string>

namespace splitsim {

// Index outside the valid range (split points, layer indices).
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Tensor or layer shapes that do not line up.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Operation invoked in the wrong state (e.g. backward without a tape).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// NaN/Inf where finite values are required.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Client/server boundary mismatch during a training turn.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller broke a documented precondition of an algorithm step.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class InfeasibleClientError : public std::runtime_error {
 public:
  InfeasibleClientError(int client_id, const std::string& what)
      : std::runtime_error(what), client_id_(client_id) {}
  int client_id() const { return client_id_; }

 private:
  int client_id_;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A subcommand needs an artifact that an earlier subcommand produces.
class DependencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace splitsim

#endif  // SPLITSIM_ERRORS_H_
