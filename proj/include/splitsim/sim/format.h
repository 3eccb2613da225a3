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

#ifndef SPLITSIM_SIM_FORMAT_H_
#define SPLITSIM_SIM_FORMAT_H_

#include <string>

namespace splitsim::sim {

// Shortest decimal text that parses back to exactly the same double.
std::string FormatDouble(double v);
// Strict parse of a whole token; throws ArgumentError otherwise.
double ParseDouble(const std::string& token);

}  // namespace splitsim::sim

#endif  // SPLITSIM_SIM_FORMAT_H_
