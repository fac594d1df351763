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

#ifndef LAUNCHSIM_UNITS_H_
#define LAUNCHSIM_UNITS_H_

#include <cstdint>

namespace launchsim {

// Byte counts are signed so that accounting underflow is detectable.
using Bytes = std::int64_t;

// Simulated time in microseconds. Reports convert to milliseconds.
using Micros = std::int64_t;

inline constexpr Bytes kKiB = 1024;
inline constexpr Bytes kMiB = 1024 * kKiB;
inline constexpr Bytes kGiB = 1024 * kMiB;
inline constexpr Bytes kPageSize = 4 * kKiB;

inline constexpr Micros kMicrosPerMilli = 1000;
inline constexpr Micros kMicrosPerSecond = 1000 * kMicrosPerMilli;

constexpr Micros MillisToMicros(std::int64_t ms) { return ms * kMicrosPerMilli; }
constexpr double MicrosToMillis(Micros us) {
  return static_cast<double>(us) / static_cast<double>(kMicrosPerMilli);
}

constexpr Bytes PagesFor(Bytes bytes) {
  return (bytes + kPageSize - 1) / kPageSize;
}

constexpr Bytes AlignDown(Bytes value, Bytes align) {
  return value - value % align;
}

constexpr Bytes AlignUp(Bytes value, Bytes align) {
  return AlignDown(value + align - 1, align);
}

}  // namespace launchsim

#endif  // LAUNCHSIM_UNITS_H_
