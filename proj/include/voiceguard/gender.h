// Copyright 2026 The VoiceGuard Authors.
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

#ifndef VOICEGUARD_GENDER_H_
#define VOICEGUARD_GENDER_H_

#include <string>
#include <string_view>

#include "voiceguard/errors.h"

namespace voiceguard {

enum class Gender { kMale, kFemale, kUnknown };

// Manifest spelling: M, F, U.
inline Gender parse_gender(std::string_view s) {
  if (s == "M" || s == "m" || s == "male") return Gender::kMale;
  if (s == "F" || s == "f" || s == "female") return Gender::kFemale;
  if (s == "U" || s == "u" || s == "unknown" || s.empty()) {
    return Gender::kUnknown;
  }
  throw ParseError("unknown gender label '" + std::string(s) + "'");
}

inline const char* gender_code(Gender g) {
  switch (g) {
    case Gender::kMale: return "M";
    case Gender::kFemale: return "F";
    case Gender::kUnknown: return "U";
  }
  return "U";
}

}  // namespace voiceguard

#endif  // VOICEGUARD_GENDER_H_
