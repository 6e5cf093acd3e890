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

#ifndef VOICEGUARD_ERRORS_H_
#define VOICEGUARD_ERRORS_H_

#include <stdexcept>
#include <string>

namespace voiceguard {

// Every failure raised by the library derives from Error so that batch
// drivers can isolate per-utterance problems with a single catch.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define VOICEGUARD_DEFINE_ERROR(Name)  \
  class Name : public Error {          \
   public:                             \
    using Error::Error;                \
  }

VOICEGUARD_DEFINE_ERROR(InvalidArgument);
VOICEGUARD_DEFINE_ERROR(IoError);
VOICEGUARD_DEFINE_ERROR(ParseError);
VOICEGUARD_DEFINE_ERROR(UnsupportedFormat);
VOICEGUARD_DEFINE_ERROR(EmptyInput);
VOICEGUARD_DEFINE_ERROR(InsufficientOverlap);
VOICEGUARD_DEFINE_ERROR(DegenerateInput);
VOICEGUARD_DEFINE_ERROR(MissingGender);
VOICEGUARD_DEFINE_ERROR(InsufficientSpeech);
VOICEGUARD_DEFINE_ERROR(DegenerateEmbedding);
VOICEGUARD_DEFINE_ERROR(InsufficientTrials);
VOICEGUARD_DEFINE_ERROR(MismatchedSpeakers);
VOICEGUARD_DEFINE_ERROR(UndefinedDominance);
VOICEGUARD_DEFINE_ERROR(DegenerateReference);
VOICEGUARD_DEFINE_ERROR(MissingCounterpart);

#undef VOICEGUARD_DEFINE_ERROR

}  // namespace voiceguard

#endif  // VOICEGUARD_ERRORS_H_
