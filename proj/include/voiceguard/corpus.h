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

// Seeded synthetic multi-speaker corpus. Every speaker has its own F0
// register, vocal-tract length (formant scale), glottal spectral tilt,
// breathiness, jitter and formant bandwidths; utterances are random vowel
// strings with voiceless fricatives and an intonation contour.

#ifndef VOICEGUARD_CORPUS_H_
#define VOICEGUARD_CORPUS_H_

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "voiceguard/audio_io.h"
#include "voiceguard/gender.h"

namespace voiceguard {

struct SpeakerProfile {
  std::string id;
  Gender gender = Gender::kMale;
  double f0_hz = 120.0;
  // Multiplier on the male reference formant table.
  double vtl_scale = 1.0;
  // Pole of the two-pole glottal low-pass; larger is darker.
  double tilt = 0.9;
  double breathiness = 0.05;
  double jitter = 0.01;
  double bandwidth_scale = 1.0;
};

struct CorpusConfig {
  int speakers = 8;
  int utterances = 10;
  std::uint64_t seed = 1;
  int sample_rate = 16000;
  std::string prefix = "spk";
};

struct CorpusUtterance {
  std::string utterance_id;
  std::string speaker_id;
  Gender gender = Gender::kUnknown;
  Waveform audio;
};

// Speakers alternate male/female, starting with male.
std::vector<SpeakerProfile> make_speakers(const CorpusConfig& cfg);

Waveform synthesize_utterance(const SpeakerProfile& speaker,
                              std::mt19937_64& rng, int sample_rate);

std::vector<CorpusUtterance> generate_corpus(const CorpusConfig& cfg);

// Reference F1..F5 (Hz) of the vowel inventory for an adult male voice.
inline constexpr int kVowelCount = 9;
extern const std::array<std::array<double, 5>, kVowelCount> kReferenceVowels;

}  // namespace voiceguard

#endif  // VOICEGUARD_CORPUS_H_
