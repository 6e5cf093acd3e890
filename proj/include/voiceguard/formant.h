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

#ifndef VOICEGUARD_FORMANT_H_
#define VOICEGUARD_FORMANT_H_

#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "voiceguard/audio_io.h"
#include "voiceguard/gender.h"
#include "voiceguard/lpc.h"

namespace voiceguard {

struct FormantConfig {
  int max_formants = 5;
  double ceiling_hz = 5500.0;
  // 0 selects 2 * max_formants + 2.
  int lpc_order = 0;
  double pre_emphasis_hz = 50.0;
  // Effective window duration; the Gaussian window spans twice this.
  double frame_ms = 25.0;
  double hop_ms = 10.0;
  double max_bandwidth_hz = 400.0;
  double silence_dbfs = -60.0;

  int effective_order() const {
    return lpc_order > 0 ? lpc_order : 2 * max_formants + 2;
  }
  void validate() const;

  // 5000 Hz for male voices, 5500 Hz otherwise.
  static double ceiling_for(Gender g) {
    return g == Gender::kMale ? 5000.0 : 5500.0;
  }
};

struct Formant {
  double frequency_hz = 0.0;
  double bandwidth_hz = 0.0;
};

// Formants of one frame, ascending by frequency.
using FormantFrame = std::vector<Formant>;

struct FormantTrack {
  std::vector<FormantFrame> frames;
  double hop_ms = 10.0;
  double frame_ms = 25.0;
  double ceiling_hz = 5500.0;

  Eigen::Index size() const { return static_cast<Eigen::Index>(frames.size()); }
  double frame_time(Eigen::Index i) const {
    return (i * hop_ms + 0.5 * frame_ms) / 1000.0;
  }
  // Frequency of formant `k` (0-based) in frame `i`, or 0 when absent.
  double frequency(Eigen::Index i, int k) const {
    const auto& f = frames[static_cast<std::size_t>(i)];
    return k < static_cast<int>(f.size()) ? f[static_cast<std::size_t>(k)].frequency_hz
                                          : 0.0;
  }
};

// Converts LPC poles into formant candidates: upper half-plane roots with
// frequency in (50 Hz, ceiling) and bandwidth <= max_bandwidth, ascending.
FormantFrame formants_from_lpc(const Eigen::VectorXd& lpc, double sample_rate,
                               double ceiling_hz, double max_bandwidth_hz);

// Per-frame F1..Fn estimation. The waveform is resampled to twice the
// ceiling, pre-emphasized, cut into Gaussian-windowed frames centred on the
// same grid as yin_f0(), and each frame is fitted with Burg LPC whose poles
// become formants. Frames quieter than silence_dbfs carry no formants.
FormantTrack estimate_formants(const Waveform& w, const FormantConfig& cfg);

// CSV: frame_index,time_s,f1,b1,...,fN,bN; absent formants are empty cells.
void write_formant_csv(const FormantTrack& track, int max_formants,
                       const std::filesystem::path& path);

}  // namespace voiceguard

#endif  // VOICEGUARD_FORMANT_H_
