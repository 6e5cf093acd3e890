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

#ifndef VOICEGUARD_PITCH_H_
#define VOICEGUARD_PITCH_H_

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "voiceguard/audio_io.h"

namespace voiceguard {

struct PitchConfig {
  double f0_min = 60.0;
  double f0_max = 500.0;
  double frame_ms = 25.0;
  double hop_ms = 10.0;
  double yin_threshold = 0.15;
  // 3-point median filter over voiced f0 values. Off by default.
  bool median_smoothing = false;

  // Throws InvalidArgument when the band or threshold is out of range.
  void validate(int sample_rate) const;
};

// f0[i] is zero exactly where voiced[i] is false.
struct PitchTrack {
  Eigen::VectorXd f0;
  std::vector<bool> voiced;
  double hop_ms = 10.0;
  double frame_ms = 25.0;
  std::string utterance_id;

  Eigen::Index size() const { return f0.size(); }
  Eigen::Index voiced_count() const;
  // Mean of the voiced f0 values, 0 when nothing is voiced.
  double mean_voiced_f0() const;
  double frame_time(Eigen::Index i) const {
    return (i * hop_ms + 0.5 * frame_ms) / 1000.0;
  }
};

// YIN: squared-difference function, cumulative mean normalization,
// absolute threshold within the lag band [rate/f0_max, rate/f0_min], then
// parabolic refinement of the selected lag. A frame is voiced iff the
// normalized difference dips below the threshold inside the band.
//
// The difference function for frame i integrates frame_len samples starting
// at i * hop; lags read ahead past the frame (zeros past the signal end).
PitchTrack yin_f0(const Waveform& w, const PitchConfig& cfg);

struct PitchCorrelationOptions {
  // When set, unvoiced gaps between voiced frames are linearly interpolated
  // in each track before correlating; otherwise only frames voiced in both
  // tracks contribute.
  bool interpolate_unvoiced = false;
};

struct PitchCorrelation {
  double rho = 0.0;
  Eigen::Index frames_used = 0;
};

// Pearson correlation between two pitch tracks over jointly voiced frames.
// Tracks that differ by at most two frames are truncated to the shorter one;
// longer mismatches are handled by linearly resampling the longer track
// onto the shorter grid.
PitchCorrelation pitch_correlation(const PitchTrack& orig,
                                   const PitchTrack& anon,
                                   const PitchCorrelationOptions& opts = {});

// Pearson correlation of two equal-length sequences.
template <typename DerivedA, typename DerivedB>
double pearson(const Eigen::MatrixBase<DerivedA>& a,
               const Eigen::MatrixBase<DerivedB>& b) {
  const double ma = a.mean();
  const double mb = b.mean();
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  // sqrt(x * x) == x exactly, so identical inputs give exactly 1.
  const double r = sab / std::sqrt(saa * sbb);
  return std::clamp(r, -1.0, 1.0);
}

// CSV: frame_index,time_s,f0_hz,voiced
void write_pitch_csv(const PitchTrack& track,
                     const std::filesystem::path& path);

}  // namespace voiceguard

#endif  // VOICEGUARD_PITCH_H_
