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

// Speaker anonymization by uniform scaling of formants and F0.
//
// Two scaling rules are supported:
//   gender-independent  f_anon = alpha * f_src,  p_anon = alpha * p_src
//   gender-dependent    factor (1 + alpha) for male speakers and
//                       (1 - alpha) for female speakers, applied to both.
//
// The anonymized waveform is produced by a pulse/noise source-filter
// vocoder: each frame's LPC envelope has its pole angles multiplied by the
// effective factor, and is driven by an impulse train at the scaled F0
// (noise in unvoiced frames).

#ifndef VOICEGUARD_ANONYMIZE_H_
#define VOICEGUARD_ANONYMIZE_H_

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "voiceguard/audio_io.h"
#include "voiceguard/formant.h"
#include "voiceguard/gender.h"
#include "voiceguard/pitch.h"

namespace voiceguard {

enum class Strategy { kGenderIndependent, kGenderDependent };

// Accepts "gender-independent" / "gender_independent" and the dependent
// counterparts.
Strategy parse_strategy(std::string_view s);
const char* strategy_name(Strategy s);

struct AnonymizationConfig {
  Strategy strategy = Strategy::kGenderDependent;
  double alpha = 0.3;
  Gender gender = Gender::kUnknown;
  std::uint64_t noise_seed = 0;
  PitchConfig pitch;
  // ceiling_hz is overridden from the gender unless fixed_ceiling is set.
  FormantConfig formant;
  bool fixed_ceiling = false;
  // Scale formant bandwidths along with frequencies in the reported track.
  bool scale_bandwidths = false;
  // 0 selects sample_rate / 1000 + 2.
  int synthesis_lpc_order = 0;

  // Throws on invalid alpha; returns warnings for alphas outside the
  // customary sweep range of the strategy.
  std::vector<std::string> validate() const;
};

// Factor applied to both formants and F0 by the configured rule.
double effective_factor(Strategy strategy, double alpha, Gender gender);

struct ScaledFeatures {
  PitchTrack f0_anon;
  FormantTrack formants_anon;
  // Per-frame frequency-axis warp; equals the effective factor everywhere.
  Eigen::VectorXd envelope_warp;
  // Cumulative factor relative to the source features below.
  double factor = 1.0;
  int clipped_formants = 0;

  PitchTrack f0_src;
  FormantTrack formants_src;
  double nyquist_hz = std::numeric_limits<double>::infinity();
  bool scale_bandwidths = false;
};

// Multiplies voiced F0 and every formant frequency by `factor`. Formants at
// or above `nyquist_hz` after scaling are removed and counted.
ScaledFeatures scale_features(
    const PitchTrack& f0, const FormantTrack& formants, double factor,
    double nyquist_hz = std::numeric_limits<double>::infinity(),
    bool scale_bandwidths = false);

ScaledFeatures scale_gender_independent(
    const PitchTrack& f0, const FormantTrack& formants, double alpha,
    double nyquist_hz = std::numeric_limits<double>::infinity(),
    bool scale_bandwidths = false);

// Throws MissingGender for Gender::kUnknown.
ScaledFeatures scale_gender_dependent(
    const PitchTrack& f0, const FormantTrack& formants, double alpha,
    Gender gender,
    double nyquist_hz = std::numeric_limits<double>::infinity(),
    bool scale_bandwidths = false);

// Re-scales already scaled features. The result is computed from the
// retained source features with the product factor, so
// scale_gender_independent(scale_gender_independent(x, a), b) is
// bit-identical to scale_gender_independent(x, a * b).
ScaledFeatures scale_gender_independent(const ScaledFeatures& scaled,
                                        double alpha);

struct WarpStats {
  int nyquist_clamped = 0;
  int unstable_clamped = 0;
};

// Multiplies the angle of every complex LPC pole by `factor`. Poles pushed
// past kMaxWarpedAngle are clamped there with radius at most 0.9; any pole
// on or outside the unit circle is pulled in to radius 0.995. Real poles are
// left in place.
Eigen::VectorXd warp_envelope(const Eigen::VectorXd& lpc, double factor,
                              WarpStats* stats = nullptr);

inline constexpr double kMaxWarpedAngle = 0.98 * 3.14159265358979323846;
inline constexpr double kClampedPoleRadius = 0.9;
inline constexpr double kStablePoleRadius = 0.995;

struct SynthesisStats {
  WarpStats warp;
  int frames = 0;
};

// Pulse/noise LPC vocoder with Hann overlap-add at 50% overlap on the pitch
// hop. `source` supplies voicing; `target` supplies the excitation F0.
// Excitation pulses are band-limited and placed at fractional positions;
// their phase stays continuous across frame boundaries, and a voiced run
// pulses across the full analysis windows of its first and last frames. The
// output has exactly as many samples as the input.
Waveform resynthesize(const Waveform& w, const PitchTrack& source,
                      const PitchTrack& target, double warp_factor,
                      std::uint64_t seed, int lpc_order = 0,
                      SynthesisStats* stats = nullptr);

struct AnonymizationReport {
  std::string utterance_id;
  Strategy strategy = Strategy::kGenderDependent;
  double alpha = 0.0;
  Gender gender = Gender::kUnknown;
  std::uint64_t noise_seed = 0;
  int sample_rate = 0;
  Eigen::Index input_samples = 0;
  Eigen::Index output_samples = 0;
  Eigen::Index frames = 0;
  std::vector<Eigen::Index> voiced_frames;
  Eigen::VectorXd effective_factor;
  int formant_clip_count = 0;
  int nyquist_clamped_poles = 0;
  int unstable_poles_clamped = 0;
  double source_mean_f0 = 0.0;
  double output_mean_f0 = 0.0;
  // output_mean_f0 / source_mean_f0; 0 when either side has no voicing.
  double mean_f0_ratio = 0.0;
  bool silent_input = false;
  std::vector<std::string> warnings;
  std::string error;
};

struct AnonymizationResult {
  Waveform audio;
  AnonymizationReport report;
  ScaledFeatures features;
};

// Full pipeline: pitch and formant analysis, feature scaling, vocoder
// resynthesis, and re-analysis of the output F0 for the report. An all-silent
// input is returned unchanged with a warning. Throws EmptyInput for inputs
// shorter than three pitch frames.
AnonymizationResult anonymize_utterance(const Waveform& w,
                                        const AnonymizationConfig& cfg);

}  // namespace voiceguard

#endif  // VOICEGUARD_ANONYMIZE_H_
