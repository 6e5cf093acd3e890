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

// Waveform ingestion and emission, resampling and framing. All DSP in the
// library operates on double-precision mono samples in [-1, 1]; quantization
// happens only in write_wav().

#ifndef VOICEGUARD_AUDIO_IO_H_
#define VOICEGUARD_AUDIO_IO_H_

#include <cmath>
#include <filesystem>
#include <limits>

#include <Eigen/Core>

namespace voiceguard {

struct Waveform {
  Eigen::VectorXd samples;
  int sample_rate = 16000;

  Eigen::Index size() const { return samples.size(); }
  double duration() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

enum class WindowKind { kRectangular, kHann, kGaussian };

// Window of length n. Hann is the periodic ("DFT-even") variant, so that
// frames at 50% overlap sum to exactly one. Gaussian follows the usual
// formant-analysis shape exp(-12 (t - 1/2)^2), edge-corrected to zero.
Eigen::VectorXd make_window(WindowKind kind, Eigen::Index n);

// Frames are stored one per column.
struct FrameSequence {
  Eigen::MatrixXd frames;
  Eigen::Index frame_len = 0;
  Eigen::Index hop = 0;
  WindowKind window_kind = WindowKind::kRectangular;

  Eigen::Index count() const { return frames.cols(); }
};

// Reads RIFF/WAVE, PCM 16-bit or IEEE float 32-bit, any channel count.
// Channels are averaged to mono.
Waveform read_wav(const std::filesystem::path& path);

// Writes 16-bit PCM mono. Samples outside [-1, 1] are clipped.
void write_wav(const Waveform& w, const std::filesystem::path& path);

// Kaiser-windowed sinc interpolation (64 taps at the lower of the two
// rates). Returns an exact copy when the rates agree.
Waveform resample(const Waveform& w, int target_rate);

// ceil(len / hop) frames; frame i starts at sample i * hop, zero-padded past
// the end of the signal, then multiplied by the window.
FrameSequence frame_signal(const Waveform& w, double frame_ms, double hop_ms,
                           WindowKind window_kind);

// Frame geometry shared by the analysis modules.
Eigen::Index ms_to_samples(double ms, int sample_rate);
Eigen::Index frame_count(Eigen::Index num_samples, Eigen::Index hop);

// Mean-square level of a block in dB relative to full scale (a constant
// signal at amplitude 1 is 0 dBFS). Returns -inf for an all-zero block.
template <typename Derived>
double level_dbfs(const Eigen::MatrixBase<Derived>& block) {
  if (block.size() == 0) return -std::numeric_limits<double>::infinity();
  const double ms = block.squaredNorm() / static_cast<double>(block.size());
  return 10.0 * std::log10(ms);
}

}  // namespace voiceguard

#endif  // VOICEGUARD_AUDIO_IO_H_
