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

#include "voiceguard/formant.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "voiceguard/errors.h"

namespace voiceguard {

namespace {
constexpr double kMinFormantHz = 50.0;
}  // namespace

void FormantConfig::validate() const {
  if (max_formants < 1) throw InvalidArgument("max_formants must be >= 1");
  if (effective_order() < 2 * max_formants) {
    throw InvalidArgument("lpc_order must be at least 2 * max_formants");
  }
  if (!(ceiling_hz > kMinFormantHz)) {
    throw InvalidArgument("formant ceiling must exceed 50 Hz");
  }
  if (!(hop_ms > 0.0) || frame_ms < hop_ms) {
    throw InvalidArgument("formant framing requires frame_ms >= hop_ms > 0");
  }
}

FormantFrame formants_from_lpc(const Eigen::VectorXd& lpc, double sample_rate,
                               double ceiling_hz, double max_bandwidth_hz) {
  Eigen::VectorXd poly(lpc.size() + 1);
  poly[0] = 1.0;
  poly.tail(lpc.size()) = lpc;
  const auto roots = poly_roots(poly);

  FormantFrame out;
  for (Eigen::Index i = 0; i < roots.size(); ++i) {
    const auto z = roots[i];
    if (!(z.imag() > 0.0)) continue;
    const double freq = std::arg(z) * sample_rate / (2.0 * std::numbers::pi);
    const double bw = -std::log(std::abs(z)) * sample_rate / std::numbers::pi;
    if (freq <= kMinFormantHz || freq >= ceiling_hz) continue;
    if (!(bw > 0.0) || bw > max_bandwidth_hz) continue;
    out.push_back({freq, bw});
  }
  std::sort(out.begin(), out.end(), [](const Formant& a, const Formant& b) {
    return a.frequency_hz < b.frequency_hz;
  });
  return out;
}

FormantTrack estimate_formants(const Waveform& w, const FormantConfig& cfg) {
  cfg.validate();
  const Eigen::Index frame_len = ms_to_samples(cfg.frame_ms, w.sample_rate);
  const Eigen::Index hop =
      std::max<Eigen::Index>(1, ms_to_samples(cfg.hop_ms, w.sample_rate));
  if (w.samples.size() < frame_len || frame_len == 0) {
    throw EmptyInput("waveform is shorter than one formant frame");
  }

  // Never upsample: a narrowband input lowers the ceiling instead.
  const int rate = std::min(
      w.sample_rate, static_cast<int>(std::lround(2.0 * cfg.ceiling_hz)));
  const double ceiling = rate / 2.0;
  const Waveform analysis = resample(w, rate);
  const Eigen::Index n = analysis.samples.size();

  Eigen::VectorXd emphasized(n);
  const double mu =
      std::exp(-2.0 * std::numbers::pi * cfg.pre_emphasis_hz / rate);
  for (Eigen::Index i = n - 1; i > 0; --i) {
    emphasized[i] = analysis.samples[i] - mu * analysis.samples[i - 1];
  }
  if (n > 0) emphasized[0] = analysis.samples[0];

  const Eigen::Index win_len = 2 * ms_to_samples(cfg.frame_ms, rate);
  const Eigen::VectorXd window = make_window(WindowKind::kGaussian, win_len);
  const int order = cfg.effective_order();
  if (win_len <= order) throw InvalidArgument("formant window too short");

  FormantTrack track;
  track.hop_ms = cfg.hop_ms;
  track.frame_ms = cfg.frame_ms;
  track.ceiling_hz = ceiling;
  const Eigen::Index count = frame_count(w.samples.size(), hop);
  track.frames.resize(static_cast<std::size_t>(count));

  Eigen::VectorXd raw(win_len);
  Eigen::VectorXd frame(win_len);
  for (Eigen::Index i = 0; i < count; ++i) {
    const double centre = track.frame_time(i) * rate;
    const auto start =
        static_cast<Eigen::Index>(std::lround(centre - 0.5 * win_len));
    raw.setZero();
    frame.setZero();
    const Eigen::Index lo = std::max<Eigen::Index>(0, start);
    const Eigen::Index hi = std::min(n, start + win_len);
    if (hi <= lo) continue;
    raw.segment(lo - start, hi - lo) = analysis.samples.segment(lo, hi - lo);
    if (level_dbfs(raw) < cfg.silence_dbfs) continue;
    frame.segment(lo - start, hi - lo) = emphasized.segment(lo, hi - lo);
    frame.array() *= window.array();

    const auto lpc = lpc_burg(frame, order);
    if (lpc.zero_energy) continue;
    FormantFrame found =
        formants_from_lpc(lpc.coeffs, rate, ceiling, cfg.max_bandwidth_hz);
    if (static_cast<int>(found.size()) > cfg.max_formants) {
      found.resize(static_cast<std::size_t>(cfg.max_formants));
    }
    track.frames[static_cast<std::size_t>(i)] = std::move(found);
  }
  return track;
}

void write_formant_csv(const FormantTrack& track, int max_formants,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "frame_index,time_s";
  for (int k = 1; k <= max_formants; ++k) out << ",f" << k << ",b" << k;
  out << '\n';
  char buf[64];
  for (Eigen::Index i = 0; i < track.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%ld,%.4f", static_cast<long>(i),
                  track.frame_time(i));
    out << buf;
    const auto& frame = track.frames[static_cast<std::size_t>(i)];
    for (int k = 0; k < max_formants; ++k) {
      if (k < static_cast<int>(frame.size())) {
        const auto& f = frame[static_cast<std::size_t>(k)];
        std::snprintf(buf, sizeof buf, ",%.2f,%.2f", f.frequency_hz,
                      f.bandwidth_hz);
        out << buf;
      } else {
        out << ",,";
      }
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace voiceguard
