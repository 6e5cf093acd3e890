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

#include "voiceguard/pitch.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "voiceguard/errors.h"

namespace voiceguard {
namespace {

// Fills unvoiced runs bounded by voiced frames on both sides.
void interpolate_gaps(Eigen::VectorXd& f0, std::vector<bool>& voiced) {
  Eigen::Index last = -1;
  for (Eigen::Index i = 0; i < f0.size(); ++i) {
    if (!voiced[i]) continue;
    if (last >= 0 && i - last > 1) {
      for (Eigen::Index k = last + 1; k < i; ++k) {
        const double t = static_cast<double>(k - last) / (i - last);
        f0[k] = (1.0 - t) * f0[last] + t * f0[i];
        voiced[k] = true;
      }
    }
    last = i;
  }
}

// Linear resampling of a track onto `n` frames spanning the same duration.
// A resampled frame is voiced only when both source neighbours are.
void resample_track(const PitchTrack& src, Eigen::Index n, Eigen::VectorXd& f0,
                    std::vector<bool>& voiced) {
  f0 = Eigen::VectorXd::Zero(n);
  voiced.assign(n, false);
  const Eigen::Index m = src.size();
  for (Eigen::Index j = 0; j < n; ++j) {
    const double pos = n > 1 ? static_cast<double>(j) * (m - 1) / (n - 1) : 0.0;
    const auto lo = static_cast<Eigen::Index>(std::floor(pos));
    const Eigen::Index hi = std::min(lo + 1, m - 1);
    const double t = pos - lo;
    if (src.voiced[lo] && src.voiced[hi]) {
      f0[j] = (1.0 - t) * src.f0[lo] + t * src.f0[hi];
      voiced[j] = true;
    }
  }
}

}  // namespace

void PitchConfig::validate(int sample_rate) const {
  if (!(f0_min > 0.0 && f0_min < f0_max && f0_max < sample_rate / 2.0)) {
    throw InvalidArgument("pitch band must satisfy 0 < f0_min < f0_max < rate/2");
  }
  if (!(yin_threshold > 0.0 && yin_threshold < 1.0)) {
    throw InvalidArgument("yin_threshold must lie in (0, 1)");
  }
  if (!(hop_ms > 0.0) || frame_ms < hop_ms) {
    throw InvalidArgument("pitch framing requires frame_ms >= hop_ms > 0");
  }
}

Eigen::Index PitchTrack::voiced_count() const {
  return std::count(voiced.begin(), voiced.end(), true);
}

double PitchTrack::mean_voiced_f0() const {
  const Eigen::Index n = voiced_count();
  if (n == 0) return 0.0;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < f0.size(); ++i) {
    if (voiced[i]) sum += f0[i];
  }
  return sum / n;
}

PitchTrack yin_f0(const Waveform& w, const PitchConfig& cfg) {
  cfg.validate(w.sample_rate);
  const Eigen::Index window = ms_to_samples(cfg.frame_ms, w.sample_rate);
  const Eigen::Index hop =
      std::max<Eigen::Index>(1, ms_to_samples(cfg.hop_ms, w.sample_rate));
  const Eigen::Index n = w.samples.size();
  if (n < window || window == 0) {
    throw EmptyInput("waveform is shorter than one pitch frame");
  }

  const double rate = w.sample_rate;
  const auto tau_min = std::max<Eigen::Index>(
      2, static_cast<Eigen::Index>(std::floor(rate / cfg.f0_max)));
  const auto tau_max =
      static_cast<Eigen::Index>(std::ceil(rate / cfg.f0_min));
  const Eigen::Index count = frame_count(n, hop);

  Eigen::VectorXd padded = Eigen::VectorXd::Zero(
      (count - 1) * hop + window + tau_max + 2);
  padded.head(n) = w.samples;

  PitchTrack track;
  track.hop_ms = cfg.hop_ms;
  track.frame_ms = cfg.frame_ms;
  track.f0 = Eigen::VectorXd::Zero(count);
  track.voiced.assign(count, false);

  Eigen::VectorXd diff(tau_max + 2);
  Eigen::VectorXd cmnd(tau_max + 2);
  for (Eigen::Index i = 0; i < count; ++i) {
    const Eigen::Index start = i * hop;
    const auto ref = padded.segment(start, window);
    if (padded.segment(start, window + tau_max).squaredNorm() == 0.0) continue;

    diff[0] = 0.0;
    cmnd[0] = 1.0;
    double running = 0.0;
    for (Eigen::Index tau = 1; tau <= tau_max + 1; ++tau) {
      // Near the end of the signal only pairs inside it are compared, scaled
      // up to a full window.
      const Eigen::Index valid = std::min(window, n - start - tau);
      if (valid >= window) {
        diff[tau] = (ref - padded.segment(start + tau, window)).squaredNorm();
      } else if (valid > 0) {
        diff[tau] = (ref.head(valid) - padded.segment(start + tau, valid))
                        .squaredNorm() *
                    static_cast<double>(window) / static_cast<double>(valid);
      } else {
        diff[tau] = running / static_cast<double>(tau - 1);
      }
      running += diff[tau];
      cmnd[tau] = running > 0.0 ? diff[tau] * tau / running : 1.0;
    }

    Eigen::Index best = -1;
    for (Eigen::Index tau = tau_min; tau <= tau_max; ++tau) {
      if (cmnd[tau] < cfg.yin_threshold) {
        while (tau + 1 <= tau_max && cmnd[tau + 1] < cmnd[tau]) ++tau;
        best = tau;
        break;
      }
    }
    if (best < 0) continue;

    double lag = static_cast<double>(best);
    const double denom = diff[best - 1] - 2.0 * diff[best] + diff[best + 1];
    if (denom > 0.0) {
      const double shift = 0.5 * (diff[best - 1] - diff[best + 1]) / denom;
      lag += std::clamp(shift, -1.0, 1.0);
    }
    track.f0[i] = std::clamp(rate / lag, cfg.f0_min, cfg.f0_max);
    track.voiced[i] = true;
  }

  if (cfg.median_smoothing) {
    const Eigen::VectorXd raw = track.f0;
    for (Eigen::Index i = 0; i < count; ++i) {
      if (!track.voiced[i]) continue;
      double vals[3];
      int k = 0;
      for (Eigen::Index j = std::max<Eigen::Index>(0, i - 1);
           j <= std::min(count - 1, i + 1); ++j) {
        if (track.voiced[j]) vals[k++] = raw[j];
      }
      std::sort(vals, vals + k);
      track.f0[i] = k == 2 ? 0.5 * (vals[0] + vals[1]) : vals[k / 2];
    }
  }
  return track;
}

PitchCorrelation pitch_correlation(const PitchTrack& orig,
                                   const PitchTrack& anon,
                                   const PitchCorrelationOptions& opts) {
  if (orig.size() == 0 || anon.size() == 0) {
    throw EmptyInput("pitch correlation needs two non-empty tracks");
  }
  if (orig.hop_ms != anon.hop_ms) {
    throw InvalidArgument("pitch tracks use different hop sizes");
  }

  Eigen::VectorXd a, b;
  std::vector<bool> va, vb;
  const Eigen::Index la = orig.size();
  const Eigen::Index lb = anon.size();
  if (std::abs(la - lb) <= 2) {
    const Eigen::Index n = std::min(la, lb);
    a = orig.f0.head(n);
    b = anon.f0.head(n);
    va.assign(orig.voiced.begin(), orig.voiced.begin() + n);
    vb.assign(anon.voiced.begin(), anon.voiced.begin() + n);
  } else if (la > lb) {
    resample_track(orig, lb, a, va);
    b = anon.f0;
    vb = anon.voiced;
  } else {
    a = orig.f0;
    va = orig.voiced;
    resample_track(anon, la, b, vb);
  }
  if (opts.interpolate_unvoiced) {
    interpolate_gaps(a, va);
    interpolate_gaps(b, vb);
  }

  std::vector<Eigen::Index> joint;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (va[i] && vb[i]) joint.push_back(i);
  }
  if (joint.size() < 3) {
    throw InsufficientOverlap("fewer than 3 jointly voiced frames");
  }
  const auto idx = Eigen::Map<const Eigen::Matrix<Eigen::Index, -1, 1>>(
      joint.data(), static_cast<Eigen::Index>(joint.size()));
  const Eigen::VectorXd xa = a(idx);
  const Eigen::VectorXd xb = b(idx);
  if (xa.minCoeff() == xa.maxCoeff() || xb.minCoeff() == xb.maxCoeff()) {
    throw DegenerateInput("pitch sequence has zero variance");
  }
  return {pearson(xa, xb), static_cast<Eigen::Index>(joint.size())};
}

void write_pitch_csv(const PitchTrack& track,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "frame_index,time_s,f0_hz,voiced\n";
  char line[96];
  for (Eigen::Index i = 0; i < track.size(); ++i) {
    std::snprintf(line, sizeof line, "%ld,%.4f,%.4f,%d\n",
                  static_cast<long>(i), track.frame_time(i), track.f0[i],
                  track.voiced[i] ? 1 : 0);
    out << line;
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace voiceguard
