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

#include "voiceguard/anonymize.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <complex>
#include <random>

#include "voiceguard/errors.h"
#include "voiceguard/lpc.h"

namespace voiceguard {
namespace {

constexpr double kSynthesisWindowMs = 30.0;
constexpr double kEnvelopeExpansionHz = 50.0;

// Multiplies a polynomial (descending powers) by another.
Eigen::VectorXd poly_mul(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(a.size() + b.size() - 1);
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    out.segment(i, b.size()) += a[i] * b;
  }
  return out;
}

// Nearest pitch frame for a sample position.
Eigen::Index pitch_frame_at(double sample, const PitchTrack& track,
                            double rate) {
  const double hop = track.hop_ms * rate / 1000.0;
  const double half = 0.5 * track.frame_ms * rate / 1000.0;
  const auto i = static_cast<Eigen::Index>(std::lround((sample - half) / hop));
  return std::clamp<Eigen::Index>(i, 0, track.size() - 1);
}

// Voiced frame driving the excitation at a sample, or -1 for noise. Besides
// the nearest frame, a voiced run pulses across the whole analysis windows of
// its first and last frames, since those windows were judged periodic.
Eigen::Index excitation_frame(double sample, const PitchTrack& track,
                              double rate) {
  const Eigen::Index p = pitch_frame_at(sample, track, rate);
  if (track.voiced[static_cast<std::size_t>(p)]) return p;
  const double hop = track.hop_ms * rate / 1000.0;
  const double len = track.frame_ms * rate / 1000.0;
  for (Eigen::Index q = p + 1; q < track.size() && q * hop <= sample; ++q) {
    if (track.voiced[static_cast<std::size_t>(q)]) return q;
  }
  for (Eigen::Index q = p - 1; q >= 0 && q * hop + len > sample; --q) {
    if (track.voiced[static_cast<std::size_t>(q)]) return q;
  }
  return -1;
}

// Band-limited unit pulse at fractional sample position t: a Hann-windowed
// sinc kernel, so pulse spacing follows the period without integer rounding.
void add_pulse(Eigen::VectorXd& x, double t, double height) {
  constexpr int kHalf = 8;
  const auto base = static_cast<Eigen::Index>(std::floor(t));
  for (Eigen::Index k = base - kHalf + 1; k <= base + kHalf; ++k) {
    if (k < 0 || k >= x.size()) continue;
    const double d = static_cast<double>(k) - t;
    const double sinc =
        d == 0.0 ? 1.0 : std::sin(std::numbers::pi * d) / (std::numbers::pi * d);
    const double win = 0.5 + 0.5 * std::cos(std::numbers::pi * d / kHalf);
    x[k] += height * sinc * win;
  }
}

// Energy of the all-pole impulse response 1/A(z), truncated.
double impulse_energy(const Eigen::VectorXd& a) {
  constexpr int kLength = 2048;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(kLength);
  double energy = 0.0;
  for (int j = 0; j < kLength; ++j) {
    double v = j == 0 ? 1.0 : 0.0;
    for (Eigen::Index i = 0; i < a.size() && j - 1 - i >= 0; ++i) {
      v -= a[i] * y[j - 1 - i];
    }
    y[j] = v;
    energy += v * v;
  }
  return energy;
}

// Target F0 at a sample, linear between neighbouring voiced frame centres.
double f0_at(double sample, const PitchTrack& voicing, const PitchTrack& target,
             double rate) {
  const double hop = voicing.hop_ms * rate / 1000.0;
  const double half = 0.5 * voicing.frame_ms * rate / 1000.0;
  const double x = (sample - half) / hop;
  const Eigen::Index last = voicing.size() - 1;
  const auto i0 = std::clamp<Eigen::Index>(
      static_cast<Eigen::Index>(std::floor(x)), 0, last);
  const Eigen::Index i1 = std::min(i0 + 1, last);
  const auto v0 = voicing.voiced[static_cast<std::size_t>(i0)];
  const auto v1 = voicing.voiced[static_cast<std::size_t>(i1)];
  if (v0 && v1) {
    const double t = std::clamp(x - static_cast<double>(i0), 0.0, 1.0);
    return target.f0[i0] + t * (target.f0[i1] - target.f0[i0]);
  }
  return target.f0[pitch_frame_at(sample, voicing, rate)];
}

}  // namespace

Strategy parse_strategy(std::string_view s) {
  if (s == "gender-independent" || s == "gender_independent") {
    return Strategy::kGenderIndependent;
  }
  if (s == "gender-dependent" || s == "gender_dependent") {
    return Strategy::kGenderDependent;
  }
  throw InvalidArgument("unknown strategy '" + std::string(s) + "'");
}

const char* strategy_name(Strategy s) {
  return s == Strategy::kGenderIndependent ? "gender-independent"
                                           : "gender-dependent";
}

std::vector<std::string> AnonymizationConfig::validate() const {
  std::vector<std::string> warnings;
  if (!std::isfinite(alpha)) throw InvalidArgument("alpha must be finite");
  if (strategy == Strategy::kGenderIndependent) {
    if (!(alpha > 0.0)) {
      throw InvalidArgument("gender-independent alpha must be positive");
    }
    if (alpha < 0.5 || alpha > 1.5) {
      warnings.push_back("alpha outside the usual [0.5, 1.5] sweep range");
    }
  } else {
    if (!(alpha >= 0.0 && alpha < 1.0)) {
      throw InvalidArgument("gender-dependent alpha must lie in [0, 1)");
    }
    if (alpha > 0.5) {
      warnings.push_back("alpha outside the usual [0, 0.5] sweep range");
    }
  }
  return warnings;
}

double effective_factor(Strategy strategy, double alpha, Gender gender) {
  if (strategy == Strategy::kGenderIndependent) return alpha;
  switch (gender) {
    case Gender::kMale: return 1.0 + alpha;
    case Gender::kFemale: return 1.0 - alpha;
    case Gender::kUnknown: break;
  }
  throw MissingGender("gender-dependent scaling needs a male/female label");
}

ScaledFeatures scale_features(const PitchTrack& f0,
                              const FormantTrack& formants, double factor,
                              double nyquist_hz, bool scale_bandwidths) {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw InvalidArgument("scaling factor must be positive and finite");
  }
  ScaledFeatures out;
  out.factor = factor;
  out.f0_src = f0;
  out.formants_src = formants;
  out.nyquist_hz = nyquist_hz;
  out.scale_bandwidths = scale_bandwidths;

  out.f0_anon = f0;
  for (Eigen::Index i = 0; i < f0.size(); ++i) {
    out.f0_anon.f0[i] = f0.voiced[i] ? factor * f0.f0[i] : 0.0;
  }

  out.formants_anon = formants;
  for (auto& frame : out.formants_anon.frames) {
    FormantFrame kept;
    kept.reserve(frame.size());
    for (const auto& f : frame) {
      const double freq = factor * f.frequency_hz;
      if (freq >= nyquist_hz) {
        ++out.clipped_formants;
        continue;
      }
      kept.push_back(
          {freq, scale_bandwidths ? factor * f.bandwidth_hz : f.bandwidth_hz});
    }
    frame = std::move(kept);
  }
  out.envelope_warp =
      Eigen::VectorXd::Constant(std::max(f0.size(), formants.size()), factor);
  return out;
}

ScaledFeatures scale_gender_independent(const PitchTrack& f0,
                                        const FormantTrack& formants,
                                        double alpha, double nyquist_hz,
                                        bool scale_bandwidths) {
  return scale_features(f0, formants,
                        effective_factor(Strategy::kGenderIndependent, alpha,
                                         Gender::kUnknown),
                        nyquist_hz, scale_bandwidths);
}

ScaledFeatures scale_gender_dependent(const PitchTrack& f0,
                                      const FormantTrack& formants,
                                      double alpha, Gender gender,
                                      double nyquist_hz,
                                      bool scale_bandwidths) {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw InvalidArgument("gender-dependent alpha must lie in [0, 1)");
  }
  return scale_features(
      f0, formants,
      effective_factor(Strategy::kGenderDependent, alpha, gender), nyquist_hz,
      scale_bandwidths);
}

ScaledFeatures scale_gender_independent(const ScaledFeatures& scaled,
                                        double alpha) {
  if (!(alpha > 0.0)) throw InvalidArgument("alpha must be positive");
  return scale_features(scaled.f0_src, scaled.formants_src,
                        scaled.factor * alpha, scaled.nyquist_hz,
                        scaled.scale_bandwidths);
}

Eigen::VectorXd warp_envelope(const Eigen::VectorXd& lpc, double factor,
                              WarpStats* stats) {
  const Eigen::Index order = lpc.size();
  if (order == 0) return lpc;
  Eigen::VectorXd poly(order + 1);
  poly[0] = 1.0;
  poly.tail(order) = lpc;
  const auto roots = poly_roots(poly);

  WarpStats local;
  Eigen::VectorXd out = Eigen::VectorXd::Ones(1);
  for (Eigen::Index i = 0; i < roots.size(); ++i) {
    const std::complex<double> z = roots[i];
    if (z.imag() < 0.0) continue;
    if (z.imag() == 0.0) {
      double p = z.real();
      if (std::abs(p) >= 1.0) {
        p = std::copysign(kStablePoleRadius, p);
        ++local.unstable_clamped;
      }
      out = poly_mul(out, Eigen::Vector2d(1.0, -p));
      continue;
    }
    double radius = std::abs(z);
    double angle = factor * std::arg(z);
    if (angle > kMaxWarpedAngle) {
      angle = kMaxWarpedAngle;
      radius = std::min(radius, kClampedPoleRadius);
      ++local.nyquist_clamped;
    }
    if (radius >= 1.0) {
      radius = kStablePoleRadius;
      ++local.unstable_clamped;
    }
    out = poly_mul(out, Eigen::Vector3d(1.0, -2.0 * radius * std::cos(angle),
                                        radius * radius));
  }
  if (stats != nullptr) {
    stats->nyquist_clamped += local.nyquist_clamped;
    stats->unstable_clamped += local.unstable_clamped;
  }
  return out.tail(order);
}

Waveform resynthesize(const Waveform& w, const PitchTrack& source,
                      const PitchTrack& target, double warp_factor,
                      std::uint64_t seed, int lpc_order,
                      SynthesisStats* stats) {
  if (source.size() == 0 || source.size() != target.size()) {
    throw InvalidArgument("resynthesis needs matching non-empty pitch tracks");
  }
  const double rate = w.sample_rate;
  const Eigen::Index n = w.samples.size();
  const int order = lpc_order > 0 ? lpc_order : w.sample_rate / 1000 + 2;
  const Eigen::Index hop =
      std::max<Eigen::Index>(1, ms_to_samples(source.hop_ms, w.sample_rate));
  const Eigen::Index span = 2 * hop;
  const Eigen::Index analysis_len = std::max<Eigen::Index>(
      span, ms_to_samples(kSynthesisWindowMs, w.sample_rate));
  const Eigen::VectorXd synth_window = make_window(WindowKind::kHann, span);
  const Eigen::VectorXd analysis_window =
      make_window(WindowKind::kHann, analysis_len);

  // Unit-power excitation: pulses of height sqrt(period) or unit-variance
  // noise, so the per-frame gain alone sets the level.
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  Eigen::VectorXd excitation = Eigen::VectorXd::Zero(n);
  double phase = 1.0;
  for (Eigen::Index m = 0; m < n; ++m) {
    const Eigen::Index p = excitation_frame(static_cast<double>(m), source, rate);
    if (p >= 0 && target.f0[p] > 0.0) {
      const double f0 = source.voiced[static_cast<std::size_t>(
                            pitch_frame_at(static_cast<double>(m), source, rate))]
                            ? f0_at(static_cast<double>(m), source, target, rate)
                            : target.f0[p];
      const double step = f0 / rate;
      phase += step;
      if (phase >= 1.0) {
        phase -= std::floor(phase);
        add_pulse(excitation, static_cast<double>(m) - phase / step,
                  std::sqrt(rate / f0));
      }
    } else {
      excitation[m] += noise(rng);
    }
  }

  SynthesisStats local;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd segment(analysis_len);
  Eigen::VectorXd filtered(span + span);
  const Eigen::Index last_frame = frame_count(n, hop);
  for (Eigen::Index k = -1; k < last_frame; ++k) {
    const Eigen::Index start = k * hop;
    const Eigen::Index centre = start + hop;

    segment.setZero();
    const Eigen::Index a0 = centre - analysis_len / 2;
    const Eigen::Index lo = std::max<Eigen::Index>(0, a0);
    const Eigen::Index hi = std::min(n, a0 + analysis_len);
    if (hi <= lo) continue;
    segment.segment(lo - a0, hi - lo) = w.samples.segment(lo, hi - lo);
    segment.array() *= analysis_window.array();
    auto lpc = lpc_burg(segment, order);
    if (lpc.zero_energy) continue;
    // Widen every pole so high-pitched voices do not lock the envelope onto
    // single harmonics.
    const double gamma = std::exp(-std::numbers::pi * kEnvelopeExpansionHz / rate);
    Eigen::VectorXd expanded = lpc.coeffs;
    double g = 1.0;
    for (int i = 0; i < order; ++i) {
      g *= gamma;
      expanded[i] *= g;
    }
    ++local.frames;

    // Residual of the original frame under its own predictor.
    double energy = 0.0;
    Eigen::Index counted = 0;
    for (Eigen::Index m = std::max<Eigen::Index>(0, start);
         m < std::min(n, start + span); ++m) {
      double e = w.samples[m];
      for (int i = 0; i < order && m - 1 - i >= 0; ++i) {
        e += lpc.coeffs[i] * w.samples[m - 1 - i];
      }
      energy += e * e;
      ++counted;
    }
    if (counted == 0) continue;
    const double gain = std::sqrt(energy / counted);
    if (gain == 0.0) continue;

    const Eigen::VectorXd warped =
        warp_envelope(expanded, warp_factor, &local.warp);
    // Poles crowded towards Nyquist multiply their gains; keep the envelope's
    // power equal to the unwarped one.
    const double power_ratio = impulse_energy(expanded) / impulse_energy(warped);
    const double frame_gain = gain * std::sqrt(power_ratio);

    // One span of warm-up so the filter state settles before the kept part.
    filtered.setZero();
    const Eigen::Index f0 = start - span;
    for (Eigen::Index j = 0; j < 2 * span; ++j) {
      const Eigen::Index m = f0 + j;
      double y = (m >= 0 && m < n) ? frame_gain * excitation[m] : 0.0;
      for (int i = 0; i < order && j - 1 - i >= 0; ++i) {
        y -= warped[i] * filtered[j - 1 - i];
      }
      filtered[j] = y;
    }
    for (Eigen::Index j = 0; j < span; ++j) {
      const Eigen::Index m = start + j;
      if (m < 0 || m >= n) continue;
      out[m] += synth_window[j] * filtered[span + j];
    }
  }

  if (stats != nullptr) {
    stats->frames += local.frames;
    stats->warp.nyquist_clamped += local.warp.nyquist_clamped;
    stats->warp.unstable_clamped += local.warp.unstable_clamped;
  }
  return {out, w.sample_rate};
}

AnonymizationResult anonymize_utterance(const Waveform& w,
                                        const AnonymizationConfig& cfg) {
  AnonymizationResult result;
  AnonymizationReport& report = result.report;
  report.strategy = cfg.strategy;
  report.alpha = cfg.alpha;
  report.gender = cfg.gender;
  report.noise_seed = cfg.noise_seed;
  report.sample_rate = w.sample_rate;
  report.input_samples = w.samples.size();
  report.warnings = cfg.validate();

  const double factor = effective_factor(cfg.strategy, cfg.alpha, cfg.gender);

  cfg.pitch.validate(w.sample_rate);
  const Eigen::Index pitch_len = ms_to_samples(cfg.pitch.frame_ms, w.sample_rate);
  const Eigen::Index pitch_hop = ms_to_samples(cfg.pitch.hop_ms, w.sample_rate);
  if (w.samples.size() < pitch_len + 2 * pitch_hop) {
    throw EmptyInput("waveform is shorter than three analysis frames");
  }

  FormantConfig fcfg = cfg.formant;
  if (!cfg.fixed_ceiling) fcfg.ceiling_hz = FormantConfig::ceiling_for(cfg.gender);
  fcfg.hop_ms = cfg.pitch.hop_ms;
  fcfg.frame_ms = cfg.pitch.frame_ms;

  PitchTrack pitch = yin_f0(w, cfg.pitch);
  const FormantTrack formants = estimate_formants(w, fcfg);
  result.features = scale_features(pitch, formants, factor,
                                   w.sample_rate / 2.0, cfg.scale_bandwidths);
  const ScaledFeatures& scaled = result.features;

  report.frames = pitch.size();
  for (Eigen::Index i = 0; i < pitch.size(); ++i) {
    if (pitch.voiced[static_cast<std::size_t>(i)]) report.voiced_frames.push_back(i);
  }
  report.effective_factor = scaled.envelope_warp;
  report.formant_clip_count = scaled.clipped_formants;
  report.source_mean_f0 = pitch.mean_voiced_f0();

  if (level_dbfs(w.samples) < fcfg.silence_dbfs) {
    report.silent_input = true;
    report.warnings.push_back("input is silent; returned unchanged");
    result.audio = w;
    report.output_samples = w.samples.size();
    return result;
  }

  SynthesisStats stats;
  result.audio = resynthesize(w, pitch, scaled.f0_anon, factor, cfg.noise_seed,
                              cfg.synthesis_lpc_order, &stats);
  report.output_samples = result.audio.samples.size();
  report.nyquist_clamped_poles = stats.warp.nyquist_clamped;
  report.unstable_poles_clamped = stats.warp.unstable_clamped;

  const double peak = result.audio.samples.cwiseAbs().maxCoeff();
  if (peak > 1.0) {
    result.audio.samples /= peak;
    report.warnings.push_back("output normalized to avoid clipping");
  }

  const PitchTrack out_pitch = yin_f0(result.audio, cfg.pitch);
  report.output_mean_f0 = out_pitch.mean_voiced_f0();
  if (report.source_mean_f0 > 0.0 && report.output_mean_f0 > 0.0) {
    report.mean_f0_ratio = report.output_mean_f0 / report.source_mean_f0;
  }
  return result;
}

}  // namespace voiceguard
