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

#include "voiceguard/corpus.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "voiceguard/errors.h"

namespace voiceguard {

const std::array<std::array<double, 5>, kVowelCount> kReferenceVowels = {{
    {270, 2290, 3010, 3400, 4200},  // i
    {390, 1990, 2550, 3400, 4200},  // I
    {530, 1840, 2480, 3400, 4200},  // E
    {660, 1720, 2410, 3400, 4200},  // ae
    {730, 1090, 2440, 3400, 4200},  // a
    {570, 840, 2410, 3400, 4200},   // O
    {440, 1020, 2240, 3400, 4200},  // U
    {300, 870, 2240, 3400, 4200},   // u
    {640, 1190, 2390, 3400, 4200},  // V
}};

namespace {

constexpr std::array<double, 5> kBandwidths = {60, 90, 120, 160, 200};
constexpr double kTransitionMs = 40.0;
constexpr int kCoeffUpdate = 16;
// Fricative level relative to the voiced segments, dB.
constexpr double kFricativeDb = -12.0;

double uniform(std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

double gaussian(std::mt19937_64& rng) {
  const double u1 = std::max(uniform(rng), 1e-300);
  const double u2 = uniform(rng);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

// Two-pole resonator with unit gain at DC.
struct Resonator {
  double b1 = 0.0, b2 = 0.0, g = 1.0;
  double y1 = 0.0, y2 = 0.0;

  void tune(double freq, double bw, double rate) {
    const double r = std::exp(-std::numbers::pi * bw / rate);
    b1 = 2.0 * r * std::cos(2.0 * std::numbers::pi * freq / rate);
    b2 = -r * r;
    g = 1.0 - b1 - b2;
  }
  double step(double x) {
    const double y = g * x + b1 * y1 + b2 * y2;
    y2 = y1;
    y1 = y;
    return y;
  }
};

// Energy of one differentiated glottal pulse for a given low-pass pole.
double pulse_energy(double tilt) {
  double g1 = 0.0, g2 = 0.0, prev = 0.0, energy = 0.0;
  for (int j = 0; j < 4096; ++j) {
    const double g = (j == 0 ? 1.0 : 0.0) + 2.0 * tilt * g1 - tilt * tilt * g2;
    g2 = g1;
    g1 = g;
    const double flow = g * (1.0 - tilt) * (1.0 - tilt);
    energy += (flow - prev) * (flow - prev);
    prev = flow;
  }
  return energy;
}

// Aspiration noise is set relative to the pulse energy of this tilt, so
// breathiness acts as a harmonics-to-noise control across glottal tilts.
constexpr double kReferenceTilt = 0.89;

struct Segment {
  bool voiced;
  Eigen::Index length;
  std::array<double, 5> formants;
  double fricative_hz;
};

}  // namespace

std::vector<SpeakerProfile> make_speakers(const CorpusConfig& cfg) {
  if (cfg.speakers < 1) throw InvalidArgument("corpus needs speakers");
  std::mt19937_64 rng(cfg.seed * 0x9E3779B97F4A7C15ULL + 17);
  const int n_male = (cfg.speakers + 1) / 2;
  const int n_female = cfg.speakers / 2;

  // Stratify F0 and vocal-tract length within each gender so that speakers
  // are spread over the range, with the two orderings decorrelated.
  auto strata = [&](int n) {
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    return order;
  };
  const auto male_vtl = strata(n_male);
  const auto female_vtl = strata(n_female);

  std::vector<SpeakerProfile> out;
  int male = 0, female = 0;
  for (int k = 0; k < cfg.speakers; ++k) {
    SpeakerProfile s;
    char id[64];
    std::snprintf(id, sizeof id, "%s%02d", cfg.prefix.c_str(), k);
    s.id = id;
    s.gender = k % 2 == 0 ? Gender::kMale : Gender::kFemale;
    if (s.gender == Gender::kMale) {
      const double u = (male + uniform(rng, 0.2, 0.8)) / n_male;
      const double v =
          (male_vtl[static_cast<std::size_t>(male)] + uniform(rng, 0.2, 0.8)) /
          n_male;
      s.f0_hz = 108.0 + 30.0 * u;
      s.vtl_scale = 0.90 + 0.14 * v;
      ++male;
    } else {
      const double u = (female + uniform(rng, 0.2, 0.8)) / n_female;
      const double v = (female_vtl[static_cast<std::size_t>(female)] +
                        uniform(rng, 0.2, 0.8)) /
                       n_female;
      s.f0_hz = 180.0 + 50.0 * u;
      s.vtl_scale = 1.08 + 0.14 * v;
      ++female;
    }
    s.tilt = uniform(rng, 0.82, 0.96);
    s.breathiness = uniform(rng, 0.01, 0.12);
    s.jitter = uniform(rng, 0.002, 0.008);
    s.bandwidth_scale = uniform(rng, 0.8, 1.3);
    out.push_back(s);
  }
  return out;
}

Waveform synthesize_utterance(const SpeakerProfile& speaker,
                              std::mt19937_64& rng, int sample_rate) {
  const double rate = sample_rate;
  auto samples = [&](double ms) {
    return static_cast<Eigen::Index>(std::lround(ms * rate / 1000.0));
  };

  std::vector<Segment> plan;
  const Eigen::Index lead = samples(uniform(rng, 80, 150));
  const int vowels = 5 + static_cast<int>(rng() % 4);
  for (int v = 0; v < vowels; ++v) {
    const auto& ref = kReferenceVowels[rng() % kVowelCount];
    Segment seg{true, samples(uniform(rng, 110, 220)), {}, 0.0};
    for (int f = 0; f < 5; ++f) {
      seg.formants[static_cast<std::size_t>(f)] =
          ref[static_cast<std::size_t>(f)] * speaker.vtl_scale;
    }
    plan.push_back(seg);
    if (v + 1 < vowels && uniform(rng) < 0.35) {
      plan.push_back({false, samples(uniform(rng, 60, 120)), seg.formants,
                      uniform(rng, 3500, 6000)});
    }
  }
  const Eigen::Index tail = samples(uniform(rng, 80, 150));

  Eigen::Index body = 0;
  Eigen::Index fricative_samples = 0;
  for (const auto& s : plan) {
    body += s.length;
    if (!s.voiced) fricative_samples += s.length;
  }
  const Eigen::Index total = lead + body + tail;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(total);
  Eigen::VectorXd frication = Eigen::VectorXd::Zero(total);

  const double contour_rate = uniform(rng, 1.5, 3.0);
  const double contour_phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  const double contour_depth = uniform(rng, 0.05, 0.10);
  const double body_sec = body / rate;

  const double aspiration = speaker.breathiness * 0.002 *
                            std::sqrt(pulse_energy(speaker.tilt) /
                                      pulse_energy(kReferenceTilt));
  std::array<Resonator, 5> tract;
  Resonator fricative;
  double glottal1 = 0.0, glottal2 = 0.0, radiation = 0.0;
  double phase = 1.0;
  double period_jitter = 1.0;
  std::array<double, 5> current = plan.front().formants;
  std::array<double, 5> from = current;
  const Eigen::Index ramp = samples(15.0);
  const Eigen::Index transition = samples(kTransitionMs);

  Eigen::Index pos = lead;
  for (const auto& seg : plan) {
    from = current;
    if (!seg.voiced) {
      fricative.tune(seg.fricative_hz, 900.0, rate);
    }
    for (Eigen::Index j = 0; j < seg.length; ++j, ++pos) {
      const double edge = std::min<double>(
          1.0, static_cast<double>(std::min(j, seg.length - 1 - j)) / ramp);
      const double t = (pos - lead) / rate;
      if (seg.voiced) {
        if (j % kCoeffUpdate == 0) {
          const double mix =
              std::min(1.0, static_cast<double>(j) / transition);
          for (int f = 0; f < 5; ++f) {
            const auto fi = static_cast<std::size_t>(f);
            current[fi] = from[fi] + mix * (seg.formants[fi] - from[fi]);
            tract[fi].tune(current[fi], kBandwidths[fi] * speaker.bandwidth_scale,
                           rate);
          }
        }
        const double f0 =
            speaker.f0_hz *
            (1.0 + contour_depth *
                       std::sin(2.0 * std::numbers::pi * contour_rate * t +
                                contour_phase)) *
            (1.0 - 0.08 * t / body_sec);
        phase += f0 / rate * period_jitter;
        double pulse = 0.0;
        if (phase >= 1.0) {
          phase -= std::floor(phase);
          pulse = 1.0;
          period_jitter = 1.0 + speaker.jitter * gaussian(rng);
        }
        // Two-pole glottal low-pass followed by lip radiation.
        const double g =
            pulse + 2.0 * speaker.tilt * glottal1 -
            speaker.tilt * speaker.tilt * glottal2;
        glottal2 = glottal1;
        glottal1 = g;
        const double flow = g * (1.0 - speaker.tilt) * (1.0 - speaker.tilt);
        double source = flow - radiation;
        radiation = flow;
        source += aspiration * gaussian(rng);
        double y = source;
        for (auto& r : tract) y = r.step(y);
        out[pos] = edge * y;
      } else {
        phase = 1.0;
        frication[pos] = edge * fricative.step(gaussian(rng));
        for (auto& r : tract) r.step(0.0);
      }
    }
  }

  // Frication sits a fixed distance below the voiced level.
  const double voiced_power = out.squaredNorm();
  const double noise_power = frication.squaredNorm();
  if (voiced_power > 0.0 && noise_power > 0.0) {
    const double voiced_samples = static_cast<double>(body - fricative_samples);
    const double fricative_db = uniform(rng, kFricativeDb - 4.0, kFricativeDb + 4.0);
    out += frication *
           std::sqrt(voiced_power / voiced_samples /
                     (noise_power / static_cast<double>(fricative_samples)) *
                     std::pow(10.0, fricative_db / 10.0));
  }
  const double peak = out.cwiseAbs().maxCoeff();
  if (peak > 0.0) out *= uniform(rng, 0.55, 0.8) / peak;
  return {out, sample_rate};
}

std::vector<CorpusUtterance> generate_corpus(const CorpusConfig& cfg) {
  if (cfg.utterances < 1) throw InvalidArgument("corpus needs utterances");
  const auto speakers = make_speakers(cfg);
  std::vector<CorpusUtterance> out;
  for (std::size_t k = 0; k < speakers.size(); ++k) {
    const auto& s = speakers[k];
    std::mt19937_64 rng(cfg.seed * 0xD1B54A32D192ED03ULL + 7919 * (k + 1));
    for (int u = 0; u < cfg.utterances; ++u) {
      char id[96];
      std::snprintf(id, sizeof id, "%s_u%02d", s.id.c_str(), u);
      out.push_back({id, s.id, s.gender,
                     synthesize_utterance(s, rng, cfg.sample_rate)});
    }
  }
  return out;
}

}  // namespace voiceguard
