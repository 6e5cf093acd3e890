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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "oracles.h"
#include "voiceguard/anonymize.h"
#include "voiceguard/errors.h"

using namespace voiceguard;
using Complex = std::complex<double>;

namespace {

PitchTrack make_pitch(std::vector<double> f0) {
  PitchTrack t;
  t.f0 = Eigen::Map<Eigen::VectorXd>(f0.data(), static_cast<Eigen::Index>(f0.size()));
  for (const double v : f0) t.voiced.push_back(v > 0.0);
  return t;
}

FormantTrack make_formants(std::vector<std::vector<double>> freqs) {
  FormantTrack t;
  for (const auto& frame : freqs) {
    FormantFrame f;
    for (const double hz : frame) f.push_back({hz, 0.1 * hz});
    t.frames.push_back(f);
  }
  return t;
}

double median(std::vector<double> v) {
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  return v[v.size() / 2];
}

double median_f0(const PitchTrack& t) {
  std::vector<double> v;
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    if (t.voiced[i]) v.push_back(t.f0[i]);
  }
  return median(v);
}

// Angles of the upper-half-plane poles of 1 + a_1 z^-1 + ..., ascending.
std::vector<double> pole_angles(const Eigen::VectorXd& lpc) {
  Eigen::VectorXd poly(lpc.size() + 1);
  poly << 1.0, lpc;
  const auto roots = poly_roots(poly);
  std::vector<double> out;
  for (Eigen::Index i = 0; i < roots.size(); ++i) {
    if (roots[i].imag() > 1e-9) out.push_back(std::arg(roots[i]));
  }
  std::sort(out.begin(), out.end());
  return out;
}

AnonymizationConfig independent(double alpha) {
  AnonymizationConfig cfg;
  cfg.strategy = Strategy::kGenderIndependent;
  cfg.alpha = alpha;
  cfg.noise_seed = 99;
  return cfg;
}

}  // namespace

TEST_CASE("gender-independent examples") {
  const PitchTrack f0 = make_pitch({200.0, 0.0, 180.0});
  const FormantTrack fm = make_formants({{500, 1500, 2500, 3500, 4500}, {}, {600}});

  SUBCASE("alpha 1 is the identity") {
    const auto s = scale_gender_independent(f0, fm, 1.0);
    CHECK(s.f0_anon.f0 == f0.f0);
    CHECK(s.f0_anon.voiced == f0.voiced);
    for (std::size_t i = 0; i < fm.frames.size(); ++i) {
      REQUIRE(s.formants_anon.frames[i].size() == fm.frames[i].size());
      for (std::size_t k = 0; k < fm.frames[i].size(); ++k) {
        CHECK(s.formants_anon.frames[i][k].frequency_hz == fm.frames[i][k].frequency_hz);
      }
    }
  }
  SUBCASE("alpha 1.1 on five formants") {
    const auto s = scale_gender_independent(f0, fm, 1.1);
    const std::vector<double> want = {550, 1650, 2750, 3850, 4950};
    for (std::size_t k = 0; k < 5; ++k) {
      CHECK(s.formants_anon.frames[0][k].frequency_hz == doctest::Approx(want[k]).epsilon(1e-14));
      // Bandwidths stay unless asked for.
      CHECK(s.formants_anon.frames[0][k].bandwidth_hz == fm.frames[0][k].bandwidth_hz);
    }
    CHECK(s.envelope_warp.size() == 3);
    CHECK((s.envelope_warp.array() == 1.1).all());
  }
  SUBCASE("alpha 0.5 halves f0 and keeps unvoiced at zero") {
    const auto s = scale_gender_independent(f0, fm, 0.5);
    CHECK(s.f0_anon.f0[0] == 100.0);
    CHECK(s.f0_anon.f0[1] == 0.0);
    CHECK_FALSE(s.f0_anon.voiced[1]);
  }
  SUBCASE("formants pushed past Nyquist are dropped and counted") {
    const auto s = scale_gender_independent(f0, fm, 1.5, 5000.0);
    CHECK(s.formants_anon.frames[0].size() == 3);
    CHECK(s.clipped_formants == 2);
  }
  SUBCASE("bandwidth scaling") {
    const auto s = scale_gender_independent(f0, fm, 1.2, 1e9, true);
    CHECK(s.formants_anon.frames[2][0].bandwidth_hz == doctest::Approx(72.0));
  }
  SUBCASE("invalid factors") {
    CHECK_THROWS_AS(scale_gender_independent(f0, fm, 0.0), InvalidArgument);
    CHECK_THROWS_AS(scale_gender_independent(f0, fm, -1.0), InvalidArgument);
  }
}

TEST_CASE("gender-dependent examples") {
  const PitchTrack f0 = make_pitch({120.0});
  const FormantTrack fm = make_formants({{800.0}});
  CHECK(scale_gender_dependent(f0, fm, 0.3, Gender::kMale).f0_anon.f0[0] ==
        doctest::Approx(156.0).epsilon(1e-14));
  CHECK(scale_gender_dependent(f0, fm, 0.3, Gender::kFemale)
            .formants_anon.frames[0][0].frequency_hz ==
        doctest::Approx(560.0).epsilon(1e-14));
  for (const Gender g : {Gender::kMale, Gender::kFemale}) {
    const auto s = scale_gender_dependent(f0, fm, 0.0, g);
    CHECK(s.f0_anon.f0[0] == 120.0);
    CHECK(s.formants_anon.frames[0][0].frequency_hz == 800.0);
  }
  CHECK_THROWS_AS(scale_gender_dependent(f0, fm, 0.3, Gender::kUnknown), MissingGender);
  CHECK_THROWS_AS(scale_gender_dependent(f0, fm, 1.0, Gender::kMale), InvalidArgument);
}

TEST_CASE("scaling matches direct evaluation on random tuples") {
  std::mt19937_64 rng(2026);
  std::uniform_real_distribution<double> hz(60.0, 400.0), formant(200.0, 5000.0),
      gi(0.5, 1.5), gd(0.0, 0.5);
  for (int k = 0; k < 1000; ++k) {
    const double f = hz(rng), F = formant(rng);
    const PitchTrack p = make_pitch({f});
    const FormantTrack fm = make_formants({{F}});
    const double a = gi(rng);
    const auto s = scale_gender_independent(p, fm, a);
    CHECK(s.f0_anon.f0[0] == a * f);
    CHECK(s.formants_anon.frames[0][0].frequency_hz == a * F);
    const double b = gd(rng);
    const Gender g = rng() % 2 ? Gender::kMale : Gender::kFemale;
    const double factor = g == Gender::kMale ? 1.0 + b : 1.0 - b;
    const auto d = scale_gender_dependent(p, fm, b, g);
    CHECK(d.f0_anon.f0[0] == factor * f);
    CHECK(d.formants_anon.frames[0][0].frequency_hz == factor * F);
  }
}

TEST_CASE("composition is exact") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> alpha(0.5, 1.5), hz(60.0, 400.0);
  for (int k = 0; k < 200; ++k) {
    const PitchTrack p = make_pitch({hz(rng), 0.0, hz(rng)});
    const FormantTrack fm = make_formants({{hz(rng) * 3, hz(rng) * 8}, {hz(rng) * 5}});
    const double a = alpha(rng), b = alpha(rng);
    const auto twice = scale_gender_independent(scale_gender_independent(p, fm, a, 8000.0), b);
    const auto once = scale_gender_independent(p, fm, a * b, 8000.0);
    CHECK(twice.factor == once.factor);
    CHECK(twice.f0_anon.f0 == once.f0_anon.f0);
    CHECK(twice.clipped_formants == once.clipped_formants);
    for (std::size_t i = 0; i < fm.frames.size(); ++i) {
      REQUIRE(twice.formants_anon.frames[i].size() == once.formants_anon.frames[i].size());
      for (std::size_t j = 0; j < once.formants_anon.frames[i].size(); ++j) {
        CHECK(twice.formants_anon.frames[i][j].frequency_hz ==
              once.formants_anon.frames[i][j].frequency_hz);
      }
    }
  }
}

TEST_CASE("config validation and strategy names") {
  AnonymizationConfig cfg;
  cfg.strategy = Strategy::kGenderIndependent;
  cfg.alpha = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg.alpha = 2.0;
  CHECK(cfg.validate().size() == 1);
  cfg.alpha = 1.0;
  CHECK(cfg.validate().empty());
  cfg.strategy = Strategy::kGenderDependent;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg.alpha = 0.8;
  CHECK(cfg.validate().size() == 1);
  cfg.alpha = std::nan("");
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);

  CHECK(parse_strategy("gender-independent") == Strategy::kGenderIndependent);
  CHECK(parse_strategy("gender_dependent") == Strategy::kGenderDependent);
  CHECK_THROWS_AS(parse_strategy("both"), InvalidArgument);
  CHECK(std::string(strategy_name(Strategy::kGenderDependent)) == "gender-dependent");
}

TEST_CASE("warp_envelope moves pole angles") {
  std::vector<Complex> roots;
  for (const double theta : {0.3, 0.9, 1.7}) {
    roots.push_back(std::polar(0.95, theta));
    roots.push_back(std::polar(0.95, -theta));
  }
  roots.push_back(0.5);
  const Eigen::VectorXd poly = oracle::poly_from_roots(roots);
  const Eigen::VectorXd lpc = poly.tail(poly.size() - 1);

  SUBCASE("factor 1 keeps the polynomial") {
    CHECK((warp_envelope(lpc, 1.0) - lpc).cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("angles scale by the factor") {
    WarpStats stats;
    const auto angles = pole_angles(warp_envelope(lpc, 1.2, &stats));
    REQUIRE(angles.size() == 3);
    CHECK(angles[0] == doctest::Approx(0.36));
    CHECK(angles[1] == doctest::Approx(1.08));
    CHECK(angles[2] == doctest::Approx(2.04));
    CHECK(stats.nyquist_clamped == 0);
  }
  SUBCASE("poles past the limit are clamped and counted") {
    WarpStats stats;
    const Eigen::VectorXd warped = warp_envelope(lpc, 2.0, &stats);
    CHECK(stats.nyquist_clamped == 1);
    const auto angles = pole_angles(warped);
    CHECK(angles.back() == doctest::Approx(kMaxWarpedAngle));
    Eigen::VectorXd p(warped.size() + 1);
    p << 1.0, warped;
    CHECK(poly_roots(p).cwiseAbs().maxCoeff() < 1.0);
  }
  SUBCASE("unstable poles are pulled inside") {
    const Eigen::VectorXd bad = oracle::poly_from_roots(
        {std::polar(1.02, 0.5), std::polar(1.02, -0.5)});
    WarpStats stats;
    const Eigen::VectorXd warped = warp_envelope(bad.tail(2), 1.0, &stats);
    CHECK(stats.unstable_clamped == 1);
    Eigen::Vector3d p(1.0, warped[0], warped[1]);
    CHECK(poly_roots(p).cwiseAbs().maxCoeff() == doctest::Approx(kStablePoleRadius));
  }
}

TEST_CASE("analysis-synthesis at alpha 1 preserves pitch and formants") {
  const Waveform w = oracle::vowel({700, 1220, 2600}, 120.0, 16000, 1.0);
  const auto r = anonymize_utterance(w, independent(1.0));
  const PitchTrack in = yin_f0(w, PitchConfig{});
  const PitchTrack out = yin_f0(r.audio, PitchConfig{});
  CHECK(median_f0(out) == doctest::Approx(median_f0(in)).epsilon(0.03));
  const FormantTrack fa = estimate_formants(w, FormantConfig{});
  const FormantTrack fb = estimate_formants(r.audio, FormantConfig{});
  for (int k = 0; k < 3; ++k) {
    CHECK(oracle::median_formant(fb, k) ==
          doctest::Approx(oracle::median_formant(fa, k)).epsilon(0.03));
  }
  CHECK(r.report.mean_f0_ratio == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("alpha 1.3 raises a 120 Hz vowel to 156 Hz") {
  const Waveform w = oracle::vowel({700, 1220, 2600}, 120.0, 16000, 1.0);
  const auto r = anonymize_utterance(w, independent(1.3));
  CHECK(median_f0(yin_f0(r.audio, PitchConfig{})) == doctest::Approx(156.0).epsilon(0.05));
}

TEST_CASE("alpha 0.7 lowers F1 of 700 Hz to 490 Hz") {
  const Waveform w = oracle::vowel({700, 1220, 2600}, 120.0, 16000, 1.0);
  const auto r = anonymize_utterance(w, independent(0.7));
  CHECK(oracle::median_formant(estimate_formants(r.audio, FormantConfig{}), 0) ==
        doctest::Approx(490.0).epsilon(0.07));
}

TEST_CASE("anonymization invariants") {
  const Waveform w = oracle::vowel({530, 1840, 2480}, 140.0, 16000, 0.8);
  for (const double alpha : {0.6, 1.0, 1.4}) {
    const auto a = anonymize_utterance(w, independent(alpha));
    const auto b = anonymize_utterance(w, independent(alpha));
    CHECK(a.audio.samples == b.audio.samples);
    CHECK(a.audio.size() == w.size());
    CHECK(a.report.output_samples == w.size());
    CHECK(a.audio.samples.cwiseAbs().maxCoeff() <= 1.0);

    const PitchTrack src = yin_f0(w, PitchConfig{});
    std::vector<Eigen::Index> voiced;
    for (Eigen::Index i = 0; i < src.size(); ++i) {
      if (src.voiced[i]) voiced.push_back(i);
    }
    CHECK(a.report.voiced_frames == voiced);
    CHECK(a.report.frames == src.size());
    CHECK((a.report.effective_factor.array() == alpha).all());
  }
}

TEST_CASE("gender-dependent pipeline uses the label") {
  const Waveform w = oracle::vowel({640, 1190, 2390}, 210.0, 16000, 0.8);
  AnonymizationConfig cfg;
  cfg.alpha = 0.2;
  cfg.gender = Gender::kFemale;
  const auto r = anonymize_utterance(w, cfg);
  CHECK(r.report.mean_f0_ratio == doctest::Approx(0.8).epsilon(0.05));
  cfg.gender = Gender::kUnknown;
  CHECK_THROWS_AS(anonymize_utterance(w, cfg), MissingGender);
}

TEST_CASE("degenerate inputs") {
  SUBCASE("silence is returned unchanged with a warning") {
    const Waveform w{Eigen::VectorXd::Zero(8000), 16000};
    const auto r = anonymize_utterance(w, independent(1.2));
    CHECK(r.report.silent_input);
    CHECK(r.audio.samples == w.samples);
    CHECK_FALSE(r.report.warnings.empty());
  }
  SUBCASE("too short") {
    CHECK_THROWS_AS(anonymize_utterance(Waveform{oracle::sine(200, 16000, 0.02), 16000},
                                        independent(1.0)),
                    EmptyInput);
  }
  SUBCASE("different seeds change only unvoiced noise") {
    const Waveform w{oracle::white_noise(8000, 1, 0.2), 16000};
    auto cfg = independent(1.0);
    const auto a = anonymize_utterance(w, cfg);
    cfg.noise_seed = 100;
    const auto b = anonymize_utterance(w, cfg);
    CHECK(a.audio.samples != b.audio.samples);
  }
}

TEST_CASE("resynthesize checks its tracks") {
  const Waveform w{oracle::sine(200, 16000, 0.2), 16000};
  const PitchTrack p = yin_f0(w, PitchConfig{});
  CHECK_THROWS_AS(resynthesize(w, p, PitchTrack{}, 1.0, 0), InvalidArgument);
  SynthesisStats stats;
  const Waveform out = resynthesize(w, p, p, 1.0, 0, 0, &stats);
  CHECK(out.size() == w.size());
  CHECK(stats.frames > 0);
}
