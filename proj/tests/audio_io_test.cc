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
#include <cstring>

#include "oracles.h"
#include "voiceguard/audio_io.h"
#include "voiceguard/errors.h"

using namespace voiceguard;

namespace {

const auto kDir = oracle::scratch_dir("audio_io");

// Amplitude of `freq` in x by correlation with a quadrature pair.
double tone_amplitude(const Eigen::VectorXd& x, double freq, int rate) {
  double c = 0.0, s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    c += x[i] * std::cos(2.0 * oracle::kPi * freq * i / rate);
    s += x[i] * std::sin(2.0 * oracle::kPi * freq * i / rate);
  }
  return 2.0 * std::hypot(c, s) / static_cast<double>(x.size());
}

}  // namespace

TEST_CASE("silence round-trips") {
  const Waveform w{Eigen::VectorXd::Zero(16000), 16000};
  write_wav(w, kDir / "silence.wav");
  const Waveform r = read_wav(kDir / "silence.wav");
  CHECK(r.sample_rate == 16000);
  REQUIRE(r.size() == 16000);
  CHECK(r.samples.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("16-bit round trip stays within quantization") {
  SUBCASE("full-scale 440 Hz sine") {
    const Waveform w{oracle::sine(440.0, 16000, 1.0, 32767.0 / 32768.0), 16000};
    write_wav(w, kDir / "sine.wav");
    const Waveform r = read_wav(kDir / "sine.wav");
    REQUIRE(r.size() == w.size());
    CHECK((r.samples - w.samples).cwiseAbs().maxCoeff() < std::pow(2.0, -14));
  }
  SUBCASE("ramp from -1 to 1") {
    const Waveform w{Eigen::VectorXd::LinSpaced(4001, -1.0, 1.0), 8000};
    write_wav(w, kDir / "ramp.wav");
    const Waveform r = read_wav(kDir / "ramp.wav");
    REQUIRE(r.size() == w.size());
    CHECK(r.sample_rate == 8000);
    CHECK((r.samples - w.samples).cwiseAbs().maxCoeff() <= std::pow(2.0, -14));
  }
  SUBCASE("idempotent after one pass") {
    const Waveform w{oracle::white_noise(5000, 3, 0.2), 16000};
    write_wav(w, kDir / "a.wav");
    const Waveform once = read_wav(kDir / "a.wav");
    write_wav(once, kDir / "b.wav");
    const Waveform twice = read_wav(kDir / "b.wav");
    CHECK(once.samples == twice.samples);
    CHECK(oracle::slurp(kDir / "a.wav") == oracle::slurp(kDir / "b.wav"));
  }
}

TEST_CASE("empty waveform writes a zero-duration file") {
  write_wav(Waveform{Eigen::VectorXd(0), 22050}, kDir / "empty.wav");
  CHECK(std::filesystem::file_size(kDir / "empty.wav") == 44);
  const Waveform r = read_wav(kDir / "empty.wav");
  CHECK(r.size() == 0);
  CHECK(r.sample_rate == 22050);
}

TEST_CASE("stereo with identical channels reads as the mono signal") {
  std::vector<std::int16_t> mono, stereo;
  for (int i = 0; i < 800; ++i) {
    const auto s = static_cast<std::int16_t>(1000.0 * std::sin(0.05 * i));
    mono.push_back(s);
    stereo.push_back(s);
    stereo.push_back(s);
  }
  oracle::write_raw_wav(kDir / "mono.wav", 1, 1, 16000, 16, oracle::pcm16_bytes(mono));
  oracle::write_raw_wav(kDir / "stereo.wav", 1, 2, 16000, 16,
                        oracle::pcm16_bytes(stereo));
  const Waveform m = read_wav(kDir / "mono.wav");
  const Waveform s = read_wav(kDir / "stereo.wav");
  REQUIRE(s.size() == 800);
  CHECK(s.samples == m.samples);
}

TEST_CASE("32-bit float input is accepted") {
  std::vector<std::uint8_t> bytes;
  for (const float f : {0.25f, -0.5f, 0.75f}) {
    std::uint8_t raw[4];
    std::memcpy(raw, &f, 4);
    bytes.insert(bytes.end(), raw, raw + 4);
  }
  oracle::write_raw_wav(kDir / "float.wav", 3, 1, 16000, 32, bytes);
  const Waveform r = read_wav(kDir / "float.wav");
  REQUIRE(r.size() == 3);
  CHECK(r.samples[1] == -0.5);
}

TEST_CASE("malformed and unsupported files") {
  SUBCASE("24-bit PCM names the encoding") {
    oracle::write_raw_wav(kDir / "pcm24.wav", 1, 1, 16000, 24,
                          std::vector<std::uint8_t>(30, 0));
    try {
      read_wav(kDir / "pcm24.wav");
      FAIL("expected UnsupportedFormat");
    } catch (const UnsupportedFormat& e) {
      CHECK(std::string(e.what()).find("24") != std::string::npos);
    }
  }
  SUBCASE("A-law") {
    oracle::write_raw_wav(kDir / "alaw.wav", 6, 1, 8000, 8,
                          std::vector<std::uint8_t>(10, 0));
    CHECK_THROWS_AS(read_wav(kDir / "alaw.wav"), UnsupportedFormat);
  }
  SUBCASE("not RIFF") {
    std::ofstream(kDir / "junk.wav") << "this is not audio at all";
    CHECK_THROWS_AS(read_wav(kDir / "junk.wav"), ParseError);
  }
  SUBCASE("truncated header") {
    std::ofstream(kDir / "short.wav") << "RIFF";
    CHECK_THROWS_AS(read_wav(kDir / "short.wav"), ParseError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(read_wav(kDir / "does_not_exist.wav"), IoError);
  }
  SUBCASE("unwritable path") {
    CHECK_THROWS_AS(write_wav(Waveform{Eigen::VectorXd::Zero(4), 16000},
                              kDir / "no_such_dir" / "x.wav"),
                    IoError);
  }
}

TEST_CASE("resample") {
  SUBCASE("equal rates are the identity") {
    const Waveform w{oracle::white_noise(999, 5), 16000};
    const Waveform r = resample(w, 16000);
    CHECK(r.samples == w.samples);
    CHECK(r.sample_rate == 16000);
  }
  SUBCASE("1 kHz survives 16 to 8 kHz") {
    const Waveform w{oracle::sine(1000.0, 16000, 1.0, 0.5), 16000};
    const Waveform r = resample(w, 8000);
    CHECK(r.sample_rate == 8000);
    CHECK(std::abs(r.size() - 8000) <= 1);
    const auto mid = r.samples.segment(400, 7200);
    CHECK(tone_amplitude(mid, 1000.0, 8000) == doctest::Approx(0.5).epsilon(0.01));
  }
  SUBCASE("5 kHz is rejected when going to 8 kHz") {
    const Waveform w{oracle::sine(5000.0, 16000, 1.0, 0.5), 16000};
    const Waveform r = resample(w, 8000);
    const double in = w.samples.squaredNorm() / w.size();
    const double out = r.samples.segment(400, 7200).squaredNorm() / 7200.0;
    CHECK(out < 0.01 * in);
  }
  SUBCASE("duration is preserved within one sample") {
    for (const int target : {8000, 11025, 22050, 44100, 10000}) {
      const Waveform w{oracle::white_noise(16001, 9), 16000};
      const Waveform r = resample(w, target);
      CHECK(std::abs(r.duration() - w.duration()) <= 1.0 / target + 1e-12);
    }
  }
  SUBCASE("upsampled tone keeps its amplitude") {
    const Waveform w{oracle::sine(440.0, 8000, 1.0, 0.5), 8000};
    const Waveform r = resample(w, 11000);
    const auto mid = r.samples.segment(1000, 9000);
    CHECK(tone_amplitude(mid, 440.0, 11000) == doctest::Approx(0.5).epsilon(0.01));
  }
  CHECK_THROWS_AS(resample(Waveform{Eigen::VectorXd::Zero(10), 16000}, 0),
                  InvalidArgument);
}

TEST_CASE("frame_signal") {
  SUBCASE("100 ms at 25/10 ms gives 10 frames") {
    const Waveform w{Eigen::VectorXd::Ones(1600), 16000};
    const auto seq = frame_signal(w, 25.0, 10.0, WindowKind::kRectangular);
    CHECK(seq.count() == 10);
    CHECK(seq.frame_len == 400);
    CHECK(seq.hop == 160);
  }
  SUBCASE("constant signal under Hann equals the scaled window") {
    const Waveform w{Eigen::VectorXd::Constant(1600, 0.3), 16000};
    const auto seq = frame_signal(w, 25.0, 10.0, WindowKind::kHann);
    const Eigen::VectorXd hann = make_window(WindowKind::kHann, 400);
    // Frames that lie entirely inside the signal.
    for (Eigen::Index i = 0; i * 160 + 400 <= 1600; ++i) {
      CHECK((seq.frames.col(i) - 0.3 * hann).cwiseAbs().maxCoeff() < 1e-15);
    }
  }
  SUBCASE("non-overlapping rectangular frames partition the padded signal") {
    const Eigen::VectorXd x = oracle::white_noise(1234, 11);
    const auto seq = frame_signal({x, 16000}, 10.0, 10.0, WindowKind::kRectangular);
    const Eigen::VectorXd joined =
        Eigen::Map<const Eigen::VectorXd>(seq.frames.data(), seq.frames.size());
    REQUIRE(joined.size() >= x.size());
    CHECK(joined.head(x.size()) == x);
    CHECK(joined.tail(joined.size() - x.size()).isZero(0.0));
  }
  CHECK_THROWS_AS(frame_signal(Waveform{Eigen::VectorXd::Zero(100), 16000}, 10.0,
                               20.0, WindowKind::kHann),
                  InvalidArgument);
}

TEST_CASE("windows") {
  const Eigen::VectorXd hann = make_window(WindowKind::kHann, 401);
  CHECK(hann.maxCoeff() == doctest::Approx(1.0));
  CHECK(make_window(WindowKind::kRectangular, 7) == Eigen::VectorXd::Ones(7));
  const Eigen::VectorXd g = make_window(WindowKind::kGaussian, 400);
  for (Eigen::Index i = 0; i < 200; ++i) CHECK(g[i] == doctest::Approx(g[399 - i]));
}

TEST_CASE("level_dbfs") {
  CHECK(level_dbfs(Eigen::VectorXd::Ones(10)) == doctest::Approx(0.0));
  CHECK(std::isinf(level_dbfs(Eigen::VectorXd::Zero(10))));
}
