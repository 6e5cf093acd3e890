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

// Reference implementations and signal generators used only by the tests.
// Apart from the data types, only cosine_score comes from the library.

#ifndef VOICEGUARD_TESTS_ORACLES_H_
#define VOICEGUARD_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "voiceguard/audio_io.h"
#include "voiceguard/metrics.h"

namespace oracle {

inline constexpr double kPi = std::numbers::pi;

inline Eigen::VectorXd sine(double freq, int rate, double seconds,
                            double amp = 0.5, double phase = 0.0) {
  const auto n = static_cast<Eigen::Index>(std::lround(seconds * rate));
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x[i] = amp * std::sin(2.0 * kPi * freq * i / rate + phase);
  }
  return x;
}

// Equal-amplitude harmonics 1..count below Nyquist, peak-normalized to amp.
inline Eigen::VectorXd harmonic_tone(double f0, int rate, double seconds,
                                     int count = 5, double amp = 0.5) {
  const auto n = static_cast<Eigen::Index>(std::lround(seconds * rate));
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  for (int h = 1; h <= count && h * f0 < rate / 2.0; ++h) {
    for (Eigen::Index i = 0; i < n; ++i) {
      x[i] += std::sin(2.0 * kPi * h * f0 * i / rate) / h;
    }
  }
  return x * (amp / x.cwiseAbs().maxCoeff());
}

inline Eigen::VectorXd white_noise(Eigen::Index n, std::uint64_t seed,
                                   double sigma = 0.1) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, sigma);
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = gauss(rng);
  return x;
}

inline Eigen::VectorXd impulse_train(double f0, int rate, Eigen::Index n) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  double phase = 1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    phase += f0 / rate;
    if (phase >= 1.0) {
      phase -= 1.0;
      x[i] = 1.0;
    }
  }
  return x;
}

// Impulse train through a double real pole at `pole` and a first difference:
// a crude glottal pulse with lip radiation, about -12 dB/octave above the
// corner and rising below it.
inline Eigen::VectorXd glottal_source(double f0, int rate, Eigen::Index n,
                                      double pole = 0.98) {
  Eigen::VectorXd x = impulse_train(f0, rate, n);
  double g1 = 0.0, g2 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double g = x[i] + 2.0 * pole * g1 - pole * pole * g2;
    g2 = g1;
    g1 = g;
    x[i] = g;
  }
  for (Eigen::Index i = n - 1; i > 0; --i) x[i] -= x[i - 1];
  return x;
}

// Cascade of two-pole resonators y = x + b1 y[-1] + b2 y[-2].
inline Eigen::VectorXd resonate(Eigen::VectorXd x,
                                const std::vector<double>& freqs,
                                double bandwidth, int rate) {
  for (const double f : freqs) {
    const double r = std::exp(-kPi * bandwidth / rate);
    const double b1 = 2.0 * r * std::cos(2.0 * kPi * f / rate);
    const double b2 = -r * r;
    double y1 = 0.0, y2 = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double y = x[i] + b1 * y1 + b2 * y2;
      y2 = y1;
      y1 = y;
      x[i] = y;
    }
  }
  return x;
}

inline voiceguard::Waveform normalized(Eigen::VectorXd x, int rate,
                                       double peak = 0.5) {
  x *= peak / x.cwiseAbs().maxCoeff();
  return {x, rate};
}

// Stationary vowel with known formants.
inline voiceguard::Waveform vowel(const std::vector<double>& formants,
                                  double f0, int rate = 16000,
                                  double seconds = 0.5, bool glottal = true,
                                  double bandwidth = 80.0) {
  const auto n = static_cast<Eigen::Index>(std::lround(seconds * rate));
  Eigen::VectorXd src =
      glottal ? glottal_source(f0, rate, n) : impulse_train(f0, rate, n);
  return normalized(resonate(src, formants, bandwidth, rate), rate);
}

// x[t] = -a1 x[t-1] - a2 x[t-2] + e[t] for the conjugate pole pair at
// radius r and angle theta; returns the process and the true (a1, a2).
inline Eigen::VectorXd ar2(double radius, double theta, Eigen::Index n,
                           std::uint64_t seed, Eigen::Vector2d* coeffs) {
  const double a1 = -2.0 * radius * std::cos(theta);
  const double a2 = radius * radius;
  if (coeffs != nullptr) *coeffs << a1, a2;
  const Eigen::VectorXd e = white_noise(n + 1000, seed, 1.0);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n + 1000);
  for (Eigen::Index t = 0; t < x.size(); ++t) {
    x[t] = e[t];
    if (t >= 1) x[t] -= a1 * x[t - 1];
    if (t >= 2) x[t] -= a2 * x[t - 2];
  }
  return x.tail(n);
}

// Monic polynomial with the given roots, highest power first. Roots must
// come in conjugate pairs for the imaginary parts to cancel.
inline Eigen::VectorXd poly_from_roots(
    const std::vector<std::complex<double>>& roots) {
  std::vector<std::complex<double>> c{1.0};
  for (const auto& r : roots) {
    std::vector<std::complex<double>> next(c.size() + 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i] += c[i];
      next[i + 1] -= r * c[i];
    }
    c = std::move(next);
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(c.size()));
  for (std::size_t i = 0; i < c.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = c[i].real();
  }
  return out;
}

// Median of the k-th formant over all frames that have one.
template <typename Track>
double median_formant(const Track& track, int k) {
  std::vector<double> v;
  for (const auto& f : track.frames) {
    if (static_cast<int>(f.size()) > k) {
      v.push_back(f[static_cast<std::size_t>(k)].frequency_hz);
    }
  }
  if (v.empty()) return 0.0;
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  return v[v.size() / 2];
}

// EER of the ROC convex hull by exhaustive search: every operating point
// (accept when score >= t, for t over all scores and +inf) is paired with
// every other, and the lowest point where a connecting chord meets
// P_fa = P_miss is the hull crossing.
inline double eer_exhaustive(const std::vector<double>& tgt,
                             const std::vector<double>& non) {
  std::vector<double> thresholds(tgt);
  thresholds.insert(thresholds.end(), non.begin(), non.end());
  thresholds.push_back(std::numeric_limits<double>::infinity());
  std::vector<std::pair<double, double>> pts;  // (p_fa, p_miss)
  for (const double t : thresholds) {
    double fa = 0.0, miss = 0.0;
    for (const double s : non) fa += s >= t ? 1.0 : 0.0;
    for (const double s : tgt) miss += s < t ? 1.0 : 0.0;
    pts.emplace_back(fa / non.size(), miss / tgt.size());
  }
  double best = 1.0;
  for (const auto& [fa1, m1] : pts) {
    for (const auto& [fa2, m2] : pts) {
      // d(s) = (fa - miss) along the chord from point 1 to point 2.
      const double d1 = fa1 - m1;
      const double d2 = fa2 - m2;
      if (d1 == 0.0) best = std::min(best, fa1);
      if (d1 * d2 < 0.0) {
        const double s = d1 / (d1 - d2);
        best = std::min(best, fa1 + s * (fa2 - fa1));
      }
    }
  }
  return 100.0 * best;
}

inline double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.dot(b) / (a.norm() * b.norm());
}

// Similarity matrix by explicit enumeration of utterance pairs, speakers in
// sorted order. `left` supplies row speakers and `right` column speakers;
// `skip_same` drops pairs that are the same utterance index. Pairs are scored
// with the library cosine and summed in input order, so the result is
// bit-comparable.
inline Eigen::MatrixXd brute_similarity(
    const std::vector<voiceguard::Embedding>& left,
    const std::vector<voiceguard::Embedding>& right, bool skip_same) {
  std::map<std::string, int> index;
  for (const auto& e : left) index.emplace(e.speaker_id, 0);
  int k = 0;
  for (auto& [id, i] : index) i = k++;
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(k, k);
  Eigen::MatrixXd count = Eigen::MatrixXd::Zero(k, k);
  for (std::size_t a = 0; a < left.size(); ++a) {
    for (std::size_t b = 0; b < right.size(); ++b) {
      if (skip_same && a == b) continue;
      const int i = index.at(left[a].speaker_id);
      const int j = index.at(right[b].speaker_id);
      sum(i, j) += voiceguard::cosine_score(left[a], right[b]);
      count(i, j) += 1.0;
    }
  }
  return sum.cwiseQuotient(count);
}

// Hand-built RIFF/WAVE file with arbitrary format fields.
inline void write_raw_wav(const std::filesystem::path& path,
                          std::uint16_t format, std::uint16_t channels,
                          std::uint32_t rate, std::uint16_t bits,
                          const std::vector<std::uint8_t>& data) {
  std::vector<std::uint8_t> b;
  auto u16 = [&](std::uint32_t v) {
    b.push_back(static_cast<std::uint8_t>(v & 0xFF));
    b.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
  };
  auto u32 = [&](std::uint32_t v) {
    u16(v & 0xFFFF);
    u16(v >> 16);
  };
  auto tag = [&](const char* t) { b.insert(b.end(), t, t + 4); };
  const std::uint16_t align = static_cast<std::uint16_t>(channels * bits / 8);
  tag("RIFF");
  u32(static_cast<std::uint32_t>(36 + data.size()));
  tag("WAVE");
  tag("fmt ");
  u32(16);
  u16(format);
  u16(channels);
  u32(rate);
  u32(rate * align);
  u16(align);
  u16(bits);
  tag("data");
  u32(static_cast<std::uint32_t>(data.size()));
  b.insert(b.end(), data.begin(), data.end());
  std::ofstream(path, std::ios::binary)
      .write(reinterpret_cast<const char*>(b.data()),
             static_cast<std::streamsize>(b.size()));
}

inline std::vector<std::uint8_t> pcm16_bytes(const std::vector<std::int16_t>& v) {
  std::vector<std::uint8_t> out;
  for (const auto s : v) {
    const auto u = static_cast<std::uint16_t>(s);
    out.push_back(static_cast<std::uint8_t>(u & 0xFF));
    out.push_back(static_cast<std::uint8_t>(u >> 8));
  }
  return out;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("voiceguard_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace oracle

#endif  // VOICEGUARD_TESTS_ORACLES_H_
