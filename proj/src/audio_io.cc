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

#include "voiceguard/audio_io.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "voiceguard/errors.h"

namespace voiceguard {
namespace {

constexpr std::uint16_t kFormatPcm = 0x0001;
constexpr std::uint16_t kFormatFloat = 0x0003;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

constexpr int kResampleTaps = 64;
constexpr double kKaiserBeta = 8.6;
// Passband edge as a fraction of the lower Nyquist frequency.
constexpr double kResampleCutoff = 0.95;

std::uint16_t get_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
  }
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

struct FormatChunk {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t block_align = 0;
  std::uint16_t bits = 0;
};

std::string describe_encoding(const FormatChunk& fmt) {
  std::string name;
  switch (fmt.format) {
    case kFormatPcm: name = "PCM"; break;
    case kFormatFloat: name = "IEEE float"; break;
    default: name = "format tag " + std::to_string(fmt.format); break;
  }
  return name + " " + std::to_string(fmt.bits) + "-bit";
}

double kaiser(double t) {
  if (std::abs(t) > 1.0) return 0.0;
  return std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(1.0 - t * t)) /
         std::cyl_bessel_i(0.0, kKaiserBeta);
}

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

}  // namespace

Eigen::Index ms_to_samples(double ms, int sample_rate) {
  return static_cast<Eigen::Index>(std::lround(ms * sample_rate / 1000.0));
}

Eigen::Index frame_count(Eigen::Index num_samples, Eigen::Index hop) {
  if (num_samples <= 0) return 0;
  return (num_samples + hop - 1) / hop;
}

Eigen::VectorXd make_window(WindowKind kind, Eigen::Index n) {
  Eigen::VectorXd w(n);
  switch (kind) {
    case WindowKind::kRectangular:
      w.setOnes();
      break;
    case WindowKind::kHann:
      for (Eigen::Index i = 0; i < n; ++i) {
        w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
      }
      break;
    case WindowKind::kGaussian: {
      const double edge = std::exp(-12.0 * 0.25);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double t = (i + 0.5) / n - 0.5;
        w[i] = (std::exp(-12.0 * t * t) - edge) / (1.0 - edge);
      }
      break;
    }
  }
  return w;
}

Waveform read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw ParseError(path.string() + ": not a RIFF/WAVE file");
  }

  FormatChunk fmt;
  bool have_fmt = false;
  const std::uint8_t* data = nullptr;
  std::size_t data_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::size_t size = get_u32(chunk + 4);
    const std::size_t available = bytes.size() - pos - 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || size > available) {
        throw ParseError(path.string() + ": truncated fmt chunk");
      }
      fmt.format = get_u16(chunk + 8);
      fmt.channels = get_u16(chunk + 10);
      fmt.sample_rate = get_u32(chunk + 12);
      fmt.block_align = get_u16(chunk + 20);
      fmt.bits = get_u16(chunk + 22);
      if (fmt.format == kFormatExtensible) {
        if (size < 40) {
          throw ParseError(path.string() + ": truncated extensible fmt chunk");
        }
        // The first two bytes of the sub-format GUID carry the format tag.
        fmt.format = get_u16(chunk + 8 + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      // Streaming writers leave the size as a placeholder; take what exists.
      data_size = std::min(size, available);
      break;
    }
    pos += 8 + size + (size & 1);
  }
  if (!have_fmt) throw ParseError(path.string() + ": missing fmt chunk");
  if (data == nullptr) throw ParseError(path.string() + ": missing data chunk");
  if (fmt.channels == 0 || fmt.sample_rate == 0) {
    throw ParseError(path.string() + ": invalid channel count or sample rate");
  }

  const bool pcm16 = fmt.format == kFormatPcm && fmt.bits == 16;
  const bool float32 = fmt.format == kFormatFloat && fmt.bits == 32;
  if (!pcm16 && !float32) {
    throw UnsupportedFormat(path.string() + ": unsupported encoding " +
                            describe_encoding(fmt));
  }
  const std::size_t bytes_per_sample = fmt.bits / 8;
  const std::size_t frame_bytes = bytes_per_sample * fmt.channels;
  if (fmt.block_align != 0 && fmt.block_align != frame_bytes) {
    throw ParseError(path.string() + ": block alignment does not match format");
  }
  const std::size_t num_frames = data_size / frame_bytes;

  Waveform w;
  w.sample_rate = static_cast<int>(fmt.sample_rate);
  w.samples = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_frames));
  for (std::size_t i = 0; i < num_frames; ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < fmt.channels; ++c) {
      const std::uint8_t* p = data + i * frame_bytes + c * bytes_per_sample;
      if (pcm16) {
        acc += static_cast<std::int16_t>(get_u16(p)) / 32768.0;
      } else {
        const std::uint32_t raw = get_u32(p);
        float f;
        std::memcpy(&f, &raw, sizeof f);
        acc += static_cast<double>(f);
      }
    }
    w.samples[static_cast<Eigen::Index>(i)] = acc / fmt.channels;
  }
  if (!w.samples.allFinite()) {
    throw ParseError(path.string() + ": non-finite sample values");
  }
  const double peak = w.samples.size() ? w.samples.cwiseAbs().maxCoeff() : 0.0;
  if (peak > 1.0) w.samples /= peak;
  return w;
}

void write_wav(const Waveform& w, const std::filesystem::path& path) {
  if (w.sample_rate <= 0) throw InvalidArgument("sample rate must be positive");
  const auto n = static_cast<std::uint32_t>(w.samples.size());
  std::vector<std::uint8_t> out;
  out.reserve(44 + 2 * static_cast<std::size_t>(n));
  put_tag(out, "RIFF");
  put_u32(out, 36 + 2 * n);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  put_tag(out, "data");
  put_u32(out, 2 * n);
  for (Eigen::Index i = 0; i < w.samples.size(); ++i) {
    const long q = std::clamp(std::lround(w.samples[i] * 32768.0), -32768L,
                              32767L);
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open " + path.string() + " for writing");
  file.write(reinterpret_cast<const char*>(out.data()),
             static_cast<std::streamsize>(out.size()));
  if (!file) throw IoError("write failed for " + path.string());
}

Waveform resample(const Waveform& w, int target_rate) {
  if (target_rate <= 0) throw InvalidArgument("target rate must be positive");
  if (w.sample_rate <= 0) throw InvalidArgument("source rate must be positive");
  if (target_rate == w.sample_rate) return w;

  // Output sample m sits at input position m * up / down; its fractional
  // part cycles through `down` phases, each with its own kernel.
  const std::int64_t g = std::gcd(w.sample_rate, target_rate);
  const std::int64_t up = w.sample_rate / g;
  const std::int64_t down = target_rate / g;
  const double scale =
      std::min(1.0, static_cast<double>(target_rate) / w.sample_rate);
  const double cutoff = kResampleCutoff * scale;
  const double half_width = (kResampleTaps / 2) / scale;
  const auto reach = static_cast<std::int64_t>(std::ceil(half_width));
  const std::int64_t taps = 2 * reach;

  Eigen::MatrixXd kernels(taps, down);
  for (std::int64_t r = 0; r < down; ++r) {
    const double frac = static_cast<double>(r) / down;
    for (std::int64_t j = 0; j < taps; ++j) {
      const double d = frac - static_cast<double>(j - reach + 1);
      kernels(j, r) = cutoff * sinc(cutoff * d) * kaiser(d / half_width);
    }
  }

  const std::int64_t n_in = w.samples.size();
  const std::int64_t n_out = (n_in * down + up / 2) / up;
  Waveform out;
  out.sample_rate = target_rate;
  out.samples = Eigen::VectorXd::Zero(n_out);
  for (std::int64_t m = 0; m < n_out; ++m) {
    const std::int64_t base = (m * up) / down;
    const std::int64_t phase = (m * up) % down;
    double acc = 0.0;
    for (std::int64_t j = 0; j < taps; ++j) {
      const std::int64_t k = base + j - reach + 1;
      if (k < 0 || k >= n_in) continue;
      acc += w.samples[k] * kernels(j, phase);
    }
    out.samples[m] = acc;
  }
  return out;
}

FrameSequence frame_signal(const Waveform& w, double frame_ms, double hop_ms,
                           WindowKind window_kind) {
  if (!(hop_ms > 0.0) || frame_ms < hop_ms) {
    throw InvalidArgument("framing requires frame_ms >= hop_ms > 0");
  }
  FrameSequence seq;
  seq.frame_len = ms_to_samples(frame_ms, w.sample_rate);
  seq.hop = std::max<Eigen::Index>(1, ms_to_samples(hop_ms, w.sample_rate));
  seq.window_kind = window_kind;
  const Eigen::Index n = w.samples.size();
  const Eigen::Index count = frame_count(n, seq.hop);
  const Eigen::VectorXd window = make_window(window_kind, seq.frame_len);
  seq.frames = Eigen::MatrixXd::Zero(seq.frame_len, count);
  for (Eigen::Index i = 0; i < count; ++i) {
    const Eigen::Index start = i * seq.hop;
    const Eigen::Index len = std::min(seq.frame_len, n - start);
    seq.frames.col(i).head(len) = w.samples.segment(start, len);
    seq.frames.col(i).array() *= window.array();
  }
  return seq;
}

}  // namespace voiceguard
