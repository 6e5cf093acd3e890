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

#include "voiceguard/metrics.h"

#include <complex>
#include <limits>
#include <map>
#include <numbers>
#include <set>

#include <unsupported/Eigen/FFT>

namespace voiceguard {
namespace {

constexpr double kPreEmphasis = 0.97;

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

// Triangular filters on FFT bins 0..nfft/2, one row per filter.
Eigen::MatrixXd mel_filterbank(int num_filters, Eigen::Index nfft,
                               double rate) {
  const Eigen::Index bins = nfft / 2 + 1;
  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(num_filters, bins);
  const double mel_hi = hz_to_mel(rate / 2.0);
  std::vector<double> edges(static_cast<std::size_t>(num_filters) + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(mel_hi * static_cast<double>(i) / (num_filters + 1));
  }
  for (int m = 0; m < num_filters; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    for (Eigen::Index k = 0; k < bins; ++k) {
      const double f = k * rate / static_cast<double>(nfft);
      if (f > lo && f < mid) {
        fb(m, k) = (f - lo) / (mid - lo);
      } else if (f >= mid && f < hi) {
        fb(m, k) = (hi - f) / (hi - mid);
      }
    }
  }
  return fb;
}

std::map<std::string, std::vector<const Embedding*>> group_by_speaker(
    std::span<const Embedding> set) {
  std::map<std::string, std::vector<const Embedding*>> groups;
  for (const auto& e : set) groups[e.speaker_id].push_back(&e);
  return groups;
}

}  // namespace

Eigen::MatrixXd mfcc(const Waveform& w, int n_mfcc, double frame_ms,
                     double hop_ms) {
  if (n_mfcc < 8 || n_mfcc > 24) {
    throw InvalidArgument("n_mfcc must lie in [8, 24]");
  }
  Waveform emphasized = w;
  for (Eigen::Index i = w.samples.size() - 1; i > 0; --i) {
    emphasized.samples[i] = w.samples[i] - kPreEmphasis * w.samples[i - 1];
  }
  const FrameSequence frames =
      frame_signal(emphasized, frame_ms, hop_ms, WindowKind::kHann);
  if (frames.count() == 0) throw EmptyInput("no frames for MFCC analysis");

  Eigen::Index nfft = 1;
  while (nfft < frames.frame_len) nfft *= 2;
  const Eigen::MatrixXd fb = mel_filterbank(kMelFilters, nfft, w.sample_rate);

  Eigen::MatrixXd dct(n_mfcc, kMelFilters);
  for (int k = 1; k <= n_mfcc; ++k) {
    for (int m = 0; m < kMelFilters; ++m) {
      dct(k - 1, m) = std::sqrt(2.0 / kMelFilters) *
                      std::cos(std::numbers::pi * k * (m + 0.5) / kMelFilters);
    }
  }

  Eigen::FFT<double> fft;
  std::vector<double> buf(static_cast<std::size_t>(nfft));
  std::vector<std::complex<double>> spec;
  Eigen::VectorXd power(nfft / 2 + 1);
  Eigen::MatrixXd out(frames.count(), n_mfcc);
  for (Eigen::Index i = 0; i < frames.count(); ++i) {
    std::fill(buf.begin(), buf.end(), 0.0);
    for (Eigen::Index j = 0; j < frames.frame_len; ++j) {
      buf[static_cast<std::size_t>(j)] = frames.frames(j, i);
    }
    fft.fwd(spec, buf);
    for (Eigen::Index k = 0; k < power.size(); ++k) {
      power[k] = std::norm(spec[static_cast<std::size_t>(k)]);
    }
    Eigen::VectorXd energies = fb * power;
    if ((energies.array() <= kLogEnergyFloor).all()) {
      out.row(i).setZero();
      continue;
    }
    energies = energies.cwiseMax(kLogEnergyFloor).array().log();
    out.row(i) = (dct * energies).transpose();
  }
  return out;
}

Embedding speaker_embedding(const Waveform& w, const EmbeddingConfig& cfg) {
  const Eigen::MatrixXd coeffs = mfcc(w, cfg.n_mfcc, cfg.frame_ms, cfg.hop_ms);
  const FrameSequence raw =
      frame_signal(w, cfg.frame_ms, cfg.hop_ms, WindowKind::kRectangular);

  std::vector<Eigen::Index> active;
  for (Eigen::Index i = 0; i < raw.count(); ++i) {
    if (level_dbfs(raw.frames.col(i)) > cfg.activity_dbfs) active.push_back(i);
  }
  if (static_cast<int>(active.size()) < cfg.min_active_frames) {
    throw InsufficientSpeech("only " + std::to_string(active.size()) +
                             " active frames; need " +
                             std::to_string(cfg.min_active_frames));
  }
  const Eigen::Map<const Eigen::Matrix<Eigen::Index, -1, 1>> idx(
      active.data(), static_cast<Eigen::Index>(active.size()));
  const Eigen::MatrixXd sel = coeffs(idx, Eigen::all);
  const Eigen::RowVectorXd mean = sel.colwise().mean();
  const Eigen::RowVectorXd sd =
      ((sel.rowwise() - mean).array().square().colwise().mean()).sqrt();

  Embedding e;
  e.vector.resize(2 * cfg.n_mfcc);
  e.vector << mean.transpose(), sd.transpose();
  return e;
}

EerResult compute_eer(std::span<const double> target_scores,
                      std::span<const double> nontarget_scores) {
  if (target_scores.empty() || nontarget_scores.empty()) {
    throw InsufficientTrials("EER needs at least one target and one nontarget");
  }
  struct Scored {
    double score;
    bool target;
  };
  std::vector<Scored> all;
  all.reserve(target_scores.size() + nontarget_scores.size());
  for (double s : target_scores) all.push_back({s, true});
  for (double s : nontarget_scores) all.push_back({s, false});
  for (const auto& s : all) {
    if (!std::isfinite(s.score)) throw InvalidArgument("non-finite score");
  }
  std::sort(all.begin(), all.end(),
            [](const Scored& a, const Scored& b) { return a.score < b.score; });

  const double nt = static_cast<double>(target_scores.size());
  const double nn = static_cast<double>(nontarget_scores.size());

  // Operating points as the threshold rises through each distinct score,
  // ending with "reject everything" at the top.
  struct Point {
    double pfa, pmiss, threshold;
  };
  std::vector<Point> points;
  std::size_t misses = 0, false_alarms = nontarget_scores.size();
  for (std::size_t i = 0; i < all.size();) {
    const double t = all[i].score;
    points.push_back({false_alarms / nn, misses / nt, t});
    for (; i < all.size() && all[i].score == t; ++i) {
      if (all[i].target) {
        ++misses;
      } else {
        --false_alarms;
      }
    }
  }
  points.push_back({0.0, 1.0, all.back().score});

  // Lower convex hull ordered by increasing P_fa; points already run from
  // P_fa = 1 down to 0, so walk them in reverse.
  std::vector<Point> hull;
  for (auto it = points.rbegin(); it != points.rend(); ++it) {
    const Point& p = *it;
    if (!hull.empty() && hull.back().pfa == p.pfa) {
      if (p.pmiss >= hull.back().pmiss) continue;
      hull.pop_back();
    }
    while (hull.size() >= 2) {
      const Point& a = hull[hull.size() - 2];
      const Point& b = hull.back();
      const double cross = (b.pfa - a.pfa) * (p.pmiss - a.pmiss) -
                           (b.pmiss - a.pmiss) * (p.pfa - a.pfa);
      if (cross > 0.0) break;
      hull.pop_back();
    }
    hull.push_back(p);
  }

  for (std::size_t i = 0; i < hull.size(); ++i) {
    const double d = hull[i].pmiss - hull[i].pfa;
    if (d > 0.0) continue;
    if (d == 0.0 || i == 0) return {100.0 * hull[i].pfa, hull[i].threshold};
    const Point& a = hull[i - 1];
    const Point& b = hull[i];
    const double da = a.pmiss - a.pfa;
    const double lambda = da / (da - d);
    return {100.0 * (a.pfa + lambda * (b.pfa - a.pfa)),
            a.threshold + lambda * (b.threshold - a.threshold)};
  }
  return {100.0 * hull.back().pfa, hull.back().threshold};
}

EerResult compute_eer(const TrialScores& trials) {
  std::vector<double> tar, non;
  for (const auto& t : trials) (t.target ? tar : non).push_back(t.score);
  return compute_eer(tar, non);
}

const char* condition_name(Condition c) {
  switch (c) {
    case Condition::kOO: return "OO";
    case Condition::kOA: return "OA";
    case Condition::kAA: return "AA";
  }
  return "OO";
}

SimilarityMatrix similarity_matrix(std::span<const Embedding> orig,
                                   std::span<const Embedding> anon,
                                   Condition condition) {
  const auto orig_groups = group_by_speaker(orig);
  const auto anon_groups = group_by_speaker(anon);
  std::vector<std::string> speakers;
  for (const auto& [spk, _] : orig_groups) speakers.push_back(spk);
  std::vector<std::string> anon_speakers;
  for (const auto& [spk, _] : anon_groups) anon_speakers.push_back(spk);
  if (speakers != anon_speakers) {
    throw MismatchedSpeakers("original and anonymized speaker sets differ");
  }
  if (speakers.size() < 2) {
    throw InvalidArgument("similarity matrix needs at least two speakers");
  }
  for (const auto* groups : {&orig_groups, &anon_groups}) {
    for (const auto& [spk, utts] : *groups) {
      if (utts.size() < 2) {
        throw InvalidArgument("speaker " + spk +
                              " needs at least two utterances per condition");
      }
    }
  }

  const auto& rows = condition == Condition::kAA ? anon_groups : orig_groups;
  const auto& cols = condition == Condition::kOO ? orig_groups : anon_groups;
  const bool same_condition = condition != Condition::kOA;

  SimilarityMatrix m;
  m.condition = condition;
  m.speakers = speakers;
  const auto n = static_cast<Eigen::Index>(speakers.size());
  m.scores = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& left = rows.at(speakers[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto& right = cols.at(speakers[static_cast<std::size_t>(j)]);
      double sum = 0.0;
      long pairs = 0;
      for (const Embedding* a : left) {
        for (const Embedding* b : right) {
          if (same_condition && a->utterance_id == b->utterance_id) continue;
          sum += cosine_score(*a, *b);
          ++pairs;
        }
      }
      m.scores(i, j) = sum / static_cast<double>(pairs);
    }
  }
  return m;
}

double diagonal_dominance(const SimilarityMatrix& m) {
  const Eigen::Index n = m.scores.rows();
  if (n != m.scores.cols()) throw InvalidArgument("matrix is not square");
  if (n < 2) throw UndefinedDominance("dominance needs at least two speakers");
  // Mean of m(i,i) - m(i,j) over i != j, which equals mean(diagonal) minus
  // mean(off-diagonal) and is exactly zero for a constant matrix.
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j) sum += m.scores(i, i) - m.scores(i, j);
    }
  }
  return std::abs(sum / static_cast<double>(n * (n - 1)));
}

GvdResult gain_of_voice_distinctiveness(const SimilarityMatrix& m_oo,
                                        const SimilarityMatrix& m_aa) {
  if (m_oo.speakers != m_aa.speakers) {
    throw MismatchedSpeakers("similarity matrices cover different speakers");
  }
  GvdResult r;
  r.d_diag_oo = diagonal_dominance(m_oo);
  r.d_diag_aa = diagonal_dominance(m_aa);
  if (r.d_diag_oo == 0.0) {
    throw DegenerateReference("original-condition dominance is zero");
  }
  if (r.d_diag_aa == 0.0) {
    r.degenerate_anon = true;
    r.g_vd_db = -std::numeric_limits<double>::infinity();
    return r;
  }
  r.g_vd_db = 10.0 * std::log10(r.d_diag_aa / r.d_diag_oo);
  return r;
}

Eigen::VectorXd embedding_mean(std::span<const Embedding> embeddings) {
  if (embeddings.empty()) throw EmptyInput("no embeddings to average");
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(embeddings.front().vector.size());
  for (const auto& e : embeddings) {
    if (e.vector.size() != mean.size()) {
      throw InvalidArgument("embedding dimensions differ");
    }
    mean += e.vector;
  }
  return mean / static_cast<double>(embeddings.size());
}

std::vector<Embedding> center_embeddings(std::span<const Embedding> embeddings,
                                         const Eigen::VectorXd& mean) {
  std::vector<Embedding> out(embeddings.begin(), embeddings.end());
  for (auto& e : out) {
    if (e.vector.size() != mean.size()) {
      throw InvalidArgument("embedding dimensions differ");
    }
    e.vector -= mean;
  }
  return out;
}

}  // namespace voiceguard
