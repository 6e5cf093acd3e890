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

// Evaluation metrics: a lightweight MFCC-statistics speaker verifier with
// cosine scoring, equal error rate, voice similarity matrices and the gain
// of voice distinctiveness.

#ifndef VOICEGUARD_METRICS_H_
#define VOICEGUARD_METRICS_H_

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "voiceguard/audio_io.h"
#include "voiceguard/errors.h"

namespace voiceguard {

inline constexpr int kMelFilters = 26;
inline constexpr double kLogEnergyFloor = 1e-10;

// Mel-filterbank cepstra, one row per frame, coefficients 1..n_mfcc (the
// energy term c0 is dropped). Frames whose filterbank energies all sit at
// the log floor yield exactly zero coefficients.
Eigen::MatrixXd mfcc(const Waveform& w, int n_mfcc = 20, double frame_ms = 25.0,
                     double hop_ms = 10.0);

struct EmbeddingConfig {
  int n_mfcc = 20;
  double frame_ms = 25.0;
  double hop_ms = 10.0;
  double activity_dbfs = -50.0;
  int min_active_frames = 50;
};

struct Embedding {
  Eigen::VectorXd vector;
  std::string utterance_id;
  std::string speaker_id;
};

// Per-coefficient mean and standard deviation over frames louder than
// activity_dbfs. Throws InsufficientSpeech below min_active_frames.
Embedding speaker_embedding(const Waveform& w, const EmbeddingConfig& cfg = {});

template <typename DerivedA, typename DerivedB>
double cosine_score(const Eigen::MatrixBase<DerivedA>& a,
                    const Eigen::MatrixBase<DerivedB>& b) {
  if (a.size() != b.size()) {
    throw InvalidArgument("embedding dimensions differ");
  }
  double aa = 0.0, bb = 0.0, ab = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    aa += a[i] * a[i];
    bb += b[i] * b[i];
    ab += a[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) throw DegenerateEmbedding("zero-norm embedding");
  return std::clamp(ab / std::sqrt(aa * bb), -1.0, 1.0);
}

inline double cosine_score(const Embedding& a, const Embedding& b) {
  return cosine_score(a.vector, b.vector);
}

// Mean embedding of a set; throws EmptyInput when empty.
Eigen::VectorXd embedding_mean(std::span<const Embedding> embeddings);

// Subtracts `mean` from every embedding. The verifier scores centred
// embeddings, with the mean taken from the enrollment (original) corpus.
std::vector<Embedding> center_embeddings(std::span<const Embedding> embeddings,
                                         const Eigen::VectorXd& mean);

struct Trial {
  std::string enroll_utt;
  std::string test_utt;
  bool target = false;
  double score = 0.0;
};

using TrialScores = std::vector<Trial>;

struct EerResult {
  double eer_pct = 0.0;
  double threshold = 0.0;
};

// Equal error rate from the convex hull of the ROC (the usual ROCCH-EER):
// operating points are swept over every distinct score (accept when
// score >= threshold), the lower hull of (P_fa, P_miss) is taken and the
// EER is read off where it crosses P_fa = P_miss, interpolating linearly
// between the two adjacent hull points. The threshold is interpolated the
// same way.
EerResult compute_eer(std::span<const double> target_scores,
                      std::span<const double> nontarget_scores);
EerResult compute_eer(const TrialScores& trials);

enum class Condition { kOO, kOA, kAA };
const char* condition_name(Condition c);

struct SimilarityMatrix {
  Eigen::MatrixXd scores;
  std::vector<std::string> speakers;  // row/column order, sorted
  Condition condition = Condition::kOO;
};

// Entry (i, j) is the mean cosine score over pairs of utterances of speaker
// i and speaker j. OO pairs original with original, AA anonymized with
// anonymized (same-utterance pairs excluded in both), OA original with
// anonymized. Throws MismatchedSpeakers when the two sets disagree.
SimilarityMatrix similarity_matrix(std::span<const Embedding> orig,
                                   std::span<const Embedding> anon,
                                   Condition condition);

// |mean(diagonal) - mean(off-diagonal)|.
double diagonal_dominance(const SimilarityMatrix& m);

struct GvdResult {
  double g_vd_db = 0.0;  // -inf when the anonymized dominance is zero
  double d_diag_oo = 0.0;
  double d_diag_aa = 0.0;
  bool degenerate_anon = false;
};

// 10 log10(D_diag(M_aa) / D_diag(M_oo)).
GvdResult gain_of_voice_distinctiveness(const SimilarityMatrix& m_oo,
                                        const SimilarityMatrix& m_aa);

}  // namespace voiceguard

#endif  // VOICEGUARD_METRICS_H_
