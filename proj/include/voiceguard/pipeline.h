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

// Corpus-level drivers behind the command-line tool: manifests and trial
// lists, batch anonymization, evaluation and factor sweeps.

#ifndef VOICEGUARD_PIPELINE_H_
#define VOICEGUARD_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "voiceguard/anonymize.h"
#include "voiceguard/corpus.h"
#include "voiceguard/metrics.h"
#include "voiceguard/pitch.h"

namespace voiceguard {

namespace fs = std::filesystem;

struct ManifestRow {
  std::string utterance_id;
  std::string speaker_id;
  Gender gender = Gender::kUnknown;
  fs::path wav_path;  // absolute once loaded
};

using Manifest = std::vector<ManifestRow>;

// CSV with header utterance_id,speaker_id,gender,wav_path. Relative paths
// resolve against the manifest's directory. Throws ParseError on malformed
// rows or duplicate ids and IoError on unresolvable paths.
Manifest read_manifest(const fs::path& path);
// Paths are written relative to the manifest's directory when possible.
void write_manifest(const Manifest& manifest, const fs::path& path);

// CSV enroll_utt,test_utt,label with label target|nontarget.
TrialScores read_trials(const fs::path& path);
void write_trials(const TrialScores& trials, const fs::path& path);
// Same columns with the score appended.
void write_scores(const TrialScores& trials, const fs::path& path);

// The first `enroll_per_speaker` utterances of each speaker (manifest order)
// enroll; every remaining utterance is tested against every enrollment.
TrialScores default_trials(const Manifest& manifest,
                           int enroll_per_speaker = 2);

// Runs fn(0..n-1) over a pool of `jobs` threads (0 = hardware threads).
void parallel_for(std::size_t n, int jobs,
                  const std::function<void(std::size_t)>& fn);

// Per-utterance noise seed derived from the run seed and the utterance id, so
// results do not depend on scheduling.
std::uint64_t utterance_seed(std::uint64_t seed, const std::string& utterance_id);

nlohmann::json report_to_json(const AnonymizationReport& report);

struct AnonymizeSummary {
  std::vector<AnonymizationReport> reports;  // manifest order
  int failures = 0;
  std::vector<std::string> warnings;
};

// Writes <utterance_id>.wav per row, reports.jsonl (one report per line, in
// manifest order) and manifest.csv describing the anonymized set. Failures
// are recorded in the report's `error` field; processing continues.
AnonymizeSummary run_anonymize(const Manifest& manifest,
                               const AnonymizationConfig& base,
                               std::uint64_t seed, const fs::path& out_dir,
                               int jobs = 0);

// Embeddings and pitch tracks of one condition, in manifest order.
struct CorpusAnalysis {
  std::vector<Embedding> embeddings;
  std::vector<PitchTrack> pitch;
};

struct EvaluateOptions {
  EmbeddingConfig embedding;
  PitchConfig pitch;
  PitchCorrelationOptions correlation;
  int jobs = 0;
};

CorpusAnalysis analyze_corpus(const Manifest& manifest,
                              const EvaluateOptions& opts);

struct MetricsReport {
  double eer_pct = 0.0;
  double eer_threshold = 0.0;
  double rho_f0 = 0.0;
  int rho_f0_utterances = 0;
  // Originals without enough voiced frames to correlate.
  std::vector<std::string> rho_f0_skipped;
  // Counted as zero: pitch trackable in the original but not after anonymization.
  std::vector<std::string> rho_f0_lost;
  double g_vd = 0.0;
  bool g_vd_degenerate = false;
  double d_diag_oo = 0.0;
  double d_diag_aa = 0.0;
  int n_trials = 0;
  int n_speakers = 0;
  TrialScores scored;
  SimilarityMatrix m_oo;
  SimilarityMatrix m_aa;
};

// Resolves the anonymized counterpart of every original utterance in
// anon_dir (via anon_dir/manifest.csv when present, else <id>.wav with the
// original labels). Throws MismatchedSpeakers when speaker sets differ and
// MissingCounterpart listing absent ids.
Manifest resolve_anonymized(const Manifest& orig, const fs::path& anon_dir);

// Ignorant attacker: enrollment on originals, tests on anonymized audio.
// Embeddings of both conditions are centred on the original-corpus mean
// before cosine scoring. rho_f0 is the mean per-utterance Pearson
// correlation; G_vd compares the OO and AA similarity matrices.
MetricsReport run_evaluate(const Manifest& orig, const fs::path& anon_dir,
                           const TrialScores& trials,
                           const EvaluateOptions& opts = {},
                           const CorpusAnalysis* orig_analysis = nullptr);

nlohmann::json metrics_to_json(const MetricsReport& report);
nlohmann::json similarity_to_json(const SimilarityMatrix& m);
// Writes metrics JSON to `path` plus scores.csv, similarity_oo.json and
// similarity_aa.json next to it.
void write_evaluation(const MetricsReport& report, const fs::path& path);

struct SweepSpec {
  Strategy strategy = Strategy::kGenderIndependent;
  std::vector<double> alphas;
  fs::path out_dir;
  std::uint64_t seed = 0;
  int jobs = 0;
  std::optional<TrialScores> trials;
};

struct SweepRow {
  double alpha = 0.0;
  double eer_pct = 0.0;
  double rho_f0 = 0.0;
  double g_vd = 0.0;
  int failures = 0;
  std::string error;
};

// Per alpha: anonymize into out_dir/alpha_<a>/, evaluate there, then write
// sweep.csv (alpha,eer_pct,rho_f0,g_vd) and gnuplot data files eer.dat,
// rho_f0.dat, g_vd.dat. A failing alpha leaves NaNs in its row.
std::vector<SweepRow> run_sweep(const Manifest& manifest, const SweepSpec& spec,
                                const AnonymizationConfig& base,
                                const EvaluateOptions& eval = {});

// Writes <id>.wav for every utterance plus manifest.csv and trials.csv.
Manifest write_corpus(const std::vector<CorpusUtterance>& corpus,
                      const fs::path& out_dir);

}  // namespace voiceguard

#endif  // VOICEGUARD_PIPELINE_H_
