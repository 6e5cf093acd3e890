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

#include "voiceguard/pipeline.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "voiceguard/errors.h"

namespace voiceguard {
namespace {

constexpr const char* kManifestHeader = "utterance_id,speaker_id,gender,wav_path";
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

// Reads non-empty lines; the first must equal `header` up to whitespace.
std::vector<std::vector<std::string>> read_csv(const fs::path& path,
                                               std::size_t columns,
                                               const std::string& header) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool seen_header = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (!seen_header) {
      seen_header = true;
      if (split_csv(line) != split_csv(header)) {
        throw ParseError(path.string() + ": expected header '" + header + "'");
      }
      continue;
    }
    auto cells = split_csv(line);
    if (cells.size() != columns) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected " + std::to_string(columns) + " columns");
    }
    rows.push_back(std::move(cells));
  }
  if (!seen_header) throw ParseError(path.string() + ": missing header");
  return rows;
}

std::string format_double(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

nlohmann::json finite_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string alpha_dir_name(double alpha) {
  return format_double("alpha_%.2f", alpha);
}

}  // namespace

Manifest read_manifest(const fs::path& path) {
  const auto rows = read_csv(path, 4, kManifestHeader);
  const fs::path base = path.parent_path();
  Manifest manifest;
  std::set<std::string> seen;
  for (const auto& cells : rows) {
    ManifestRow row;
    row.utterance_id = cells[0];
    row.speaker_id = cells[1];
    row.gender = parse_gender(cells[2]);
    if (row.utterance_id.empty() || row.speaker_id.empty() || cells[3].empty()) {
      throw ParseError(path.string() + ": empty manifest field");
    }
    if (!seen.insert(row.utterance_id).second) {
      throw ParseError(path.string() + ": duplicate utterance id " +
                       row.utterance_id);
    }
    fs::path wav = cells[3];
    if (wav.is_relative()) wav = base / wav;
    row.wav_path = wav.lexically_normal();
    if (!fs::exists(row.wav_path)) {
      throw IoError(path.string() + ": cannot resolve " + row.wav_path.string());
    }
    manifest.push_back(std::move(row));
  }
  return manifest;
}

void write_manifest(const Manifest& manifest, const fs::path& path) {
  std::string text = std::string(kManifestHeader) + "\n";
  const fs::path base = fs::absolute(path).lexically_normal().parent_path();
  for (const auto& row : manifest) {
    fs::path wav = fs::absolute(row.wav_path).lexically_normal();
    const fs::path rel = wav.lexically_relative(base);
    if (!rel.empty() && *rel.begin() != "..") wav = rel;
    text += row.utterance_id + "," + row.speaker_id + "," +
            gender_code(row.gender) + "," + wav.generic_string() + "\n";
  }
  write_text(path, text);
}

TrialScores read_trials(const fs::path& path) {
  TrialScores trials;
  for (const auto& cells : read_csv(path, 3, "enroll_utt,test_utt,label")) {
    Trial t;
    t.enroll_utt = cells[0];
    t.test_utt = cells[1];
    if (cells[2] == "target") {
      t.target = true;
    } else if (cells[2] != "nontarget") {
      throw ParseError(path.string() + ": label must be target or nontarget");
    }
    trials.push_back(std::move(t));
  }
  return trials;
}

void write_trials(const TrialScores& trials, const fs::path& path) {
  std::string text = "enroll_utt,test_utt,label\n";
  for (const auto& t : trials) {
    text += t.enroll_utt + "," + t.test_utt + "," +
            (t.target ? "target" : "nontarget") + "\n";
  }
  write_text(path, text);
}

void write_scores(const TrialScores& trials, const fs::path& path) {
  std::string text = "enroll_utt,test_utt,label,score\n";
  for (const auto& t : trials) {
    text += t.enroll_utt + "," + t.test_utt + "," +
            (t.target ? "target" : "nontarget") + "," +
            format_double("%.9f", t.score) + "\n";
  }
  write_text(path, text);
}

TrialScores default_trials(const Manifest& manifest, int enroll_per_speaker) {
  std::map<std::string, int> seen;
  std::vector<const ManifestRow*> enroll, test;
  for (const auto& row : manifest) {
    (seen[row.speaker_id]++ < enroll_per_speaker ? enroll : test).push_back(&row);
  }
  TrialScores trials;
  for (const auto* e : enroll) {
    for (const auto* t : test) {
      trials.push_back({e->utterance_id, t->utterance_id,
                        e->speaker_id == t->speaker_id, 0.0});
    }
  }
  return trials;
}

void parallel_for(std::size_t n, int jobs,
                  const std::function<void(std::size_t)>& fn) {
  if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::uint64_t utterance_seed(std::uint64_t seed,
                             const std::string& utterance_id) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : utterance_id) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (h | 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

nlohmann::json report_to_json(const AnonymizationReport& r) {
  nlohmann::json j;
  j["utterance_id"] = r.utterance_id;
  j["strategy"] = strategy_name(r.strategy);
  j["alpha"] = r.alpha;
  j["gender"] = gender_code(r.gender);
  j["noise_seed"] = r.noise_seed;
  j["sample_rate"] = r.sample_rate;
  j["input_samples"] = r.input_samples;
  j["output_samples"] = r.output_samples;
  j["frames"] = r.frames;
  j["voiced_frames"] = r.voiced_frames;
  j["effective_factor"] = std::vector<double>(
      r.effective_factor.data(),
      r.effective_factor.data() + r.effective_factor.size());
  j["formant_clip_count"] = r.formant_clip_count;
  j["nyquist_clamped_poles"] = r.nyquist_clamped_poles;
  j["unstable_poles_clamped"] = r.unstable_poles_clamped;
  j["source_mean_f0"] = r.source_mean_f0;
  j["output_mean_f0"] = r.output_mean_f0;
  j["mean_f0_ratio"] = r.mean_f0_ratio;
  j["silent_input"] = r.silent_input;
  j["warnings"] = r.warnings;
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

AnonymizeSummary run_anonymize(const Manifest& manifest,
                               const AnonymizationConfig& base,
                               std::uint64_t seed, const fs::path& out_dir,
                               int jobs) {
  fs::create_directories(out_dir);
  AnonymizeSummary summary;
  summary.reports.resize(manifest.size());
  if (manifest.empty()) summary.warnings.push_back("manifest is empty");

  parallel_for(manifest.size(), jobs, [&](std::size_t i) {
    const ManifestRow& row = manifest[i];
    AnonymizationConfig cfg = base;
    cfg.gender = row.gender;
    cfg.noise_seed = utterance_seed(seed, row.utterance_id);
    AnonymizationReport& report = summary.reports[i];
    try {
      const Waveform w = read_wav(row.wav_path);
      auto result = anonymize_utterance(w, cfg);
      write_wav(result.audio, out_dir / (row.utterance_id + ".wav"));
      report = std::move(result.report);
    } catch (const std::exception& e) {
      report = AnonymizationReport{};
      report.strategy = cfg.strategy;
      report.alpha = cfg.alpha;
      report.gender = cfg.gender;
      report.noise_seed = cfg.noise_seed;
      report.error = e.what();
    }
    report.utterance_id = row.utterance_id;
  });

  std::string lines;
  Manifest anonymized;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const auto& report = summary.reports[i];
    lines += report_to_json(report).dump() + "\n";
    if (report.error.empty()) {
      ManifestRow row = manifest[i];
      row.wav_path = out_dir / (row.utterance_id + ".wav");
      anonymized.push_back(std::move(row));
    } else {
      ++summary.failures;
    }
  }
  write_text(out_dir / "reports.jsonl", lines);
  write_manifest(anonymized, out_dir / "manifest.csv");
  return summary;
}

CorpusAnalysis analyze_corpus(const Manifest& manifest,
                              const EvaluateOptions& opts) {
  CorpusAnalysis out;
  out.embeddings.resize(manifest.size());
  out.pitch.resize(manifest.size());
  parallel_for(manifest.size(), opts.jobs, [&](std::size_t i) {
    const auto& row = manifest[i];
    const Waveform w = read_wav(row.wav_path);
    try {
      out.embeddings[i] = speaker_embedding(w, opts.embedding);
    } catch (const Error& e) {
      throw Error(row.utterance_id + ": " + e.what());
    }
    out.embeddings[i].utterance_id = row.utterance_id;
    out.embeddings[i].speaker_id = row.speaker_id;
    out.pitch[i] = yin_f0(w, opts.pitch);
    out.pitch[i].utterance_id = row.utterance_id;
  });
  return out;
}

Manifest resolve_anonymized(const Manifest& orig, const fs::path& anon_dir) {
  Manifest candidates;
  const fs::path anon_manifest = anon_dir / "manifest.csv";
  if (fs::exists(anon_manifest)) {
    candidates = read_manifest(anon_manifest);
  } else {
    for (const auto& row : orig) {
      ManifestRow r = row;
      r.wav_path = anon_dir / (row.utterance_id + ".wav");
      if (fs::exists(r.wav_path)) candidates.push_back(std::move(r));
    }
  }

  std::set<std::string> orig_speakers, anon_speakers;
  for (const auto& r : orig) orig_speakers.insert(r.speaker_id);
  for (const auto& r : candidates) anon_speakers.insert(r.speaker_id);
  if (!candidates.empty() && orig_speakers != anon_speakers) {
    throw MismatchedSpeakers("speakers in " + anon_dir.string() +
                             " do not match the original manifest");
  }

  std::unordered_map<std::string, const ManifestRow*> by_id;
  for (const auto& r : candidates) by_id[r.utterance_id] = &r;
  Manifest out;
  std::string missing;
  int n_missing = 0;
  for (const auto& row : orig) {
    const auto it = by_id.find(row.utterance_id);
    if (it == by_id.end()) {
      missing += (n_missing++ ? ", " : "") + row.utterance_id;
      continue;
    }
    out.push_back(*it->second);
  }
  if (n_missing > 0) {
    throw MissingCounterpart("missing anonymized utterances: " + missing);
  }
  return out;
}

MetricsReport run_evaluate(const Manifest& orig, const fs::path& anon_dir,
                           const TrialScores& trials,
                           const EvaluateOptions& opts,
                           const CorpusAnalysis* orig_analysis) {
  const Manifest anon = resolve_anonymized(orig, anon_dir);
  CorpusAnalysis computed;
  if (orig_analysis == nullptr) {
    computed = analyze_corpus(orig, opts);
    orig_analysis = &computed;
  }
  const CorpusAnalysis anon_analysis = analyze_corpus(anon, opts);

  MetricsReport report;
  // An utterance whose original pitch is trackable but whose anonymized
  // pitch is not has lost its intonation and counts as zero correlation.
  double rho_sum = 0.0;
  for (std::size_t i = 0; i < orig.size(); ++i) {
    const PitchTrack& o = orig_analysis->pitch[i];
    try {
      rho_sum += pitch_correlation(o, anon_analysis.pitch[i], opts.correlation).rho;
      ++report.rho_f0_utterances;
    } catch (const InsufficientOverlap&) {
      if (o.voiced_count() >= 3) {
        report.rho_f0_lost.push_back(orig[i].utterance_id);
        ++report.rho_f0_utterances;
      } else {
        report.rho_f0_skipped.push_back(orig[i].utterance_id);
      }
    } catch (const DegenerateInput&) {
      report.rho_f0_skipped.push_back(orig[i].utterance_id);
    }
  }
  report.rho_f0 =
      report.rho_f0_utterances > 0 ? rho_sum / report.rho_f0_utterances : kNaN;

  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < orig.size(); ++i) index[orig[i].utterance_id] = i;
  const Eigen::VectorXd centre = embedding_mean(orig_analysis->embeddings);
  const auto orig_emb = center_embeddings(orig_analysis->embeddings, centre);
  const auto anon_emb = center_embeddings(anon_analysis.embeddings, centre);
  report.scored = trials;
  for (auto& t : report.scored) {
    const auto e = index.find(t.enroll_utt);
    const auto s = index.find(t.test_utt);
    if (e == index.end() || s == index.end()) {
      throw InvalidArgument("trial references unknown utterance " +
                            (e == index.end() ? t.enroll_utt : t.test_utt));
    }
    t.score = cosine_score(orig_emb[e->second], anon_emb[s->second]);
  }
  const EerResult eer = compute_eer(report.scored);
  report.eer_pct = eer.eer_pct;
  report.eer_threshold = eer.threshold;
  report.n_trials = static_cast<int>(report.scored.size());

  report.m_oo = similarity_matrix(orig_emb, anon_emb, Condition::kOO);
  report.m_aa = similarity_matrix(orig_emb, anon_emb, Condition::kAA);
  const GvdResult gvd = gain_of_voice_distinctiveness(report.m_oo, report.m_aa);
  report.g_vd = gvd.g_vd_db;
  report.g_vd_degenerate = gvd.degenerate_anon;
  report.d_diag_oo = gvd.d_diag_oo;
  report.d_diag_aa = gvd.d_diag_aa;
  report.n_speakers = static_cast<int>(report.m_oo.speakers.size());
  return report;
}

nlohmann::json metrics_to_json(const MetricsReport& r) {
  nlohmann::json j;
  j["eer_pct"] = finite_or_null(r.eer_pct);
  j["rho_f0"] = finite_or_null(r.rho_f0);
  j["g_vd"] = finite_or_null(r.g_vd);
  j["d_diag_oo"] = r.d_diag_oo;
  j["d_diag_aa"] = r.d_diag_aa;
  j["n_trials"] = r.n_trials;
  j["n_speakers"] = r.n_speakers;
  j["eer_threshold"] = finite_or_null(r.eer_threshold);
  j["rho_f0_utterances"] = r.rho_f0_utterances;
  j["rho_f0_skipped"] = r.rho_f0_skipped;
  j["rho_f0_lost"] = r.rho_f0_lost;
  j["g_vd_degenerate"] = r.g_vd_degenerate;
  j["attacker_model"] = "ignorant";
  return j;
}

nlohmann::json similarity_to_json(const SimilarityMatrix& m) {
  nlohmann::json j;
  j["condition"] = condition_name(m.condition);
  j["speakers"] = m.speakers;
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.scores.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(m.scores.cols()));
    for (Eigen::Index k = 0; k < m.scores.cols(); ++k) {
      row[static_cast<std::size_t>(k)] = m.scores(i, k);
    }
    rows.push_back(row);
  }
  j["scores"] = rows;
  return j;
}

void write_evaluation(const MetricsReport& report, const fs::path& path) {
  const fs::path dir = path.parent_path();
  if (!dir.empty()) fs::create_directories(dir);
  write_text(path, metrics_to_json(report).dump(2) + "\n");
  write_scores(report.scored, dir / "scores.csv");
  write_text(dir / "similarity_oo.json",
             similarity_to_json(report.m_oo).dump(2) + "\n");
  write_text(dir / "similarity_aa.json",
             similarity_to_json(report.m_aa).dump(2) + "\n");
}

std::vector<SweepRow> run_sweep(const Manifest& manifest, const SweepSpec& spec,
                                const AnonymizationConfig& base,
                                const EvaluateOptions& eval) {
  if (spec.alphas.empty()) throw InvalidArgument("sweep needs at least one alpha");
  AnonymizationConfig cfg = base;
  cfg.strategy = spec.strategy;
  for (double a : spec.alphas) {
    cfg.alpha = a;
    cfg.validate();
  }
  fs::create_directories(spec.out_dir);

  EvaluateOptions opts = eval;
  opts.jobs = spec.jobs;
  const TrialScores trials = spec.trials ? *spec.trials : default_trials(manifest);
  std::optional<CorpusAnalysis> orig_analysis;
  std::string orig_error;
  try {
    orig_analysis = analyze_corpus(manifest, opts);
  } catch (const std::exception& e) {
    orig_error = e.what();
  }

  std::vector<SweepRow> rows;
  for (double a : spec.alphas) {
    SweepRow row;
    row.alpha = a;
    cfg.alpha = a;
    const fs::path dir = spec.out_dir / alpha_dir_name(a);
    try {
      const auto summary = run_anonymize(manifest, cfg, spec.seed, dir, spec.jobs);
      row.failures = summary.failures;
      if (!orig_analysis) throw Error(orig_error);
      const MetricsReport report =
          run_evaluate(manifest, dir, trials, opts, &*orig_analysis);
      write_evaluation(report, dir / "metrics.json");
      row.eer_pct = report.eer_pct;
      row.rho_f0 = report.rho_f0;
      row.g_vd = report.g_vd;
    } catch (const std::exception& e) {
      row.eer_pct = row.rho_f0 = row.g_vd = kNaN;
      row.error = e.what();
    }
    rows.push_back(row);
  }

  std::string csv = "alpha,eer_pct,rho_f0,g_vd\n";
  std::string eer_dat = "# alpha eer_pct\n";
  std::string rho_dat = "# alpha rho_f0\n";
  std::string gvd_dat = "# alpha g_vd\n";
  nlohmann::json summary;
  summary["strategy"] = strategy_name(spec.strategy);
  summary["seed"] = spec.seed;
  summary["rows"] = nlohmann::json::array();
  for (const auto& r : rows) {
    const std::string a = format_double("%.2f", r.alpha);
    csv += a + "," + format_double("%.6f", r.eer_pct) + "," +
           format_double("%.6f", r.rho_f0) + "," +
           format_double("%.6f", r.g_vd) + "\n";
    eer_dat += a + " " + format_double("%.6f", r.eer_pct) + "\n";
    rho_dat += a + " " + format_double("%.6f", r.rho_f0) + "\n";
    gvd_dat += a + " " + format_double("%.6f", r.g_vd) + "\n";
    nlohmann::json jr;
    jr["alpha"] = r.alpha;
    jr["eer_pct"] = finite_or_null(r.eer_pct);
    jr["rho_f0"] = finite_or_null(r.rho_f0);
    jr["g_vd"] = finite_or_null(r.g_vd);
    jr["failures"] = r.failures;
    if (!r.error.empty()) jr["error"] = r.error;
    summary["rows"].push_back(jr);
  }
  write_text(spec.out_dir / "sweep.csv", csv);
  write_text(spec.out_dir / "eer.dat", eer_dat);
  write_text(spec.out_dir / "rho_f0.dat", rho_dat);
  write_text(spec.out_dir / "g_vd.dat", gvd_dat);
  write_text(spec.out_dir / "sweep.json", summary.dump(2) + "\n");
  return rows;
}

Manifest write_corpus(const std::vector<CorpusUtterance>& corpus,
                      const fs::path& out_dir) {
  fs::create_directories(out_dir);
  Manifest manifest;
  for (const auto& u : corpus) {
    const fs::path wav = out_dir / (u.utterance_id + ".wav");
    write_wav(u.audio, wav);
    manifest.push_back({u.utterance_id, u.speaker_id, u.gender, wav});
  }
  write_manifest(manifest, out_dir / "manifest.csv");
  write_trials(default_trials(manifest), out_dir / "trials.csv");
  return manifest;
}

}  // namespace voiceguard
