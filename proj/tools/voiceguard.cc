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

// voiceguard: batch anonymization, evaluation and factor sweeps.
//
// Exit status: 0 on success, 1 when any utterance (or sweep point) failed,
// 2 on usage or fatal errors.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "voiceguard/errors.h"
#include "voiceguard/pipeline.h"

namespace vg = voiceguard;

namespace {

struct Options {
  std::string manifest;
  std::string out;
  std::string strategy = "gender-dependent";
  double alpha = 0.3;
  std::uint64_t seed = 0;
  int jobs = 0;
  std::string trials;
  std::string anon_dir;
  std::vector<double> alphas;
  int speakers = 8;
  int utterances = 10;
  std::string prefix = "spk";
  int sample_rate = 16000;
  double f0_min = 60.0;
  double f0_max = 500.0;
  double yin_threshold = 0.15;
  bool fixed_ceiling = false;
  bool scale_bandwidths = false;
  bool interpolate_unvoiced = false;
};

void require(const std::string& value, const char* flag, const char* cmd) {
  if (value.empty()) {
    throw vg::InvalidArgument(std::string(cmd) + " requires " + flag);
  }
}

vg::AnonymizationConfig anonymization_config(const Options& o) {
  vg::AnonymizationConfig cfg;
  cfg.strategy = vg::parse_strategy(o.strategy);
  cfg.alpha = o.alpha;
  cfg.pitch.f0_min = o.f0_min;
  cfg.pitch.f0_max = o.f0_max;
  cfg.pitch.yin_threshold = o.yin_threshold;
  cfg.fixed_ceiling = o.fixed_ceiling;
  cfg.scale_bandwidths = o.scale_bandwidths;
  return cfg;
}

vg::EvaluateOptions evaluate_options(const Options& o) {
  vg::EvaluateOptions opts;
  opts.pitch.f0_min = o.f0_min;
  opts.pitch.f0_max = o.f0_max;
  opts.pitch.yin_threshold = o.yin_threshold;
  opts.correlation.interpolate_unvoiced = o.interpolate_unvoiced;
  opts.jobs = o.jobs;
  return opts;
}

int cmd_anonymize(const Options& o) {
  require(o.manifest, "--manifest", "anonymize");
  require(o.out, "--out", "anonymize");
  const auto cfg = anonymization_config(o);
  for (const auto& w : cfg.validate()) std::cerr << "warning: " << w << "\n";
  const auto manifest = vg::read_manifest(o.manifest);
  const auto summary = vg::run_anonymize(manifest, cfg, o.seed, o.out, o.jobs);
  for (const auto& w : summary.warnings) std::cerr << "warning: " << w << "\n";
  for (const auto& r : summary.reports) {
    if (!r.error.empty()) std::cerr << r.utterance_id << ": " << r.error << "\n";
  }
  std::cerr << summary.reports.size() - static_cast<std::size_t>(summary.failures)
            << " anonymized, " << summary.failures << " failed\n";
  return summary.failures > 0 ? 1 : 0;
}

int cmd_evaluate(const Options& o) {
  require(o.manifest, "--manifest", "evaluate");
  require(o.anon_dir, "--anon-dir", "evaluate");
  require(o.out, "--out", "evaluate");
  const auto manifest = vg::read_manifest(o.manifest);
  const auto trials =
      o.trials.empty() ? vg::default_trials(manifest) : vg::read_trials(o.trials);
  const auto report =
      vg::run_evaluate(manifest, o.anon_dir, trials, evaluate_options(o));
  vg::write_evaluation(report, o.out);
  std::cout << vg::metrics_to_json(report).dump(2) << "\n";
  return 0;
}

std::vector<double> default_alphas(vg::Strategy s) {
  if (s == vg::Strategy::kGenderIndependent) {
    return {0.5, 0.7, 0.9, 1.1, 1.3, 1.5};
  }
  return {0.1, 0.2, 0.3, 0.4, 0.5};
}

int cmd_sweep(const Options& o) {
  require(o.manifest, "--manifest", "sweep");
  require(o.out, "--out", "sweep");
  const auto base = anonymization_config(o);
  vg::SweepSpec spec;
  spec.strategy = base.strategy;
  spec.alphas = o.alphas.empty() ? default_alphas(spec.strategy) : o.alphas;
  spec.out_dir = o.out;
  spec.seed = o.seed;
  spec.jobs = o.jobs;
  if (!o.trials.empty()) spec.trials = vg::read_trials(o.trials);
  const auto manifest = vg::read_manifest(o.manifest);
  const auto rows = vg::run_sweep(manifest, spec, base, evaluate_options(o));
  int status = 0;
  std::printf("alpha,eer_pct,rho_f0,g_vd\n");
  for (const auto& r : rows) {
    std::printf("%.2f,%.6f,%.6f,%.6f\n", r.alpha, r.eer_pct, r.rho_f0, r.g_vd);
    if (!r.error.empty()) {
      std::fprintf(stderr, "alpha %.2f: %s\n", r.alpha, r.error.c_str());
    }
    if (!r.error.empty() || r.failures > 0) status = 1;
  }
  return status;
}

int cmd_gen_corpus(const Options& o) {
  require(o.out, "--out", "gen-corpus");
  vg::CorpusConfig cfg;
  cfg.speakers = o.speakers;
  cfg.utterances = o.utterances;
  cfg.seed = o.seed;
  cfg.sample_rate = o.sample_rate;
  cfg.prefix = o.prefix;
  const auto manifest = vg::write_corpus(vg::generate_corpus(cfg), o.out);
  std::cerr << manifest.size() << " utterances written to " << o.out << "\n";
  return 0;
}

int cmd_extract(const Options& o) {
  require(o.manifest, "--manifest", "extract");
  require(o.out, "--out", "extract");
  const auto manifest = vg::read_manifest(o.manifest);
  const auto cfg = anonymization_config(o);
  vg::fs::create_directories(o.out);
  std::vector<std::string> errors(manifest.size());
  vg::parallel_for(manifest.size(), o.jobs, [&](std::size_t i) {
    const auto& row = manifest[i];
    try {
      const auto w = vg::read_wav(row.wav_path);
      vg::FormantConfig fc = cfg.formant;
      if (!cfg.fixed_ceiling) fc.ceiling_hz = vg::FormantConfig::ceiling_for(row.gender);
      fc.frame_ms = cfg.pitch.frame_ms;
      fc.hop_ms = cfg.pitch.hop_ms;
      vg::write_pitch_csv(vg::yin_f0(w, cfg.pitch),
                          vg::fs::path(o.out) / (row.utterance_id + ".f0.csv"));
      vg::write_formant_csv(vg::estimate_formants(w, fc), fc.max_formants,
                            vg::fs::path(o.out) / (row.utterance_id + ".formants.csv"));
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  int failures = 0;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (errors[i].empty()) continue;
    ++failures;
    std::cerr << manifest[i].utterance_id << ": " << errors[i] << "\n";
  }
  return failures > 0 ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Speaker anonymization by formant and F0 scaling"};
  app.set_config("--config", "", "Flat key=value file; flags take precedence");
  app.require_subcommand(1);

  Options o;
  app.add_option("--manifest", o.manifest, "Manifest CSV");
  app.add_option("--out", o.out, "Output directory (metrics file for evaluate)");
  app.add_option("--strategy", o.strategy, "gender-independent | gender-dependent")
      ->capture_default_str();
  app.add_option("--alpha", o.alpha, "Scaling factor")->capture_default_str();
  app.add_option("--seed", o.seed, "Noise and corpus seed")
      ->envname("VOICEGUARD_SEED")
      ->capture_default_str();
  app.add_option("--jobs", o.jobs, "Worker threads (0 = all cores)")
      ->capture_default_str();
  app.add_option("--trials", o.trials, "Trial list CSV");
  app.add_option("--anon-dir", o.anon_dir, "Anonymized corpus directory");
  app.add_option("--alphas", o.alphas, "Sweep factors")->delimiter(',');
  app.add_option("--speakers", o.speakers)->capture_default_str();
  app.add_option("--utterances", o.utterances, "Utterances per speaker")
      ->capture_default_str();
  app.add_option("--prefix", o.prefix, "Speaker id prefix")->capture_default_str();
  app.add_option("--sample-rate", o.sample_rate)->capture_default_str();
  app.add_option("--f0-min", o.f0_min)->capture_default_str();
  app.add_option("--f0-max", o.f0_max)->capture_default_str();
  app.add_option("--yin-threshold", o.yin_threshold)->capture_default_str();
  app.add_flag("--fixed-ceiling", o.fixed_ceiling,
               "Use 5500 Hz formant ceiling for every speaker");
  app.add_flag("--scale-bandwidths", o.scale_bandwidths);
  app.add_flag("--interpolate-unvoiced", o.interpolate_unvoiced,
               "Interpolate F0 over unvoiced frames for the pitch correlation");

  auto* anonymize = app.add_subcommand("anonymize", "Anonymize every manifest row");
  auto* evaluate = app.add_subcommand("evaluate", "EER, pitch correlation and G_vd");
  auto* sweep = app.add_subcommand("sweep", "Anonymize and evaluate over a factor list");
  auto* gen = app.add_subcommand("gen-corpus", "Write the synthetic desk corpus");
  auto* extract = app.add_subcommand("extract", "Dump pitch and formant CSVs");
  for (auto* sub : {anonymize, evaluate, sweep, gen, extract}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*anonymize) return cmd_anonymize(o);
    if (*evaluate) return cmd_evaluate(o);
    if (*sweep) return cmd_sweep(o);
    if (*gen) return cmd_gen_corpus(o);
    if (*extract) return cmd_extract(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
