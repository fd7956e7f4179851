// SPDX-License-Identifier: Apache-2.0
#pragma once

// Run configuration and the pipeline stages behind the command-line tool.
//
// A run is driven by one master seed plus a layered key=value config: values
// from the config file first, command-line overrides on top. Section headers
// in the file ([model], [training], [synth], [metrics], [clustering],
// [factor], [stats]) qualify the keys that follow; `seed` and `threads` live
// outside any section. Unknown sections or keys are validation errors.
//
// Recognized keys:
//   seed, threads
//   model:      dims, depth, channels, kernel, dropout, modalities,
//               embedding_channels
//   training:   epochs, lr, batch, f64, folds
//   synth:      n, dims, groups, effect, phenotypes, loaded
//   metrics:    roi, pairs, background
//   clustering: grid, max_iter, window, pref_lo, pref_hi
//   factor:     varimax_iter, varimax_tol, threshold
//   stats:      bootstrap_m, replacement, alpha
//
// Every stage echoes the effective configuration into its artifacts, so a
// report file identifies the run that produced it without any out-of-band
// bookkeeping.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fusestrata/apcluster.hpp"
#include "fusestrata/factors.hpp"
#include "fusestrata/model.hpp"
#include "fusestrata/reconmetrics.hpp"
#include "fusestrata/report.hpp"
#include "fusestrata/stratstats.hpp"
#include "fusestrata/synth.hpp"
#include "fusestrata/trainer.hpp"

namespace fusestrata {

struct Dims {
  int nx = 0, ny = 0, nz = 0;
};

// "32x32x24" -> {32, 32, 24}
Dims parse_dims(const std::string& text);

struct RunConfig {
  // fully qualified key ("section.key", or bare "seed"/"threads") -> value
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const { return values.count(key) != 0; }
  // validates the key name; command-line overrides enter here
  void set(const std::string& key, const std::string& value);

  std::string get(const std::string& key, const std::string& fallback) const;
  int get_int(const std::string& key, int fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  uint64_t get_u64(const std::string& key, uint64_t fallback) const;

  uint64_t master_seed() const { return get_u64("seed", 7); }
  // `threads` key, then FUSESTRATA_THREADS, then 1; caps worker counts
  int threads() const;

  // data_dims, when given, fills model.dims if the config leaves it unset
  ModelConfig model_config(const Dims* data_dims = nullptr) const;
  TrainConfig train_config() const;
  int cv_folds() const { return get_int("training.folds", 10); }
  SynthConfig synth_config() const;
  CnrConfig cnr_config() const;
  GridConfig grid_config() const;
  BootstrapConfig bootstrap_config() const;
  double alpha() const { return get_double("stats.alpha", 0.05); }
  double loading_threshold() const { return get_double("factor.threshold", 0.3); }

  // effective settings in a fixed order; `resolved` substitutes the model
  // geometry actually used when dims were inferred from a dataset
  Provenance provenance(const ModelConfig* resolved = nullptr) const;
};

RunConfig parse_run_config(const std::string& text, const std::string& origin);
RunConfig load_run_config(const std::string& path);

// Stage entry points shared by the CLI and the end-to-end harness. Each
// writes its artifacts under out_dir and returns the in-memory result so a
// caller can chain stages without re-reading files; the chained pipeline
// below deliberately goes through the files instead, exercising the same
// round trip a user's multi-invocation workflow does.
SynthResult stage_synth(const RunConfig& rc, const std::string& out_dir);
std::vector<double> stage_train(const RunConfig& rc, const std::string& dataset_dir,
                                const std::string& out_dir);
EmbeddingTable stage_embed(const RunConfig& rc, const std::string& dataset_dir,
                           const std::string& checkpoint_path, const std::string& out_dir);
std::vector<MetricRow> stage_metrics(const RunConfig& rc, const std::string& dataset_dir,
                                     const std::string& checkpoint_path,
                                     const std::string& out_dir);
CvResult stage_cv(const RunConfig& rc, const std::string& dataset_dir,
                  const std::string& out_dir);
GridResult stage_cluster(const RunConfig& rc, const std::string& embeddings_csv,
                         const std::string& out_dir);
FactorModel stage_factors(const RunConfig& rc, const std::string& phenotypes_csv,
                          const std::string& out_dir);
StatReport stage_stats(const RunConfig& rc, const std::string& scores_csv,
                       const std::string& labels_csv, const std::string& out_dir);
ProfileMatrix stage_profile(const RunConfig& rc, const std::string& scores_csv,
                            const std::string& labels_csv, const std::string& out_dir);

// mid-flow parameter arithmetic for the `params` subcommand
std::string params_text(int channels, int kernel);

struct PipelineResult {
  std::vector<int> planted_labels;
  GridResult grid;
  FactorModel factors;
  StatReport stats;
  ProfileMatrix profile;
};

// synth -> train -> embed -> cluster -> factors -> stats -> profile, chained
// through the on-disk artifacts under out_dir
PipelineResult run_pipeline(const RunConfig& rc, const std::string& out_dir);

}  // namespace fusestrata
