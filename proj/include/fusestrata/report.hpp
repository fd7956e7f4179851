// SPDX-License-Identifier: Apache-2.0
#pragma once

// Artifact emission. Every writer prepends the same provenance block (config
// echo + master seed) and formats numbers with round-trippable precision, so
// identical runs produce byte-identical files. Nothing here writes a
// timestamp.

#include <string>
#include <utility>
#include <vector>

#include "fusestrata/apcluster.hpp"
#include "fusestrata/factors.hpp"
#include "fusestrata/stratstats.hpp"
#include "fusestrata/trainer.hpp"

namespace fusestrata {

struct Provenance {
  std::vector<std::pair<std::string, std::string>> entries;

  void add(const std::string& key, const std::string& value) { entries.emplace_back(key, value); }
  void add(const std::string& key, const char* value) { entries.emplace_back(key, value); }
  void add(const std::string& key, double value) { entries.emplace_back(key, fmt_double(value)); }
  void add(const std::string& key, int value) { entries.emplace_back(key, std::to_string(value)); }
  void add(const std::string& key, uint64_t value) {
    entries.emplace_back(key, std::to_string(value));
  }
  void add(const std::string& key, bool value) {
    entries.emplace_back(key, value ? "true" : "false");
  }
};

// --- cross-validation / metrics ---
void write_metrics_csv(const std::string& path, const std::vector<MetricRow>& rows,
                       const Provenance& prov);
std::vector<MetricRow> read_metrics_csv(const std::string& path);
void write_fold_medians_csv(const std::string& path, const CvResult& cv, const Provenance& prov);
void write_cv_summary_json(const std::string& path, const CvResult& cv, const Provenance& prov);
void write_boxplot_svg(const std::string& path, const CvResult& cv, const Provenance& prov);
void write_loss_curve_csv(const std::string& path, const std::vector<double>& curve,
                          const Provenance& prov);

// --- embeddings / clustering ---
struct EmbeddingTable {
  std::vector<std::string> subject_ids;
  TensorD values;  // n x e
};
void write_embeddings_csv(const std::string& path, const std::vector<std::string>& subject_ids,
                          const TensorD& values, const Provenance& prov);
EmbeddingTable read_embeddings_csv(const std::string& path);

struct LabelTable {
  std::vector<std::string> subject_ids;
  std::vector<int> labels;
};
void write_labels_csv(const std::string& path, const std::vector<std::string>& subject_ids,
                      const std::vector<int>& labels, const Provenance& prov);
LabelTable read_labels_csv(const std::string& path);
void write_grid_csv(const std::string& path, const std::vector<GridCell>& table,
                    const Provenance& prov);
void write_cluster_summary_json(const std::string& path, const ClusterResult& result,
                                const Provenance& prov);

// --- factors ---
void write_loadings_csv(const std::string& path, const FactorModel& fm, const Provenance& prov);
// Fig 5-style display: |loading| below the threshold renders as an empty cell.
void write_thresholded_loadings_csv(const std::string& path, const FactorModel& fm,
                                    double abs_threshold, const Provenance& prov);
void write_thresholded_loadings_txt(const std::string& path, const FactorModel& fm,
                                    double abs_threshold, const Provenance& prov);
void write_scores_csv(const std::string& path, const std::vector<std::string>& subject_ids,
                      const TensorD& scores, const std::vector<std::string>& factor_names,
                      const Provenance& prov);
struct ScoreTable {
  std::vector<std::string> subject_ids;
  std::vector<std::string> factor_names;
  TensorD scores;  // n x k
};
ScoreTable read_scores_csv(const std::string& path);
void write_factor_summary_json(const std::string& path, const FactorModel& fm,
                               const Provenance& prov);

// --- statistics / profiles ---
void write_stat_report_csv(const std::string& path, const StatReport& report,
                           const Provenance& prov);
void write_stat_report_json(const std::string& path, const StatReport& report,
                            const Provenance& prov);
void write_profile_csv(const std::string& path, const ProfileMatrix& prof, const Provenance& prov);
void write_profile_svg(const std::string& path, const ProfileMatrix& prof, const Provenance& prov);

}  // namespace fusestrata
