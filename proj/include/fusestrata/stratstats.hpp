// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fusestrata/rng.hpp"
#include "fusestrata/tensor.hpp"

namespace fusestrata {

// Cluster-vs-factor statistics: Kruskal-Wallis, Benjamini-Hochberg FDR, a
// repartition bootstrap null, and rank-quantile cluster profiles.

struct KwResult {
  double h = 0;
  int df = 0;
  double p = 1;
  bool all_tied = false;  // every value equal; H pinned to 0, p to 1
};

// Mid-rank Kruskal-Wallis with tie correction; p from the chi-square upper
// tail on K-1 degrees of freedom.
KwResult kruskal_wallis(const std::vector<double>& values, const std::vector<int>& groups);

struct FdrResult {
  std::vector<double> q;        // step-up adjusted values, capped at 1
  std::vector<uint8_t> reject;  // 1 where the step-up rule rejects at alpha
};

FdrResult bh_fdr(const std::vector<double>& pvals, double alpha = 0.05);

struct BootstrapConfig {
  int m_replicates = 10000;
  uint64_t seed = 0;
  bool with_replacement = false;  // default: permutation repartition
};

// One surrogate regrouping: slot t belongs to replicate group label_of_slot[t]
// and carries subject subject_of_slot[t]. Group sizes always match `sizes`.
// Permutation mode uses every subject exactly once.
struct Replicate {
  std::vector<int> subject_of_slot;
  std::vector<int> label_of_slot;
};

Replicate bootstrap_replicate(int n_subjects, const std::vector<int>& sizes,
                              bool with_replacement, Rng& rng);

struct StatRow {
  std::string factor;
  double h = 0;
  int df = 0;
  double p_asymptotic = 1;
  double q_asymptotic = 1;
  bool sig_asymptotic = false;
  double p_bootstrap = 1;           // strict > count / M
  double p_bootstrap_smoothed = 1;  // (count + 1) / (M + 1)
  double q_bootstrap = 1;
  bool sig_bootstrap = false;
  bool degenerate = false;  // all values tied
};

struct StatReport {
  std::vector<StatRow> rows;  // one per factor column
  double alpha = 0.05;
  int m_replicates = 0;
  bool with_replacement = false;
  uint64_t seed = 0;
  std::vector<std::string> warnings;
};

// Runs Kruskal-Wallis per factor column of `scores` against the cluster
// labels, the repartition bootstrap with per-replicate seed streams, and
// BH-FDR across factors for both p-value families.
StatReport stratification_stats(const TensorD& scores, const std::vector<int>& labels,
                                const BootstrapConfig& cfg, double alpha = 0.05,
                                const std::vector<std::string>* factor_names = nullptr);

struct ProfileMatrix {
  std::vector<std::string> factor_names;  // k rows
  std::vector<int> cluster_sizes;         // K columns
  TensorD quantiles;                      // k x K, each in (0,1]
  TensorD log10_quantiles;                // k x K, each <= 0
};

// Per (factor, cluster): the cluster members' median score, placed on the
// population distribution via the mid rank rule (average of the <= and <
// fractions), then log10.
ProfileMatrix cluster_profiles(const TensorD& scores, const std::vector<int>& labels,
                               const std::vector<std::string>* factor_names = nullptr);

}  // namespace fusestrata
