// SPDX-License-Identifier: Apache-2.0
#pragma once

// Affinity propagation over subject embeddings, silhouette scoring, and the
// damping x preference grid search that picks the reported clustering.
//
// The message updates follow the classic responsibility/availability scheme
// with damping. The arithmetic is part of the contract so independent
// implementations can agree bit for bit:
//   r_new(i,k) = s(i,k) - max_{k' != k}(a(i,k') + s(i,k'))
//   column total t(k) = sum over all i of max(0, r(i,k)), accumulated in
//   ascending row order
//   a_new(i,k) = min(0, r(k,k) + (t(k) - max(0,r(i,k)) - max(0,r(k,k))))
//   a_new(k,k) = t(k) - max(0, r(k,k))
//   damped msg = damping*old + (1-damping)*new
// All math is double; this translation unit is compiled without FP
// contraction.

#include <cstdint>
#include <functional>
#include <vector>

#include "fusestrata/tensor.hpp"

namespace fusestrata {

struct ClusterResult {
  std::vector<int> exemplar_of;  // exemplar point index per point
  std::vector<int> labels;       // exemplars renumbered 0..K-1 by point index
  int n_clusters = 0;
  double damping = 0, preference = 0;
  int iterations = 0;
  bool converged = false;
  double silhouette_score = 0;  // filled by grid_search; otherwise unset
};

// s(i,k) = -||x_i - x_k||^2, diagonal left at 0 (the preference is applied
// inside affinity_propagation)
TensorD similarity_matrix(const TensorD& points);

// per-iteration hook for verification harnesses: (iteration, R, A) after the
// damped update, row-major n x n
using ApObserver = std::function<void(int, const std::vector<double>&, const std::vector<double>&)>;

ClusterResult affinity_propagation(const TensorD& similarities, double preference, double damping,
                                   int max_iter = 1000, int convergence_window = 50,
                                   const ApObserver* observer = nullptr);

// mean over points of (b-a)/max(a,b) with Euclidean distances; singleton
// clusters contribute 0; requires at least two clusters
double silhouette(const TensorD& points, const std::vector<int>& labels);

struct GridConfig {
  int n_damping = 10;
  int n_preference = 1000;
  int max_iter = 1000;
  int convergence_window = 50;
  // preference grid spans these percentiles of the off-diagonal similarities
  double pref_lo_pct = 1.0;
  double pref_hi_pct = 99.0;
};

struct GridCell {
  double damping = 0, preference = 0;
  int n_clusters = 0;
  bool converged = false;
  bool eligible = false;  // converged with K >= 2
  double silhouette_score = 0;  // valid when eligible
};

struct GridResult {
  ClusterResult best;
  std::vector<GridCell> table;  // damping-major, preference-minor
};

// Damping grid: n_damping equal steps on [0.5, 1), right-open. Preference
// grid: n_preference equally spaced values between the percentile bounds.
// Cells that fail to converge or give K < 2 are recorded but not eligible;
// the best eligible cell wins on silhouette, ties broken by smaller damping
// then smaller preference.
GridResult grid_search(const TensorD& points, const GridConfig& cfg = {});

// chance-adjusted agreement between two labelings, 1 = identical partitions
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace fusestrata
