// SPDX-License-Identifier: Apache-2.0
#include "fusestrata/apcluster.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>

#include "fusestrata/common.hpp"

namespace fusestrata {

TensorD similarity_matrix(const TensorD& points) {
  if (points.dims.size() != 2) fail(Errc::validation, "points must be an n x d matrix");
  int n = points.dims[0], d = points.dims[1];
  TensorD s({n, n});
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      if (i == k) continue;
      double acc = 0;
      for (int j = 0; j < d; ++j) {
        double diff = points[static_cast<int64_t>(i) * d + j] - points[static_cast<int64_t>(k) * d + j];
        acc += diff * diff;
      }
      s[static_cast<int64_t>(i) * n + k] = -acc;
    }
  return s;
}

ClusterResult affinity_propagation(const TensorD& similarities, double preference, double damping,
                                   int max_iter, int convergence_window,
                                   const ApObserver* observer) {
  if (similarities.dims.size() != 2 || similarities.dims[0] != similarities.dims[1])
    fail(Errc::validation, "similarity matrix must be square");
  if (!(damping >= 0.5 && damping < 1.0)) fail(Errc::validation, "damping must be in [0.5, 1)");
  if (max_iter < 1) fail(Errc::validation, "max_iter must be >= 1");
  int n = similarities.dims[0];
  if (n < 1) fail(Errc::validation, "empty similarity matrix");

  std::vector<double> s(similarities.v);
  for (int i = 0; i < n; ++i) s[static_cast<size_t>(i) * n + i] = preference;

  std::vector<double> r(static_cast<size_t>(n) * n, 0.0), a(static_cast<size_t>(n) * n, 0.0);
  std::vector<double> r_new(r), a_new(a), col_total(static_cast<size_t>(n), 0.0);

  std::vector<int> exemplars, prev_exemplars;
  int stable = 0;
  int iter = 0;
  bool converged = false;

  for (iter = 1; iter <= max_iter; ++iter) {
    // responsibilities against the current availabilities
    for (int i = 0; i < n; ++i) {
      const double* si = s.data() + static_cast<size_t>(i) * n;
      const double* ai = a.data() + static_cast<size_t>(i) * n;
      double best = -std::numeric_limits<double>::infinity();
      double second = best;
      int best_k = -1;
      for (int k = 0; k < n; ++k) {
        double v = ai[k] + si[k];
        if (v > best) {
          second = best;
          best = v;
          best_k = k;
        } else if (v > second) {
          second = v;
        }
      }
      double* ri = r_new.data() + static_cast<size_t>(i) * n;
      for (int k = 0; k < n; ++k) ri[k] = si[k] - (k == best_k ? second : best);
    }
    for (size_t x = 0; x < r.size(); ++x) r[x] = damping * r[x] + (1.0 - damping) * r_new[x];

    // availabilities from column totals of the clipped responsibilities
    for (int k = 0; k < n; ++k) col_total[static_cast<size_t>(k)] = 0.0;
    for (int i = 0; i < n; ++i) {
      const double* ri = r.data() + static_cast<size_t>(i) * n;
      for (int k = 0; k < n; ++k) col_total[static_cast<size_t>(k)] += std::max(0.0, ri[k]);
    }
    for (int i = 0; i < n; ++i) {
      const double* ri = r.data() + static_cast<size_t>(i) * n;
      double* ai = a_new.data() + static_cast<size_t>(i) * n;
      for (int k = 0; k < n; ++k) {
        double rkk = r[static_cast<size_t>(k) * n + k];
        if (i == k) {
          ai[k] = col_total[static_cast<size_t>(k)] - std::max(0.0, rkk);
        } else {
          double sum = col_total[static_cast<size_t>(k)] - std::max(0.0, ri[k]) - std::max(0.0, rkk);
          ai[k] = std::min(0.0, rkk + sum);
        }
      }
    }
    for (size_t x = 0; x < a.size(); ++x) a[x] = damping * a[x] + (1.0 - damping) * a_new[x];

    if (observer) (*observer)(iter, r, a);

    exemplars.clear();
    for (int k = 0; k < n; ++k)
      if (r[static_cast<size_t>(k) * n + k] + a[static_cast<size_t>(k) * n + k] > 0)
        exemplars.push_back(k);
    if (exemplars == prev_exemplars && !exemplars.empty()) {
      if (++stable >= convergence_window) {
        converged = true;
        break;
      }
    } else {
      stable = 0;
      prev_exemplars = exemplars;
    }
  }
  if (iter > max_iter) iter = max_iter;

  ClusterResult result;
  result.damping = damping;
  result.preference = preference;
  result.iterations = iter;
  result.converged = converged;

  if (exemplars.empty()) {
    // no point self-elected: fall back to the strongest self-evidence
    int best_k = 0;
    double best_v = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k) {
      double v = r[static_cast<size_t>(k) * n + k] + a[static_cast<size_t>(k) * n + k];
      if (v > best_v) {
        best_v = v;
        best_k = k;
      }
    }
    exemplars = {best_k};
  }

  result.exemplar_of.assign(static_cast<size_t>(n), -1);
  for (int i = 0; i < n; ++i) {
    double best_v = -std::numeric_limits<double>::infinity();
    int best_e = exemplars[0];
    for (int e : exemplars) {
      double v = s[static_cast<size_t>(i) * n + e];
      if (v > best_v) {
        best_v = v;
        best_e = e;
      }
    }
    result.exemplar_of[static_cast<size_t>(i)] = best_e;
  }
  for (int e : exemplars) result.exemplar_of[static_cast<size_t>(e)] = e;

  std::map<int, int> renumber;
  for (int i = 0; i < n; ++i) renumber.emplace(result.exemplar_of[static_cast<size_t>(i)], 0);
  int next = 0;
  for (auto& [exemplar, label] : renumber) label = next++;
  result.labels.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    result.labels[static_cast<size_t>(i)] = renumber[result.exemplar_of[static_cast<size_t>(i)]];
  result.n_clusters = next;
  return result;
}

double silhouette(const TensorD& points, const std::vector<int>& labels) {
  if (points.dims.size() != 2) fail(Errc::validation, "points must be an n x d matrix");
  int n = points.dims[0], d = points.dims[1];
  if (static_cast<int>(labels.size()) != n) fail(Errc::validation, "label count mismatch");
  int k = 0;
  for (int l : labels) {
    if (l < 0) fail(Errc::validation, "labels must be non-negative");
    k = std::max(k, l + 1);
  }
  std::vector<int> sizes(static_cast<size_t>(k), 0);
  for (int l : labels) ++sizes[static_cast<size_t>(l)];
  int nonempty = 0;
  for (int c : sizes)
    if (c > 0) ++nonempty;
  if (nonempty < 2) fail(Errc::validation, "silhouette undefined for fewer than 2 clusters");

  auto dist = [&](int i, int j) {
    double acc = 0;
    for (int t = 0; t < d; ++t) {
      double diff = points[static_cast<int64_t>(i) * d + t] - points[static_cast<int64_t>(j) * d + t];
      acc += diff * diff;
    }
    return std::sqrt(acc);
  };

  double total = 0;
  std::vector<double> sums(static_cast<size_t>(k));
  for (int i = 0; i < n; ++i) {
    int own = labels[static_cast<size_t>(i)];
    if (sizes[static_cast<size_t>(own)] == 1) continue;  // singleton scores 0
    std::fill(sums.begin(), sums.end(), 0.0);
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      sums[static_cast<size_t>(labels[static_cast<size_t>(j)])] += dist(i, j);
    }
    double a = sums[static_cast<size_t>(own)] / (sizes[static_cast<size_t>(own)] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      if (c == own || sizes[static_cast<size_t>(c)] == 0) continue;
      b = std::min(b, sums[static_cast<size_t>(c)] / sizes[static_cast<size_t>(c)]);
    }
    double denom = std::max(a, b);
    total += denom == 0 ? 0.0 : (b - a) / denom;
  }
  return total / n;
}

GridResult grid_search(const TensorD& points, const GridConfig& cfg) {
  if (points.dims.size() != 2 || points.dims[0] < 3)
    fail(Errc::validation, "grid search needs at least 3 points");
  if (cfg.n_damping < 1 || cfg.n_preference < 1) fail(Errc::validation, "empty parameter grid");
  TensorD s = similarity_matrix(points);
  int n = points.dims[0];

  std::vector<double> offdiag;
  offdiag.reserve(static_cast<size_t>(n) * (n - 1));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      if (i != k) offdiag.push_back(s[static_cast<int64_t>(i) * n + k]);
  std::sort(offdiag.begin(), offdiag.end());
  double lo = percentile_sorted(offdiag, cfg.pref_lo_pct);
  double hi = percentile_sorted(offdiag, cfg.pref_hi_pct);

  GridResult result;
  bool have_best = false;
  for (int di = 0; di < cfg.n_damping; ++di) {
    double damping = 0.5 + 0.5 * di / cfg.n_damping;  // [0.5, 1), right-open
    for (int pi = 0; pi < cfg.n_preference; ++pi) {
      double preference =
          cfg.n_preference == 1 ? lo : lo + (hi - lo) * pi / (cfg.n_preference - 1);
      ClusterResult cell = affinity_propagation(s, preference, damping, cfg.max_iter,
                                                cfg.convergence_window, nullptr);
      GridCell entry;
      entry.damping = damping;
      entry.preference = preference;
      entry.n_clusters = cell.n_clusters;
      entry.converged = cell.converged;
      entry.eligible = cell.converged && cell.n_clusters >= 2;
      if (entry.eligible) {
        entry.silhouette_score = silhouette(points, cell.labels);
        cell.silhouette_score = entry.silhouette_score;
        // strict > with ascending grid order = ties to smaller damping, then
        // smaller preference
        if (!have_best || entry.silhouette_score > result.best.silhouette_score) {
          result.best = std::move(cell);
          have_best = true;
        }
      }
      result.table.push_back(entry);
    }
  }
  if (!have_best)
    fail(Errc::numeric,
         strprintf("no grid cell produced a converged clustering with K >= 2 (%zu cells tried)",
                   result.table.size()));
  return result;
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) fail(Errc::validation, "label vectors differ in length");
  int n = static_cast<int>(a.size());
  if (n == 0) fail(Errc::validation, "empty labelings");
  std::map<std::pair<int, int>, int64_t> cont;
  std::map<int, int64_t> row, col;
  for (int i = 0; i < n; ++i) {
    ++cont[{a[static_cast<size_t>(i)], b[static_cast<size_t>(i)]}];
    ++row[a[static_cast<size_t>(i)]];
    ++col[b[static_cast<size_t>(i)]];
  }
  auto choose2 = [](int64_t m) { return m * (m - 1) / 2.0; };
  double sum_ij = 0, sum_a = 0, sum_b = 0;
  for (auto& [key, c] : cont) sum_ij += choose2(c);
  for (auto& [key, c] : row) sum_a += choose2(c);
  for (auto& [key, c] : col) sum_b += choose2(c);
  double total = choose2(n);
  double expected = sum_a * sum_b / total;
  double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;  // both partitions trivial
  return (sum_ij - expected) / (max_index - expected);
}

}  // namespace fusestrata
