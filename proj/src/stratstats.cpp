// SPDX-License-Identifier: Apache-2.0
#include "fusestrata/stratstats.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "fusestrata/common.hpp"

namespace fusestrata {

namespace {

struct RankedValues {
  std::vector<double> ranks;  // mid-ranks, 1-based
  double tie_sum = 0;         // sum of t^3 - t over tie groups
};

RankedValues mid_ranks(const std::vector<double>& values) {
  size_t n = values.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return values[a] < values[b]; });
  RankedValues out;
  out.ranks.resize(n);
  size_t a = 0;
  while (a < n) {
    size_t b = a;
    while (b < n && values[order[b]] == values[order[a]]) ++b;
    double rank = (static_cast<double>(a) + static_cast<double>(b) + 1.0) / 2.0;
    for (size_t i = a; i < b; ++i) out.ranks[order[i]] = rank;
    double t = static_cast<double>(b - a);
    if (b - a > 1) out.tie_sum += t * t * t - t;
    a = b;
  }
  return out;
}

// Raw statistic from rank sums; the tie correction divides it afterwards.
double h_raw(const std::vector<double>& group_rank_sums, const std::vector<int>& sizes, int n) {
  double acc = 0;
  for (size_t g = 0; g < sizes.size(); ++g)
    acc += group_rank_sums[g] * group_rank_sums[g] / sizes[g];
  double nn = static_cast<double>(n);
  return 12.0 / (nn * (nn + 1.0)) * acc - 3.0 * (nn + 1.0);
}

double chi2_upper_tail(int df, double h) {
  boost::math::chi_squared_distribution<double> dist(df);
  return boost::math::cdf(boost::math::complement(dist, std::max(h, 0.0)));
}

std::vector<int> compact_labels(const std::vector<int>& groups, std::vector<int>* sizes_out) {
  std::map<int, int> remap;
  for (int g : groups) remap.emplace(g, 0);
  int next = 0;
  for (auto& kv : remap) kv.second = next++;
  std::vector<int> compact(groups.size());
  std::vector<int> sizes(static_cast<size_t>(next), 0);
  for (size_t i = 0; i < groups.size(); ++i) {
    compact[i] = remap[groups[i]];
    ++sizes[static_cast<size_t>(compact[i])];
  }
  if (sizes_out) *sizes_out = sizes;
  return compact;
}

}  // namespace

KwResult kruskal_wallis(const std::vector<double>& values, const std::vector<int>& groups) {
  if (values.size() != groups.size()) fail(Errc::validation, "values/groups length mismatch");
  int n = static_cast<int>(values.size());
  if (n < 2) fail(Errc::validation, "need at least 2 observations");
  for (double v : values)
    if (!std::isfinite(v)) fail(Errc::numeric, "non-finite value in Kruskal-Wallis input");

  std::vector<int> sizes;
  std::vector<int> labels = compact_labels(groups, &sizes);
  int k = static_cast<int>(sizes.size());
  if (k < 2) fail(Errc::validation, "need at least 2 groups");

  RankedValues ranked = mid_ranks(values);
  std::vector<double> rank_sums(static_cast<size_t>(k), 0.0);
  for (int i = 0; i < n; ++i)
    rank_sums[static_cast<size_t>(labels[static_cast<size_t>(i)])] +=
        ranked.ranks[static_cast<size_t>(i)];

  KwResult res;
  res.df = k - 1;
  double nn = static_cast<double>(n);
  double denom = 1.0 - ranked.tie_sum / (nn * nn * nn - nn);
  if (denom <= 0) {  // every value identical
    res.h = 0;
    res.p = 1;
    res.all_tied = true;
    return res;
  }
  res.h = std::max(h_raw(rank_sums, sizes, n) / denom, 0.0);
  res.p = chi2_upper_tail(res.df, res.h);
  return res;
}

FdrResult bh_fdr(const std::vector<double>& pvals, double alpha) {
  size_t m = pvals.size();
  if (m == 0) fail(Errc::validation, "empty p-value list");
  for (double p : pvals)
    if (!(p >= 0.0 && p <= 1.0)) fail(Errc::validation, "p-value outside [0,1]");

  std::vector<size_t> order(m);
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return pvals[a] < pvals[b]; });

  FdrResult res;
  res.q.resize(m);
  res.reject.assign(m, 0);

  // step-up q: running minimum of p_(i) * m / i from the largest rank down;
  // the ratio is formed first so rank m scales by exactly 1 and q >= p holds
  // in floating point
  double running = 1.0;
  for (size_t i = m; i > 0; --i) {
    double scaled = pvals[order[i - 1]] * (static_cast<double>(m) / static_cast<double>(i));
    running = std::min(running, scaled);
    res.q[order[i - 1]] = std::min(running, 1.0);
  }

  size_t cutoff = 0;  // 1-based rank of the last passing p, 0 if none
  for (size_t i = 1; i <= m; ++i)
    if (pvals[order[i - 1]] <= static_cast<double>(i) * alpha / static_cast<double>(m)) cutoff = i;
  for (size_t i = 0; i < cutoff; ++i) res.reject[order[i]] = 1;
  return res;
}

Replicate bootstrap_replicate(int n_subjects, const std::vector<int>& sizes,
                              bool with_replacement, Rng& rng) {
  int total = 0;
  for (int s : sizes) {
    if (s <= 0) fail(Errc::validation, "replicate group size must be positive");
    total += s;
  }
  Replicate rep;
  rep.label_of_slot.reserve(static_cast<size_t>(total));
  for (size_t g = 0; g < sizes.size(); ++g)
    for (int t = 0; t < sizes[g]; ++t) rep.label_of_slot.push_back(static_cast<int>(g));

  if (with_replacement) {
    rep.subject_of_slot.resize(static_cast<size_t>(total));
    for (int t = 0; t < total; ++t)
      rep.subject_of_slot[static_cast<size_t>(t)] =
          static_cast<int>(rng.below(static_cast<uint64_t>(n_subjects)));
  } else {
    if (total != n_subjects)
      fail(Errc::validation, "permutation repartition needs sizes summing to subject count");
    rep.subject_of_slot.resize(static_cast<size_t>(total));
    std::iota(rep.subject_of_slot.begin(), rep.subject_of_slot.end(), 0);
    rng.shuffle(rep.subject_of_slot);
  }
  return rep;
}

StatReport stratification_stats(const TensorD& scores, const std::vector<int>& labels,
                                const BootstrapConfig& cfg, double alpha,
                                const std::vector<std::string>* factor_names) {
  if (scores.dims.size() != 2) fail(Errc::validation, "scores must be n x k");
  int n = scores.dims[0], k = scores.dims[1];
  if (labels.size() != static_cast<size_t>(n))
    fail(Errc::validation, "labels length must match score rows");
  if (k < 1) fail(Errc::validation, "need at least 1 factor");
  if (cfg.m_replicates < 1) fail(Errc::validation, "bootstrap M must be >= 1");
  if (factor_names && factor_names->size() != static_cast<size_t>(k))
    fail(Errc::validation, "factor name count mismatch");

  std::vector<int> sizes;
  std::vector<int> compact = compact_labels(labels, &sizes);

  StatReport report;
  report.alpha = alpha;
  report.m_replicates = cfg.m_replicates;
  report.with_replacement = cfg.with_replacement;
  report.seed = cfg.seed;
  if (cfg.m_replicates < 100)
    report.warnings.push_back("bootstrap replicate count below 100; surrogate p-values unstable");

  std::vector<std::vector<double>> columns(static_cast<size_t>(k));
  std::vector<RankedValues> ranked(static_cast<size_t>(k));
  std::vector<double> tie_denoms(static_cast<size_t>(k));
  report.rows.resize(static_cast<size_t>(k));
  double nn = static_cast<double>(n);
  for (int j = 0; j < k; ++j) {
    auto& col = columns[static_cast<size_t>(j)];
    col.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) col[static_cast<size_t>(i)] = scores[static_cast<int64_t>(i) * k + j];
    KwResult kw = kruskal_wallis(col, compact);
    StatRow& row = report.rows[static_cast<size_t>(j)];
    row.factor = factor_names ? (*factor_names)[static_cast<size_t>(j)]
                              : "factor" + std::to_string(j);
    row.h = kw.h;
    row.df = kw.df;
    row.p_asymptotic = kw.p;
    row.degenerate = kw.all_tied;
    ranked[static_cast<size_t>(j)] = mid_ranks(col);
    tie_denoms[static_cast<size_t>(j)] =
        1.0 - ranked[static_cast<size_t>(j)].tie_sum / (nn * nn * nn - nn);
  }

  // one repartition per replicate, applied to every factor column
  std::vector<int64_t> exceed(static_cast<size_t>(k), 0);
  for (int r = 0; r < cfg.m_replicates; ++r) {
    Rng rng(derive_seed(cfg.seed, "stats.boot", static_cast<uint64_t>(r)));
    Replicate rep = bootstrap_replicate(n, sizes, cfg.with_replacement, rng);
    for (int j = 0; j < k; ++j) {
      StatRow& row = report.rows[static_cast<size_t>(j)];
      if (row.degenerate) continue;
      double h = 0;
      if (cfg.with_replacement) {
        std::vector<double> resampled(rep.subject_of_slot.size());
        for (size_t t = 0; t < rep.subject_of_slot.size(); ++t)
          resampled[t] =
              columns[static_cast<size_t>(j)][static_cast<size_t>(rep.subject_of_slot[t])];
        RankedValues rr = mid_ranks(resampled);
        double denom = 1.0 - rr.tie_sum / (nn * nn * nn - nn);
        if (denom > 0) {
          std::vector<double> sums(sizes.size(), 0.0);
          for (size_t t = 0; t < rr.ranks.size(); ++t)
            sums[static_cast<size_t>(rep.label_of_slot[t])] += rr.ranks[t];
          h = std::max(h_raw(sums, sizes, n) / denom, 0.0);
        }
      } else {
        // same value multiset: reuse the true ranks and tie correction
        std::vector<double> sums(sizes.size(), 0.0);
        for (size_t t = 0; t < rep.subject_of_slot.size(); ++t)
          sums[static_cast<size_t>(rep.label_of_slot[t])] +=
              ranked[static_cast<size_t>(j)].ranks[static_cast<size_t>(rep.subject_of_slot[t])];
        h = std::max(h_raw(sums, sizes, n) / tie_denoms[static_cast<size_t>(j)], 0.0);
      }
      if (h > report.rows[static_cast<size_t>(j)].h) ++exceed[static_cast<size_t>(j)];
    }
  }

  std::vector<double> p_asym(static_cast<size_t>(k)), p_boot(static_cast<size_t>(k));
  for (int j = 0; j < k; ++j) {
    StatRow& row = report.rows[static_cast<size_t>(j)];
    double count = static_cast<double>(exceed[static_cast<size_t>(j)]);
    row.p_bootstrap = count / cfg.m_replicates;
    row.p_bootstrap_smoothed = (count + 1.0) / (cfg.m_replicates + 1.0);
    p_asym[static_cast<size_t>(j)] = row.p_asymptotic;
    p_boot[static_cast<size_t>(j)] = row.p_bootstrap;
  }

  FdrResult fdr_asym = bh_fdr(p_asym, alpha);
  FdrResult fdr_boot = bh_fdr(p_boot, alpha);
  for (int j = 0; j < k; ++j) {
    StatRow& row = report.rows[static_cast<size_t>(j)];
    row.q_asymptotic = fdr_asym.q[static_cast<size_t>(j)];
    row.sig_asymptotic = fdr_asym.reject[static_cast<size_t>(j)] != 0;
    row.q_bootstrap = fdr_boot.q[static_cast<size_t>(j)];
    row.sig_bootstrap = fdr_boot.reject[static_cast<size_t>(j)] != 0;
  }
  return report;
}

ProfileMatrix cluster_profiles(const TensorD& scores, const std::vector<int>& labels,
                               const std::vector<std::string>* factor_names) {
  if (scores.dims.size() != 2) fail(Errc::validation, "scores must be n x k");
  int n = scores.dims[0], k = scores.dims[1];
  if (labels.size() != static_cast<size_t>(n))
    fail(Errc::validation, "labels length must match score rows");
  if (n < 1) fail(Errc::validation, "need at least 1 subject");
  int n_clusters = 0;
  for (int l : labels) {
    if (l < 0) fail(Errc::validation, "negative cluster label");
    n_clusters = std::max(n_clusters, l + 1);
  }
  std::vector<int> sizes(static_cast<size_t>(n_clusters), 0);
  for (int l : labels) ++sizes[static_cast<size_t>(l)];
  for (int c = 0; c < n_clusters; ++c)
    if (sizes[static_cast<size_t>(c)] == 0)
      fail(Errc::validation, "empty cluster " + std::to_string(c));
  if (factor_names && factor_names->size() != static_cast<size_t>(k))
    fail(Errc::validation, "factor name count mismatch");

  ProfileMatrix prof;
  prof.cluster_sizes = sizes;
  for (int j = 0; j < k; ++j)
    prof.factor_names.push_back(factor_names ? (*factor_names)[static_cast<size_t>(j)]
                                             : "factor" + std::to_string(j));
  prof.quantiles = TensorD({k, n_clusters});
  prof.log10_quantiles = TensorD({k, n_clusters});

  for (int j = 0; j < k; ++j) {
    std::vector<double> pop(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) pop[static_cast<size_t>(i)] = scores[static_cast<int64_t>(i) * k + j];
    std::vector<double> sorted = pop;
    std::sort(sorted.begin(), sorted.end());
    for (int c = 0; c < n_clusters; ++c) {
      std::vector<double> members;
      for (int i = 0; i < n; ++i)
        if (labels[static_cast<size_t>(i)] == c) members.push_back(pop[static_cast<size_t>(i)]);
      double med = median(std::move(members));
      // mid rank: average of the strict-below and at-or-below fractions
      auto lo = std::lower_bound(sorted.begin(), sorted.end(), med) - sorted.begin();
      auto hi = std::upper_bound(sorted.begin(), sorted.end(), med) - sorted.begin();
      double q = (static_cast<double>(lo) + static_cast<double>(hi)) / (2.0 * n);
      prof.quantiles[static_cast<int64_t>(j) * n_clusters + c] = q;
      prof.log10_quantiles[static_cast<int64_t>(j) * n_clusters + c] = std::log10(q);
    }
  }
  return prof;
}

}  // namespace fusestrata
