// SPDX-License-Identifier: Apache-2.0
#include "fusestrata/reconmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "fusestrata/rng.hpp"

namespace fusestrata {

namespace {

struct RoiGrid {
  int gx, gy, gz;                 // blocks per axis
  std::vector<int> eligible;     // flat block ids that pass the background rule
};

// Eligibility: a block stays when at most half of its voxels are background.
RoiGrid build_grid(const Volume& vol, const CnrConfig& cfg) {
  RoiGrid grid;
  grid.gx = vol.nx / cfg.roi_x;
  grid.gy = vol.ny / cfg.roi_y;
  grid.gz = vol.nz / cfg.roi_z;
  for (int bz = 0; bz < grid.gz; ++bz)
    for (int by = 0; by < grid.gy; ++by)
      for (int bx = 0; bx < grid.gx; ++bx) {
        int total = cfg.roi_x * cfg.roi_y * cfg.roi_z;
        int background = 0;
        for (int z = bz * cfg.roi_z; z < (bz + 1) * cfg.roi_z; ++z)
          for (int y = by * cfg.roi_y; y < (by + 1) * cfg.roi_y; ++y)
            for (int x = bx * cfg.roi_x; x < (bx + 1) * cfg.roi_x; ++x)
              if (vol.at(x, y, z) <= cfg.background_thresh) ++background;
        if (2 * background <= total) grid.eligible.push_back(bx + grid.gx * (by + grid.gy * bz));
      }
  return grid;
}

void roi_stats(const Volume& vol, const CnrConfig& cfg, const RoiGrid& grid, int block,
               double& mean, double& sum, double& sumsq) {
  int bx = block % grid.gx;
  int by = (block / grid.gx) % grid.gy;
  int bz = block / (grid.gx * grid.gy);
  sum = 0;
  sumsq = 0;
  for (int z = bz * cfg.roi_z; z < (bz + 1) * cfg.roi_z; ++z)
    for (int y = by * cfg.roi_y; y < (by + 1) * cfg.roi_y; ++y)
      for (int x = bx * cfg.roi_x; x < (bx + 1) * cfg.roi_x; ++x) {
        double v = vol.at(x, y, z);
        sum += v;
        sumsq += v * v;
      }
  mean = sum / (cfg.roi_x * cfg.roi_y * cfg.roi_z);
}

double pair_cnr(const Volume& vol, const CnrConfig& cfg, const RoiGrid& grid, int a, int b) {
  double mean_a, sum_a, sumsq_a, mean_b, sum_b, sumsq_b;
  roi_stats(vol, cfg, grid, a, mean_a, sum_a, sumsq_a);
  roi_stats(vol, cfg, grid, b, mean_b, sum_b, sumsq_b);
  int n = 2 * cfg.roi_x * cfg.roi_y * cfg.roi_z;
  double mean = (sum_a + sum_b) / n;
  double var = (sumsq_a + sumsq_b) / n - mean * mean;
  if (var < 0) var = 0;  // rounding guard
  double sd = std::sqrt(var);
  if (sd == 0) return 0.0;
  return (mean_a - mean_b) / sd;
}

// Distinct unordered pairs of eligible blocks, uniform, seeded. When fewer
// than n_pairs pairs exist, every pair is used once.
std::vector<std::pair<int, int>> sample_pairs(const RoiGrid& grid, const CnrConfig& cfg) {
  int m = static_cast<int>(grid.eligible.size());
  int64_t all = static_cast<int64_t>(m) * (m - 1) / 2;
  std::vector<std::pair<int, int>> pairs;
  if (all <= cfg.n_pairs) {
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) pairs.push_back({grid.eligible[static_cast<size_t>(i)], grid.eligible[static_cast<size_t>(j)]});
    return pairs;
  }
  Rng rng(derive_seed(cfg.seed, "cnr.pairs", 0));
  std::unordered_set<int64_t> seen;
  while (static_cast<int>(pairs.size()) < cfg.n_pairs) {
    int i = static_cast<int>(rng.below(static_cast<uint64_t>(m)));
    int j = static_cast<int>(rng.below(static_cast<uint64_t>(m)));
    if (i == j) continue;
    int lo = std::min(i, j), hi = std::max(i, j);
    int64_t key = static_cast<int64_t>(lo) * m + hi;
    if (!seen.insert(key).second) continue;
    pairs.push_back({grid.eligible[static_cast<size_t>(lo)], grid.eligible[static_cast<size_t>(hi)]});
  }
  return pairs;
}

double median_of(std::vector<double> vals) {
  std::sort(vals.begin(), vals.end());
  return median_sorted(vals);
}

void check_dims(const Volume& real, const Volume& rec) {
  if (!real.same_dims(rec))
    fail(Errc::validation,
         strprintf("volume dims differ: %dx%dx%d vs %dx%dx%d", real.nx, real.ny, real.nz, rec.nx,
                   rec.ny, rec.nz));
}

}  // namespace

double mse(const Volume& real, const Volume& rec) {
  check_dims(real, rec);
  double acc = 0;
  for (int64_t i = 0; i < real.size(); ++i) {
    double d = static_cast<double>(rec.v[static_cast<size_t>(i)]) - real.v[static_cast<size_t>(i)];
    acc += d * d;
  }
  return acc / static_cast<double>(real.size());
}

double normdiff_scalar(double real_value, double rec_value) {
  double denom = rec_value + real_value;
  if (denom == 0) return 0.0;
  return (rec_value - real_value) / denom;
}

double normdiff_median(const Volume& real, const Volume& rec) {
  check_dims(real, rec);
  std::vector<double> vals(static_cast<size_t>(real.size()));
  for (int64_t i = 0; i < real.size(); ++i)
    vals[static_cast<size_t>(i)] =
        normdiff_scalar(real.v[static_cast<size_t>(i)], rec.v[static_cast<size_t>(i)]);
  return median_of(std::move(vals));
}

double cnr_median(const Volume& vol, const CnrConfig& cfg) {
  RoiGrid grid = build_grid(vol, cfg);
  if (grid.eligible.size() < 2)
    fail(Errc::validation, strprintf("need at least 2 non-background ROIs, have %zu",
                                     grid.eligible.size()));
  auto pairs = sample_pairs(grid, cfg);
  std::vector<double> cnrs;
  cnrs.reserve(pairs.size());
  for (auto [a, b] : pairs) cnrs.push_back(pair_cnr(vol, cfg, grid, a, b));
  return median_of(std::move(cnrs));
}

CnrMedians cnr_medians(const Volume& real, const Volume& rec, const CnrConfig& cfg) {
  check_dims(real, rec);
  RoiGrid grid = build_grid(real, cfg);
  if (grid.eligible.size() < 2)
    fail(Errc::validation, strprintf("need at least 2 non-background ROIs, have %zu",
                                     grid.eligible.size()));
  auto pairs = sample_pairs(grid, cfg);
  std::vector<double> real_cnrs, rec_cnrs;
  real_cnrs.reserve(pairs.size());
  rec_cnrs.reserve(pairs.size());
  for (auto [a, b] : pairs) {
    real_cnrs.push_back(pair_cnr(real, cfg, grid, a, b));
    rec_cnrs.push_back(pair_cnr(rec, cfg, grid, a, b));
  }
  return {median_of(std::move(real_cnrs)), median_of(std::move(rec_cnrs))};
}

double cnr_normdiff(const Volume& real, const Volume& rec, const CnrConfig& cfg) {
  CnrMedians m = cnr_medians(real, rec, cfg);
  return normdiff_scalar(m.real_median, m.rec_median);
}

}  // namespace fusestrata
