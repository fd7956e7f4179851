// SPDX-License-Identifier: Apache-2.0
#pragma once

// Reconstruction quality metrics: voxelwise MSE, median normalized
// difference, and contrast-to-noise comparison over randomly paired ROIs.

#include <cstdint>
#include <vector>

#include "fusestrata/volume.hpp"

namespace fusestrata {

struct CnrConfig {
  int roi_x = 4, roi_y = 4, roi_z = 3;
  int n_pairs = 1000;
  // a voxel at or below this is background; an ROI is excluded when more than
  // half of its voxels are background
  double background_thresh = 0.0;
  uint64_t seed = 0;
};

// mean over all voxels of (rec - real)^2, accumulated in double
double mse(const Volume& real, const Volume& rec);

// median over voxels of (rec - real)/(rec + real), with 0/0 := 0
double normdiff_median(const Volume& real, const Volume& rec);

// scalar normalized difference, same convention
double normdiff_scalar(double real_value, double rec_value);

// Tile the volume into roi_x x roi_y x roi_z blocks (trailing partial blocks
// discarded), drop background-dominated blocks, then sample up to n_pairs
// distinct unordered ROI pairs. Per pair: (mean1 - mean2) / population std of
// the pooled voxels of both ROIs, 0 when the pooled std is 0. Returns the
// median over pairs.
double cnr_median(const Volume& vol, const CnrConfig& cfg);

// CNR medians of both volumes over the ROI set and pair sample derived from
// `real`, so the two medians measure the same locations.
struct CnrMedians {
  double real_median = 0;
  double rec_median = 0;
};
CnrMedians cnr_medians(const Volume& real, const Volume& rec, const CnrConfig& cfg);

// the medians above collapsed with the scalar normalized difference
double cnr_normdiff(const Volume& real, const Volume& rec, const CnrConfig& cfg);

}  // namespace fusestrata
