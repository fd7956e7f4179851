// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "fusestrata/pheno.hpp"
#include "fusestrata/volume.hpp"

namespace fusestrata {

struct SynthConfig {
  int n_subjects = 60;
  int nx = 32, ny = 32, nz = 24;
  int n_groups = 3;
  double effect_size = 2.0;
  uint64_t seed = 7;
  int n_phenotypes = 12;       // first n_loaded load on group identity
  int n_loaded = 4;
};

struct SynthResult {
  Dataset dataset;
  std::vector<int> labels;     // planted group per subject
  PhenoTable phenotypes;
};

// Two-modality synthetic cohort: an ellipsoidal "tissue" region (background
// exactly 0 outside) holding a smooth per-subject random field, plus
// group-specific Gaussian perturbations scaled by effect_size, plus a
// phenotype table in which the first n_loaded variables track group identity.
// effect_size=0 makes every group identically distributed.
SynthResult synth_dataset(const SynthConfig& cfg);

}  // namespace fusestrata
