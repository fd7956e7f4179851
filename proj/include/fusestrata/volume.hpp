// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "fusestrata/common.hpp"

namespace fusestrata {

// Dense 3-D scalar image. Memory order is x-fastest (x + nx*(y + ny*z)),
// identical to the on-disk payload order.
struct Volume {
  int nx = 0, ny = 0, nz = 0;
  std::vector<float> v;

  Volume() = default;
  Volume(int nx_, int ny_, int nz_)
      : nx(nx_), ny(ny_), nz(nz_), v(static_cast<size_t>(nx_) * ny_ * nz_, 0.0f) {}

  int64_t size() const { return static_cast<int64_t>(v.size()); }
  float& at(int x, int y, int z) {
    return v[static_cast<size_t>(x) + static_cast<size_t>(nx) * (static_cast<size_t>(y) + static_cast<size_t>(ny) * z)];
  }
  float at(int x, int y, int z) const {
    return v[static_cast<size_t>(x) + static_cast<size_t>(nx) * (static_cast<size_t>(y) + static_cast<size_t>(ny) * z)];
  }
  bool same_dims(const Volume& o) const { return nx == o.nx && ny == o.ny && nz == o.nz; }
};

struct SubjectRecord {
  std::string subject_id;
  std::vector<Volume> volumes;  // parallel to Dataset::modalities
};

// In-memory cohort: every subject carries one volume per modality, all with
// identical dims.
struct Dataset {
  std::vector<std::string> modalities;
  std::vector<SubjectRecord> subjects;

  int n_subjects() const { return static_cast<int>(subjects.size()); }
  int n_modalities() const { return static_cast<int>(modalities.size()); }
  const Volume& volume(int subject, int modality) const {
    return subjects[static_cast<size_t>(subject)].volumes[static_cast<size_t>(modality)];
  }
  void validate() const;
};

// Volume container file: magic "MMFV", u32 version=1, u32 nx, ny, nz, then
// nx*ny*nz little-endian f32 in x-fastest order.
Volume read_volume(const std::string& path);
void write_volume(const std::string& path, const Volume& vol);

struct NormBounds {
  double lo = 0.0;
  double hi = 1.0;
};

// Percentile bounds over the pooled voxels of every passed volume (one
// modality across the whole population). Linear-interpolated percentiles.
NormBounds population_bounds(const std::vector<const Volume*>& vols, double p_lo = 0.1,
                             double p_hi = 99.9);

// v' = clamp((v - lo)/(hi - lo), 0, 1).
void apply_minmax(Volume& vol, const NormBounds& b);

// Population-wide min-max normalization, applied per modality in place.
// Returns the bounds actually used, one per modality.
std::vector<NormBounds> normalize_dataset(Dataset& ds, double p_lo = 0.1, double p_hi = 99.9);

// Flat value-level variant used by tests and by phenotype-free callers.
std::vector<double> minmax_normalize(const std::vector<double>& population_values,
                                     double p_lo = 0.1, double p_hi = 99.9);

// Dataset directory layout: a `dataset.csv` manifest (subject_id, modality,
// relative path) next to the referenced MMFV files.
void save_dataset(const std::string& dir, const Dataset& ds);
Dataset load_dataset(const std::string& manifest_or_dir);

}  // namespace fusestrata
