// SPDX-License-Identifier: Apache-2.0
#include "fusestrata/synth.hpp"

#include <algorithm>
#include <cmath>

#include "fusestrata/rng.hpp"

namespace fusestrata {

namespace {

struct Bump {
  double cu, cv, cw;   // center, normalized [-1,1] coords
  double sigma;
  double sign;
};

// Per-axis normalized coordinate in [-1, 1].
inline double norm_coord(int i, int n) {
  return n > 1 ? (2.0 * i - (n - 1)) / (n - 1) : 0.0;
}

// Smooth field: a coarse grid of normal draws, trilinearly upsampled.
class CoarseField {
public:
  CoarseField(int gx, int gy, int gz, Rng& rng) : gx_(gx), gy_(gy), gz_(gz) {
    nodes_.resize(static_cast<size_t>(gx) * gy * gz);
    for (auto& v : nodes_) v = rng.normal();
  }

  double sample(double fx, double fy, double fz) const {
    int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy), z0 = static_cast<int>(fz);
    x0 = std::min(x0, gx_ - 2);
    y0 = std::min(y0, gy_ - 2);
    z0 = std::min(z0, gz_ - 2);
    double tx = fx - x0, ty = fy - y0, tz = fz - z0;
    double acc = 0;
    for (int dz = 0; dz < 2; ++dz)
      for (int dy = 0; dy < 2; ++dy)
        for (int dx = 0; dx < 2; ++dx) {
          double w = (dx ? tx : 1 - tx) * (dy ? ty : 1 - ty) * (dz ? tz : 1 - tz);
          acc += w * node(x0 + dx, y0 + dy, z0 + dz);
        }
    return acc;
  }

private:
  double node(int x, int y, int z) const {
    return nodes_[static_cast<size_t>(x) + static_cast<size_t>(gx_) * (y + static_cast<size_t>(gy_) * z)];
  }
  int gx_, gy_, gz_;
  std::vector<double> nodes_;
};

}  // namespace

SynthResult synth_dataset(const SynthConfig& cfg) {
  if (cfg.n_groups > cfg.n_subjects) fail(Errc::validation, "more groups than subjects");
  if (cfg.n_groups < 1 || cfg.n_subjects < 1) fail(Errc::validation, "empty synthetic design");
  if (cfg.n_loaded > cfg.n_phenotypes) fail(Errc::validation, "n_loaded exceeds n_phenotypes");

  const int n_modalities = 2;
  const double kOffset = 0.55;
  const double kFieldAmp = 0.12;
  const double kNoiseSd = 0.02;
  const double kBumpAmp = 0.10;
  const int kBumpsPer = 3;

  SynthResult out;
  out.dataset.modalities = {"m1", "m2"};

  // Group assignment: balanced round-robin, then a seeded shuffle.
  out.labels.resize(static_cast<size_t>(cfg.n_subjects));
  for (int i = 0; i < cfg.n_subjects; ++i) out.labels[static_cast<size_t>(i)] = i % cfg.n_groups;
  {
    Rng rng(derive_seed(cfg.seed, "synth.labels", 0));
    rng.shuffle(out.labels);
  }

  // Group/modality perturbation geometry, independent of subject noise.
  std::vector<std::vector<Bump>> bumps(static_cast<size_t>(cfg.n_groups) * n_modalities);
  for (int g = 0; g < cfg.n_groups; ++g) {
    for (int m = 0; m < n_modalities; ++m) {
      Rng rng(derive_seed(cfg.seed, "synth.bumps", static_cast<uint64_t>(g) * n_modalities + m));
      auto& set = bumps[static_cast<size_t>(g) * n_modalities + m];
      for (int b = 0; b < kBumpsPer; ++b) {
        Bump bump;
        bump.cu = rng.uniform(-0.5, 0.5);
        bump.cv = rng.uniform(-0.5, 0.5);
        bump.cw = rng.uniform(-0.5, 0.5);
        bump.sigma = rng.uniform(0.12, 0.25);
        bump.sign = (rng.next() & 1) ? 1.0 : -1.0;
        set.push_back(bump);
      }
    }
  }

  out.dataset.subjects.resize(static_cast<size_t>(cfg.n_subjects));
  for (int i = 0; i < cfg.n_subjects; ++i) {
    SubjectRecord& rec = out.dataset.subjects[static_cast<size_t>(i)];
    rec.subject_id = strprintf("s%04d", i);
    Rng rng(derive_seed(cfg.seed, "synth.subject", static_cast<uint64_t>(i)));
    int group = out.labels[static_cast<size_t>(i)];
    for (int m = 0; m < n_modalities; ++m) {
      CoarseField field(5, 5, 4, rng);
      Volume vol(cfg.nx, cfg.ny, cfg.nz);
      const auto& bump_set = bumps[static_cast<size_t>(group) * n_modalities + m];
      for (int z = 0; z < cfg.nz; ++z) {
        double w = norm_coord(z, cfg.nz);
        for (int y = 0; y < cfg.ny; ++y) {
          double v = norm_coord(y, cfg.ny);
          for (int x = 0; x < cfg.nx; ++x) {
            double u = norm_coord(x, cfg.nx);
            double noise = rng.normal() * kNoiseSd;
            double r2 = (u * u + v * v + w * w) / (0.9 * 0.9);
            if (r2 > 1.0) continue;  // background stays exactly 0
            double fx = (u + 1) * 0.5 * 4.0;
            double fy = (v + 1) * 0.5 * 4.0;
            double fz = (w + 1) * 0.5 * 3.0;
            double val = kOffset + kFieldAmp * field.sample(fx, fy, fz) + noise;
            for (const Bump& b : bump_set) {
              double du = u - b.cu, dv = v - b.cv, dw = w - b.cw;
              double d2 = du * du + dv * dv + dw * dw;
              val += cfg.effect_size * kBumpAmp * b.sign *
                     std::exp(-0.5 * d2 / (b.sigma * b.sigma));
            }
            vol.at(x, y, z) = static_cast<float>(std::max(val, 0.01));
          }
        }
      }
      rec.volumes.push_back(std::move(vol));
    }
  }

  // Phenotypes: loaded variables are linear in the centered group code plus
  // noise; the rest are pure noise.
  PhenoTable& ph = out.phenotypes;
  ph.subject_ids.resize(static_cast<size_t>(cfg.n_subjects));
  for (int i = 0; i < cfg.n_subjects; ++i)
    ph.subject_ids[static_cast<size_t>(i)] = out.dataset.subjects[static_cast<size_t>(i)].subject_id;
  for (int j = 0; j < cfg.n_phenotypes; ++j)
    ph.variable_names.push_back(strprintf("var_%02d", j + 1));
  const double kLoadCoef[] = {1.0, 0.8, -0.9, 0.7};
  ph.values.resize(static_cast<size_t>(cfg.n_subjects) * cfg.n_phenotypes);
  ph.missing.assign(ph.values.size(), 0);
  Rng prng(derive_seed(cfg.seed, "synth.pheno", 0));
  for (int i = 0; i < cfg.n_subjects; ++i) {
    double code = out.labels[static_cast<size_t>(i)] - 0.5 * (cfg.n_groups - 1);
    for (int j = 0; j < cfg.n_phenotypes; ++j) {
      double v;
      if (j < cfg.n_loaded) {
        double coef = kLoadCoef[j % 4] * (1.0 + 0.1 * (j / 4));
        v = coef * code + prng.normal() * 0.5;
      } else {
        v = prng.normal();
      }
      ph.values[static_cast<size_t>(i) * cfg.n_phenotypes + j] = v;
    }
  }
  return out;
}

}  // namespace fusestrata
