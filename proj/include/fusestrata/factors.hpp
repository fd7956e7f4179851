// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "fusestrata/pheno.hpp"
#include "fusestrata/tensor.hpp"

namespace fusestrata {

// Phenotype factor extraction: correlation PCA with Kaiser retention, Varimax
// rotation, and Thurstone regression scores.

struct FactorModel {
  std::vector<std::string> variable_names;
  int k = 0;                        // retained factor count
  std::vector<double> eigenvalues;  // all p, descending
  double explained_variance = 0;    // sum of retained eigenvalues / p
  TensorD unrotated;                // p x k, eigenvector * sqrt(eigenvalue)
  TensorD loadings;                 // p x k after Varimax
  TensorD rotation;                 // k x k orthogonal
  TensorD scores;                   // n x k regression factor scores
};

// Mean-imputes masked cells, then centers/scales each column to mean 0 and
// sample sd 1 (ddof=1). Zero-variance or fully missing columns are errors.
TensorD standardize(const PhenoTable& table);

// p x p correlation matrix of standardized data: Z^T Z / (n-1).
TensorD correlation_matrix(const TensorD& z);

struct PcaResult {
  std::vector<double> eigenvalues;  // descending, length p
  TensorD loadings;                 // p x k, retained columns only
  int k = 0;                        // #{eigenvalue > 1}
};

// Eigendecomposition with the Kaiser (eigenvalue > 1) retention rule.
// Eigenvector signs are fixed so each retained vector's first component of
// magnitude > 1e-12 is positive.
PcaResult pca_retain_corr(const TensorD& corr);
PcaResult pca_retain(const TensorD& z);

struct VarimaxResult {
  TensorD rotated;                     // same shape as input
  TensorD rotation;                    // k x k orthogonal
  int sweeps = 0;
  double criterion = 0;                // final value, Kaiser-normalized scale
  std::vector<double> sweep_criteria;  // value after each sweep
};

// Sum over factors of the variance of squared (optionally row-normalized)
// loadings. The quantity pairwise rotations maximize.
double varimax_criterion(const TensorD& loadings, bool kaiser_normalize = true);

// Iterative pairwise planar rotations; k=1 returns the identity rotation.
// Columns are sign-fixed so the largest-magnitude entry is positive.
VarimaxResult varimax(const TensorD& loadings, int max_iter = 500, double tol = 1e-8,
                      bool kaiser_normalize = true);

// Thurstone regression scores: Z * corr^-1 * loadings. A ridge of 1e-8 is
// added to the diagonal when the eigenvalue condition number exceeds 1e12.
TensorD factor_scores_regression(const TensorD& z, const TensorD& corr,
                                 const TensorD& loadings);

// Display copy with |loading| < abs_threshold replaced by NaN (blank).
TensorD threshold_loadings(const TensorD& loadings, double abs_threshold = 0.3);

// Full pipeline over a phenotype table.
FactorModel fit_factors(const PhenoTable& table, int varimax_max_iter = 500,
                        double varimax_tol = 1e-8);

}  // namespace fusestrata
