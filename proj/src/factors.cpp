// SPDX-License-Identifier: Apache-2.0
#include "fusestrata/factors.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "fusestrata/common.hpp"

namespace fusestrata {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<const RowMat>;

TensorD from_eigen(const RowMat& m) {
  TensorD t({static_cast<int>(m.rows()), static_cast<int>(m.cols())});
  Eigen::Map<RowMat>(t.v.data(), m.rows(), m.cols()) = m;
  return t;
}

void require_matrix(const TensorD& t, const char* what) {
  if (t.dims.size() != 2) fail(Errc::validation, std::string(what) + " must be 2-d");
  for (double v : t.v)
    if (!std::isfinite(v)) fail(Errc::numeric, std::string(what) + " has non-finite entries");
}

}  // namespace

TensorD standardize(const PhenoTable& table) {
  PhenoTable filled = table;
  filled.impute_column_means();
  int n = filled.n(), p = filled.p();
  if (n < 2) fail(Errc::validation, "need at least 2 subjects to standardize");
  TensorD z({n, p});
  for (int j = 0; j < p; ++j) {
    double sum = 0;
    for (int i = 0; i < n; ++i) sum += filled.at(i, j);
    double mean = sum / n;
    double ss = 0;
    for (int i = 0; i < n; ++i) {
      double d = filled.at(i, j) - mean;
      ss += d * d;
    }
    double sd = std::sqrt(ss / (n - 1));
    if (sd == 0)
      fail(Errc::validation, "variable " + filled.variable_names[j] + " has zero variance");
    for (int i = 0; i < n; ++i)
      z[static_cast<int64_t>(i) * p + j] = (filled.at(i, j) - mean) / sd;
  }
  return z;
}

TensorD correlation_matrix(const TensorD& z) {
  require_matrix(z, "standardized data");
  int n = z.dims[0], p = z.dims[1];
  if (n < 2) fail(Errc::validation, "need at least 2 rows");
  MapMat zm(z.v.data(), n, p);
  RowMat corr = (zm.transpose() * zm) / static_cast<double>(n - 1);
  return from_eigen(corr);
}

PcaResult pca_retain_corr(const TensorD& corr) {
  require_matrix(corr, "correlation matrix");
  int p = corr.dims[0];
  if (corr.dims[1] != p) fail(Errc::validation, "correlation matrix must be square");
  MapMat cm(corr.v.data(), p, p);
  Eigen::SelfAdjointEigenSolver<RowMat> solver(cm);
  if (solver.info() != Eigen::Success) fail(Errc::numeric, "eigendecomposition failed");

  PcaResult res;
  res.eigenvalues.resize(static_cast<size_t>(p));
  for (int j = 0; j < p; ++j)  // solver returns ascending order
    res.eigenvalues[static_cast<size_t>(j)] = solver.eigenvalues()(p - 1 - j);
  res.k = static_cast<int>(std::count_if(res.eigenvalues.begin(), res.eigenvalues.end(),
                                         [](double l) { return l > 1.0; }));
  if (res.k == 0) fail(Errc::numeric, "no factor passes Kaiser criterion");

  res.loadings = TensorD({p, res.k});
  for (int j = 0; j < res.k; ++j) {
    Eigen::VectorXd vec = solver.eigenvectors().col(p - 1 - j);
    double sign = 1.0;
    for (int i = 0; i < p; ++i)
      if (std::fabs(vec(i)) > 1e-12) {
        sign = vec(i) > 0 ? 1.0 : -1.0;
        break;
      }
    double scale = std::sqrt(std::max(res.eigenvalues[static_cast<size_t>(j)], 0.0)) * sign;
    for (int i = 0; i < p; ++i) res.loadings[static_cast<int64_t>(i) * res.k + j] = vec(i) * scale;
  }
  return res;
}

PcaResult pca_retain(const TensorD& z) { return pca_retain_corr(correlation_matrix(z)); }

double varimax_criterion(const TensorD& loadings, bool kaiser_normalize) {
  require_matrix(loadings, "loadings");
  int p = loadings.dims[0], k = loadings.dims[1];
  std::vector<double> rownorm(static_cast<size_t>(p), 1.0);
  if (kaiser_normalize) {
    for (int i = 0; i < p; ++i) {
      double h = 0;
      for (int j = 0; j < k; ++j) {
        double l = loadings[static_cast<int64_t>(i) * k + j];
        h += l * l;
      }
      h = std::sqrt(h);
      if (h > 1e-300) rownorm[static_cast<size_t>(i)] = h;
    }
  }
  double crit = 0;
  for (int j = 0; j < k; ++j) {
    double s2 = 0, s4 = 0;
    for (int i = 0; i < p; ++i) {
      double b = loadings[static_cast<int64_t>(i) * k + j] / rownorm[static_cast<size_t>(i)];
      double b2 = b * b;
      s2 += b2;
      s4 += b2 * b2;
    }
    crit += s4 / p - (s2 / p) * (s2 / p);
  }
  return crit;
}

VarimaxResult varimax(const TensorD& loadings, int max_iter, double tol, bool kaiser_normalize) {
  require_matrix(loadings, "loadings");
  int p = loadings.dims[0], k = loadings.dims[1];
  if (max_iter < 1) fail(Errc::validation, "max_iter must be >= 1");

  VarimaxResult res;
  res.rotation = TensorD({k, k});
  for (int j = 0; j < k; ++j) res.rotation[static_cast<int64_t>(j) * k + j] = 1.0;
  res.rotated = loadings;

  // work on Kaiser-normalized rows; rotation acts on columns so the row
  // scaling commutes and the final rotated matrix is loadings * rotation
  std::vector<double> rownorm(static_cast<size_t>(p), 1.0);
  TensorD work = loadings;
  if (kaiser_normalize) {
    for (int i = 0; i < p; ++i) {
      double h = 0;
      for (int j = 0; j < k; ++j) {
        double l = work[static_cast<int64_t>(i) * k + j];
        h += l * l;
      }
      h = std::sqrt(h);
      if (h > 1e-300) {
        rownorm[static_cast<size_t>(i)] = h;
        for (int j = 0; j < k; ++j) work[static_cast<int64_t>(i) * k + j] /= h;
      }
    }
  }

  auto criterion_of = [&](const TensorD& m) {
    double crit = 0;
    for (int j = 0; j < k; ++j) {
      double s2 = 0, s4 = 0;
      for (int i = 0; i < p; ++i) {
        double b = m[static_cast<int64_t>(i) * k + j];
        double b2 = b * b;
        s2 += b2;
        s4 += b2 * b2;
      }
      crit += s4 / p - (s2 / p) * (s2 / p);
    }
    return crit;
  };

  double crit = criterion_of(work);
  if (k >= 2) {
    for (int sweep = 0; sweep < max_iter; ++sweep) {
      for (int j = 0; j < k - 1; ++j)
        for (int l = j + 1; l < k; ++l) {
          double a = 0, b = 0, c = 0, d = 0;
          for (int i = 0; i < p; ++i) {
            double x = work[static_cast<int64_t>(i) * k + j];
            double y = work[static_cast<int64_t>(i) * k + l];
            double u = x * x - y * y;
            double v = 2.0 * x * y;
            a += u;
            b += v;
            c += u * u - v * v;
            d += 2.0 * u * v;
          }
          double num = d - 2.0 * a * b / p;
          double den = c - (a * a - b * b) / p;
          double phi = 0.25 * std::atan2(num, den);
          if (std::fabs(phi) < 1e-15) continue;
          double cs = std::cos(phi), sn = std::sin(phi);
          for (int i = 0; i < p; ++i) {
            double x = work[static_cast<int64_t>(i) * k + j];
            double y = work[static_cast<int64_t>(i) * k + l];
            work[static_cast<int64_t>(i) * k + j] = x * cs + y * sn;
            work[static_cast<int64_t>(i) * k + l] = -x * sn + y * cs;
          }
          for (int i = 0; i < k; ++i) {
            double x = res.rotation[static_cast<int64_t>(i) * k + j];
            double y = res.rotation[static_cast<int64_t>(i) * k + l];
            res.rotation[static_cast<int64_t>(i) * k + j] = x * cs + y * sn;
            res.rotation[static_cast<int64_t>(i) * k + l] = -x * sn + y * cs;
          }
        }
      double next = criterion_of(work);
      res.sweep_criteria.push_back(next);
      ++res.sweeps;
      double gain = next - crit;
      crit = next;
      if (gain < tol) break;
    }
  }
  res.criterion = crit;

  // denormalize and fix column signs (largest-|entry| positive)
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < k; ++j)
      res.rotated[static_cast<int64_t>(i) * k + j] =
          work[static_cast<int64_t>(i) * k + j] * rownorm[static_cast<size_t>(i)];
  for (int j = 0; j < k; ++j) {
    int arg = 0;
    double best = -1;
    for (int i = 0; i < p; ++i) {
      double m = std::fabs(res.rotated[static_cast<int64_t>(i) * k + j]);
      if (m > best) {
        best = m;
        arg = i;
      }
    }
    if (res.rotated[static_cast<int64_t>(arg) * k + j] < 0) {
      for (int i = 0; i < p; ++i) res.rotated[static_cast<int64_t>(i) * k + j] *= -1.0;
      for (int i = 0; i < k; ++i) res.rotation[static_cast<int64_t>(i) * k + j] *= -1.0;
    }
  }
  return res;
}

TensorD factor_scores_regression(const TensorD& z, const TensorD& corr, const TensorD& loadings) {
  require_matrix(z, "standardized data");
  require_matrix(corr, "correlation matrix");
  require_matrix(loadings, "loadings");
  int n = z.dims[0], p = z.dims[1], k = loadings.dims[1];
  if (corr.dims[0] != p || corr.dims[1] != p)
    fail(Errc::validation, "correlation matrix shape mismatch");
  if (loadings.dims[0] != p) fail(Errc::validation, "loadings row count mismatch");

  MapMat cm(corr.v.data(), p, p);
  Eigen::SelfAdjointEigenSolver<RowMat> solver(cm);
  if (solver.info() != Eigen::Success) fail(Errc::numeric, "eigendecomposition failed");
  double lmax = 0, lmin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < p; ++i) {
    double l = std::fabs(solver.eigenvalues()(i));
    lmax = std::max(lmax, l);
    lmin = std::min(lmin, l);
  }
  RowMat sys = cm;
  if (lmin <= 0 || lmax / lmin > 1e12)
    for (int i = 0; i < p; ++i) sys(i, i) += 1e-8;

  Eigen::LDLT<RowMat> ldlt(sys);
  if (ldlt.info() != Eigen::Success)
    fail(Errc::numeric, "correlation matrix singular after ridge");
  MapMat lm(loadings.v.data(), p, k);
  RowMat coeff = ldlt.solve(lm);  // corr^-1 * loadings, p x k
  if (!coeff.allFinite()) fail(Errc::numeric, "correlation matrix singular after ridge");
  MapMat zm(z.v.data(), n, p);
  return from_eigen(zm * coeff);
}

TensorD threshold_loadings(const TensorD& loadings, double abs_threshold) {
  TensorD out = loadings;
  for (double& v : out.v)
    if (std::fabs(v) < abs_threshold) v = std::numeric_limits<double>::quiet_NaN();
  return out;
}

FactorModel fit_factors(const PhenoTable& table, int varimax_max_iter, double varimax_tol) {
  FactorModel fm;
  fm.variable_names = table.variable_names;
  TensorD z = standardize(table);
  TensorD corr = correlation_matrix(z);
  PcaResult pca = pca_retain_corr(corr);
  fm.k = pca.k;
  fm.eigenvalues = pca.eigenvalues;
  fm.unrotated = pca.loadings;
  double retained = 0;
  for (int j = 0; j < pca.k; ++j) retained += pca.eigenvalues[static_cast<size_t>(j)];
  fm.explained_variance = retained / table.p();
  VarimaxResult vr = varimax(pca.loadings, varimax_max_iter, varimax_tol);
  fm.loadings = vr.rotated;
  fm.rotation = vr.rotation;
  fm.scores = factor_scores_regression(z, corr, fm.loadings);
  return fm;
}

}  // namespace fusestrata
