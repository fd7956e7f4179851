// SPDX-License-Identifier: Apache-2.0
#pragma once

// Dense kernels for the operator set the architecture needs, forward and
// backward. Every kernel is a pure function with a fixed per-output summation
// order, so results are bit-deterministic and shared between the training
// graph and the allocation-light inference path.
//
// Feature maps are Tensor<T> with dims {c, nz, ny, nx} (x contiguous).
// Standard conv weights: {c_out, c_in, k, k, k} in (kz, ky, kx) order.
// Depthwise weights: {c, k, k, k}. Bias/BN parameters: {c}.

#include <cmath>
#include <cstdint>
#include <type_traits>
#include <vector>

#include "fusestrata/common.hpp"
#include "fusestrata/rng.hpp"
#include "fusestrata/tensor.hpp"

namespace fusestrata::nn {

struct MapDims {
  int c, nz, ny, nx;
  int64_t plane() const { return static_cast<int64_t>(nz) * ny * nx; }
  int64_t numel() const { return plane() * c; }
};

template <class T>
MapDims map_dims(const Tensor<T>& t) {
  if (t.ndim() != 4) fail(Errc::validation, "expected a 4-d feature map");
  return {t.dim(0), t.dim(1), t.dim(2), t.dim(3)};
}

// ---------------------------------------------------------------------------
// Standard 3-d convolution (cross-correlation), stride 1, zero-padded "same".

template <class T>
void conv3d_forward(const Tensor<T>& in, const Tensor<T>& w, const Tensor<T>& bias,
                    Tensor<T>& out, int k) {
  MapDims d = map_dims(in);
  if (k % 2 == 0) fail(Errc::validation, "same-padded conv needs odd kernel");
  if (w.ndim() != 5 || w.dim(1) != d.c || w.dim(2) != k || w.dim(3) != k || w.dim(4) != k)
    fail(Errc::validation, "conv weight shape mismatch");
  int c_out = w.dim(0);
  if (bias.numel() != c_out) fail(Errc::validation, "conv bias shape mismatch");
  out = Tensor<T>({c_out, d.nz, d.ny, d.nx});
  const int P = k / 2;
  const int64_t in_plane = d.plane();
  const T* wp = w.data();
  std::vector<T> acc(static_cast<size_t>(d.nx));
  for (int co = 0; co < c_out; ++co) {
    T* out_base = out.data() + static_cast<int64_t>(co) * in_plane;
    for (int z = 0; z < d.nz; ++z) {
      for (int y = 0; y < d.ny; ++y) {
        std::fill(acc.begin(), acc.end(), bias[co]);
        for (int ci = 0; ci < d.c; ++ci) {
          const T* in_ch = in.data() + static_cast<int64_t>(ci) * in_plane;
          const T* w_ch = wp + ((static_cast<int64_t>(co) * d.c + ci) * k * k * k);
          for (int kz = 0; kz < k; ++kz) {
            int zi = z + kz - P;
            if (zi < 0 || zi >= d.nz) continue;
            for (int ky = 0; ky < k; ++ky) {
              int yi = y + ky - P;
              if (yi < 0 || yi >= d.ny) continue;
              const T* in_row = in_ch + (static_cast<int64_t>(zi) * d.ny + yi) * d.nx;
              const T* w_row = w_ch + (static_cast<int64_t>(kz) * k + ky) * k;
              for (int kx = 0; kx < k; ++kx) {
                T wv = w_row[kx];
                int off = kx - P;
                int x_lo = off < 0 ? -off : 0;
                int x_hi = off > 0 ? d.nx - off : d.nx;
                const T* src = in_row + off;
                for (int x = x_lo; x < x_hi; ++x) acc[static_cast<size_t>(x)] += wv * src[x];
              }
            }
          }
        }
        std::copy(acc.begin(), acc.end(), out_base + (static_cast<int64_t>(z) * d.ny + y) * d.nx);
      }
    }
  }
}

template <class T>
void conv3d_backward_input(const Tensor<T>& w, const Tensor<T>& dout, Tensor<T>& din,
                           const MapDims& din_dims, int k) {
  const int P = k / 2;
  int c_out = w.dim(0);
  const int64_t plane = din_dims.plane();
  if (din.numel() != din_dims.numel()) {
    din = Tensor<T>({din_dims.c, din_dims.nz, din_dims.ny, din_dims.nx});
  }
  std::vector<T> acc(static_cast<size_t>(din_dims.nx));
  for (int ci = 0; ci < din_dims.c; ++ci) {
    T* din_ch = din.data() + static_cast<int64_t>(ci) * plane;
    for (int z = 0; z < din_dims.nz; ++z) {
      for (int y = 0; y < din_dims.ny; ++y) {
        std::fill(acc.begin(), acc.end(), T(0));
        for (int co = 0; co < c_out; ++co) {
          const T* dout_ch = dout.data() + static_cast<int64_t>(co) * plane;
          const T* w_ch = w.data() + ((static_cast<int64_t>(co) * din_dims.c + ci) * k * k * k);
          for (int kz = 0; kz < k; ++kz) {
            int zo = z + P - kz;
            if (zo < 0 || zo >= din_dims.nz) continue;
            for (int ky = 0; ky < k; ++ky) {
              int yo = y + P - ky;
              if (yo < 0 || yo >= din_dims.ny) continue;
              const T* dout_row = dout_ch + (static_cast<int64_t>(zo) * din_dims.ny + yo) * din_dims.nx;
              const T* w_row = w_ch + (static_cast<int64_t>(kz) * k + ky) * k;
              for (int kx = 0; kx < k; ++kx) {
                T wv = w_row[kx];
                int off = P - kx;
                int x_lo = off < 0 ? -off : 0;
                int x_hi = off > 0 ? din_dims.nx - off : din_dims.nx;
                const T* src = dout_row + off;
                for (int x = x_lo; x < x_hi; ++x) acc[static_cast<size_t>(x)] += wv * src[x];
              }
            }
          }
        }
        T* dst = din_ch + (static_cast<int64_t>(z) * din_dims.ny + y) * din_dims.nx;
        for (int x = 0; x < din_dims.nx; ++x) dst[x] += acc[static_cast<size_t>(x)];
      }
    }
  }
}

template <class T>
void conv3d_backward_params(const Tensor<T>& in, const Tensor<T>& dout, Tensor<T>& dw,
                            Tensor<T>& db, int k) {
  MapDims d = map_dims(in);
  int c_out = dout.dim(0);
  const int P = k / 2;
  const int64_t plane = d.plane();
  if (dw.numel() == 0) dw = Tensor<T>({c_out, d.c, k, k, k});
  if (db.numel() == 0) db = Tensor<T>({c_out});
  for (int co = 0; co < c_out; ++co) {
    const T* dout_ch = dout.data() + static_cast<int64_t>(co) * plane;
    T bsum = 0;
    for (int64_t i = 0; i < plane; ++i) bsum += dout_ch[i];
    db[co] += bsum;
    for (int ci = 0; ci < d.c; ++ci) {
      const T* in_ch = in.data() + static_cast<int64_t>(ci) * plane;
      T* dw_ch = dw.data() + ((static_cast<int64_t>(co) * d.c + ci) * k * k * k);
      for (int kz = 0; kz < k; ++kz) {
        for (int ky = 0; ky < k; ++ky) {
          for (int kx = 0; kx < k; ++kx) {
            T sum = 0;
            int off = kx - P;
            int x_lo = off < 0 ? -off : 0;
            int x_hi = off > 0 ? d.nx - off : d.nx;
            for (int z = 0; z < d.nz; ++z) {
              int zi = z + kz - P;
              if (zi < 0 || zi >= d.nz) continue;
              for (int y = 0; y < d.ny; ++y) {
                int yi = y + ky - P;
                if (yi < 0 || yi >= d.ny) continue;
                const T* dout_row = dout_ch + (static_cast<int64_t>(z) * d.ny + y) * d.nx;
                const T* in_row = in_ch + (static_cast<int64_t>(zi) * d.ny + yi) * d.nx + off;
                T row_sum = 0;
                for (int x = x_lo; x < x_hi; ++x) row_sum += dout_row[x] * in_row[x];
                sum += row_sum;
              }
            }
            dw_ch[(static_cast<int64_t>(kz) * k + ky) * k + kx] += sum;
          }
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Depthwise 3-d convolution: each channel convolved with its own kernel.

template <class T>
void depthwise_forward(const Tensor<T>& in, const Tensor<T>& w, const Tensor<T>& bias,
                       Tensor<T>& out, int k) {
  MapDims d = map_dims(in);
  if (k % 2 == 0) fail(Errc::validation, "same-padded conv needs odd kernel");
  if (w.ndim() != 4 || w.dim(0) != d.c || w.dim(1) != k || w.dim(2) != k || w.dim(3) != k)
    fail(Errc::validation, "depthwise weight shape mismatch");
  if (bias.numel() != d.c) fail(Errc::validation, "depthwise bias shape mismatch");
  out = Tensor<T>({d.c, d.nz, d.ny, d.nx});
  const int P = k / 2;
  const int64_t plane = d.plane();
  std::vector<T> acc(static_cast<size_t>(d.nx));
  for (int c = 0; c < d.c; ++c) {
    const T* in_ch = in.data() + static_cast<int64_t>(c) * plane;
    T* out_ch = out.data() + static_cast<int64_t>(c) * plane;
    const T* w_ch = w.data() + static_cast<int64_t>(c) * k * k * k;
    for (int z = 0; z < d.nz; ++z) {
      for (int y = 0; y < d.ny; ++y) {
        std::fill(acc.begin(), acc.end(), bias[c]);
        for (int kz = 0; kz < k; ++kz) {
          int zi = z + kz - P;
          if (zi < 0 || zi >= d.nz) continue;
          for (int ky = 0; ky < k; ++ky) {
            int yi = y + ky - P;
            if (yi < 0 || yi >= d.ny) continue;
            const T* in_row = in_ch + (static_cast<int64_t>(zi) * d.ny + yi) * d.nx;
            const T* w_row = w_ch + (static_cast<int64_t>(kz) * k + ky) * k;
            for (int kx = 0; kx < k; ++kx) {
              T wv = w_row[kx];
              int off = kx - P;
              int x_lo = off < 0 ? -off : 0;
              int x_hi = off > 0 ? d.nx - off : d.nx;
              const T* src = in_row + off;
              for (int x = x_lo; x < x_hi; ++x) acc[static_cast<size_t>(x)] += wv * src[x];
            }
          }
        }
        std::copy(acc.begin(), acc.end(), out_ch + (static_cast<int64_t>(z) * d.ny + y) * d.nx);
      }
    }
  }
}

template <class T>
void depthwise_backward_input(const Tensor<T>& w, const Tensor<T>& dout, Tensor<T>& din,
                              const MapDims& d, int k) {
  const int P = k / 2;
  const int64_t plane = d.plane();
  if (din.numel() != d.numel()) din = Tensor<T>({d.c, d.nz, d.ny, d.nx});
  std::vector<T> acc(static_cast<size_t>(d.nx));
  for (int c = 0; c < d.c; ++c) {
    const T* dout_ch = dout.data() + static_cast<int64_t>(c) * plane;
    T* din_ch = din.data() + static_cast<int64_t>(c) * plane;
    const T* w_ch = w.data() + static_cast<int64_t>(c) * k * k * k;
    for (int z = 0; z < d.nz; ++z) {
      for (int y = 0; y < d.ny; ++y) {
        std::fill(acc.begin(), acc.end(), T(0));
        for (int kz = 0; kz < k; ++kz) {
          int zo = z + P - kz;
          if (zo < 0 || zo >= d.nz) continue;
          for (int ky = 0; ky < k; ++ky) {
            int yo = y + P - ky;
            if (yo < 0 || yo >= d.ny) continue;
            const T* dout_row = dout_ch + (static_cast<int64_t>(zo) * d.ny + yo) * d.nx;
            const T* w_row = w_ch + (static_cast<int64_t>(kz) * k + ky) * k;
            for (int kx = 0; kx < k; ++kx) {
              T wv = w_row[kx];
              int off = P - kx;
              int x_lo = off < 0 ? -off : 0;
              int x_hi = off > 0 ? d.nx - off : d.nx;
              const T* src = dout_row + off;
              for (int x = x_lo; x < x_hi; ++x) acc[static_cast<size_t>(x)] += wv * src[x];
            }
          }
        }
        T* dst = din_ch + (static_cast<int64_t>(z) * d.ny + y) * d.nx;
        for (int x = 0; x < d.nx; ++x) dst[x] += acc[static_cast<size_t>(x)];
      }
    }
  }
}

template <class T>
void depthwise_backward_params(const Tensor<T>& in, const Tensor<T>& dout, Tensor<T>& dw,
                               Tensor<T>& db, int k) {
  MapDims d = map_dims(in);
  const int P = k / 2;
  const int64_t plane = d.plane();
  if (dw.numel() == 0) dw = Tensor<T>({d.c, k, k, k});
  if (db.numel() == 0) db = Tensor<T>({d.c});
  for (int c = 0; c < d.c; ++c) {
    const T* in_ch = in.data() + static_cast<int64_t>(c) * plane;
    const T* dout_ch = dout.data() + static_cast<int64_t>(c) * plane;
    T* dw_ch = dw.data() + static_cast<int64_t>(c) * k * k * k;
    T bsum = 0;
    for (int64_t i = 0; i < plane; ++i) bsum += dout_ch[i];
    db[c] += bsum;
    for (int kz = 0; kz < k; ++kz) {
      for (int ky = 0; ky < k; ++ky) {
        for (int kx = 0; kx < k; ++kx) {
          T sum = 0;
          int off = kx - P;
          int x_lo = off < 0 ? -off : 0;
          int x_hi = off > 0 ? d.nx - off : d.nx;
          for (int z = 0; z < d.nz; ++z) {
            int zi = z + kz - P;
            if (zi < 0 || zi >= d.nz) continue;
            for (int y = 0; y < d.ny; ++y) {
              int yi = y + ky - P;
              if (yi < 0 || yi >= d.ny) continue;
              const T* dout_row = dout_ch + (static_cast<int64_t>(z) * d.ny + y) * d.nx;
              const T* in_row = in_ch + (static_cast<int64_t>(zi) * d.ny + yi) * d.nx + off;
              T row_sum = 0;
              for (int x = x_lo; x < x_hi; ++x) row_sum += dout_row[x] * in_row[x];
              sum += row_sum;
            }
          }
          dw_ch[(static_cast<int64_t>(kz) * k + ky) * k + kx] += sum;
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Max pooling, window 3, stride 2, "same" padding (output ceil(n/2); the
// implicit padding value is -inf, i.e. padded positions never win). Ties go to
// the first maximum in (kz, ky, kx) scan order.

inline int pooled_extent(int n) { return (n + 1) / 2; }

// Left padding of the stride-2 window-3 "same" scheme.
inline int pool_pad_lo(int n) {
  int out = pooled_extent(n);
  int total = std::max(0, (out - 1) * 2 + 3 - n);
  return total / 2;
}

template <class T>
void maxpool_forward(const Tensor<T>& in, Tensor<T>& out, std::vector<int64_t>* argmax) {
  MapDims d = map_dims(in);
  int oz = pooled_extent(d.nz), oy = pooled_extent(d.ny), ox = pooled_extent(d.nx);
  int pz = pool_pad_lo(d.nz), py = pool_pad_lo(d.ny), px = pool_pad_lo(d.nx);
  out = Tensor<T>({d.c, oz, oy, ox});
  if (argmax) argmax->assign(static_cast<size_t>(out.numel()), -1);
  const int64_t in_plane = d.plane();
  int64_t oi = 0;
  for (int c = 0; c < d.c; ++c) {
    const T* in_ch = in.data() + static_cast<int64_t>(c) * in_plane;
    for (int z = 0; z < oz; ++z) {
      for (int y = 0; y < oy; ++y) {
        for (int x = 0; x < ox; ++x, ++oi) {
          T best = -std::numeric_limits<T>::infinity();
          int64_t best_idx = -1;
          for (int kz = 0; kz < 3; ++kz) {
            int zi = 2 * z + kz - pz;
            if (zi < 0 || zi >= d.nz) continue;
            for (int ky = 0; ky < 3; ++ky) {
              int yi = 2 * y + ky - py;
              if (yi < 0 || yi >= d.ny) continue;
              for (int kx = 0; kx < 3; ++kx) {
                int xi = 2 * x + kx - px;
                if (xi < 0 || xi >= d.nx) continue;
                int64_t idx = (static_cast<int64_t>(zi) * d.ny + yi) * d.nx + xi;
                T v = in_ch[idx];
                if (v > best) {
                  best = v;
                  best_idx = idx;
                }
              }
            }
          }
          out[oi] = best;
          if (argmax) (*argmax)[static_cast<size_t>(oi)] = static_cast<int64_t>(c) * in_plane + best_idx;
        }
      }
    }
  }
}

template <class T>
void maxpool_backward(const std::vector<int64_t>& argmax, const Tensor<T>& dout, Tensor<T>& din,
                      const MapDims& d) {
  if (din.numel() != d.numel()) din = Tensor<T>({d.c, d.nz, d.ny, d.nx});
  for (int64_t i = 0; i < dout.numel(); ++i) din[argmax[static_cast<size_t>(i)]] += dout[i];
}

// ---------------------------------------------------------------------------
// Nearest-neighbor 2x upsampling.

template <class T>
void upsample_forward(const Tensor<T>& in, Tensor<T>& out) {
  MapDims d = map_dims(in);
  out = Tensor<T>({d.c, d.nz * 2, d.ny * 2, d.nx * 2});
  const int64_t in_plane = d.plane();
  const int64_t out_plane = in_plane * 8;
  for (int c = 0; c < d.c; ++c) {
    const T* in_ch = in.data() + static_cast<int64_t>(c) * in_plane;
    T* out_ch = out.data() + static_cast<int64_t>(c) * out_plane;
    for (int z = 0; z < d.nz * 2; ++z) {
      for (int y = 0; y < d.ny * 2; ++y) {
        const T* src = in_ch + (static_cast<int64_t>(z / 2) * d.ny + y / 2) * d.nx;
        T* dst = out_ch + (static_cast<int64_t>(z) * d.ny * 2 + y) * d.nx * 2;
        for (int x = 0; x < d.nx * 2; ++x) dst[x] = src[x / 2];
      }
    }
  }
}

template <class T>
void upsample_backward(const Tensor<T>& dout, Tensor<T>& din, const MapDims& d) {
  if (din.numel() != d.numel()) din = Tensor<T>({d.c, d.nz, d.ny, d.nx});
  const int64_t in_plane = d.plane();
  const int64_t out_plane = in_plane * 8;
  for (int c = 0; c < d.c; ++c) {
    const T* dout_ch = dout.data() + static_cast<int64_t>(c) * out_plane;
    T* din_ch = din.data() + static_cast<int64_t>(c) * in_plane;
    for (int z = 0; z < d.nz; ++z) {
      for (int y = 0; y < d.ny; ++y) {
        T* dst = din_ch + (static_cast<int64_t>(z) * d.ny + y) * d.nx;
        for (int dz = 0; dz < 2; ++dz) {
          for (int dy = 0; dy < 2; ++dy) {
            const T* src =
                dout_ch + (static_cast<int64_t>(2 * z + dz) * d.ny * 2 + (2 * y + dy)) * d.nx * 2;
            for (int x = 0; x < d.nx; ++x) dst[x] += src[2 * x] + src[2 * x + 1];
          }
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Batch normalization over a single-sample batch: statistics are per channel
// across spatial positions. Population (biased) variance, like the reference
// framework's batch statistics.

template <class T>
struct BnSaved {
  std::vector<double> mean, invstd;
};

template <class T>
void batchnorm_train_forward(const Tensor<T>& in, const Tensor<T>& gamma, const Tensor<T>& beta,
                             double eps, Tensor<T>& out, BnSaved<T>& saved,
                             std::type_identity_t<Tensor<T>*> running_mean,
                             std::type_identity_t<Tensor<T>*> running_var, double momentum) {
  MapDims d = map_dims(in);
  if (gamma.numel() != d.c || beta.numel() != d.c) fail(Errc::validation, "batchnorm parameter shape");
  out = Tensor<T>({d.c, d.nz, d.ny, d.nx});
  const int64_t plane = d.plane();
  saved.mean.resize(static_cast<size_t>(d.c));
  saved.invstd.resize(static_cast<size_t>(d.c));
  for (int c = 0; c < d.c; ++c) {
    const T* src = in.data() + static_cast<int64_t>(c) * plane;
    double sum = 0;
    for (int64_t i = 0; i < plane; ++i) sum += static_cast<double>(src[i]);
    double mean = sum / static_cast<double>(plane);
    double sq = 0;
    for (int64_t i = 0; i < plane; ++i) {
      double t = static_cast<double>(src[i]) - mean;
      sq += t * t;
    }
    double var = sq / static_cast<double>(plane);
    double invstd = 1.0 / std::sqrt(var + eps);
    saved.mean[static_cast<size_t>(c)] = mean;
    saved.invstd[static_cast<size_t>(c)] = invstd;
    T scale = static_cast<T>(static_cast<double>(gamma[c]) * invstd);
    T shift = static_cast<T>(static_cast<double>(beta[c]) - static_cast<double>(gamma[c]) * invstd * mean);
    T* dst = out.data() + static_cast<int64_t>(c) * plane;
    for (int64_t i = 0; i < plane; ++i) dst[i] = scale * src[i] + shift;
    if (running_mean) {
      (*running_mean)[c] = static_cast<T>(momentum * static_cast<double>((*running_mean)[c]) +
                                          (1.0 - momentum) * mean);
      (*running_var)[c] = static_cast<T>(momentum * static_cast<double>((*running_var)[c]) +
                                         (1.0 - momentum) * var);
    }
  }
}

template <class T>
void batchnorm_train_backward(const Tensor<T>& in, const Tensor<T>& gamma, const BnSaved<T>& saved,
                              const Tensor<T>& dout, Tensor<T>& din, Tensor<T>& dgamma,
                              Tensor<T>& dbeta) {
  MapDims d = map_dims(in);
  if (din.numel() != d.numel()) din = Tensor<T>({d.c, d.nz, d.ny, d.nx});
  if (dgamma.numel() == 0) dgamma = Tensor<T>({d.c});
  if (dbeta.numel() == 0) dbeta = Tensor<T>({d.c});
  const int64_t plane = d.plane();
  const double n = static_cast<double>(plane);
  for (int c = 0; c < d.c; ++c) {
    const T* x = in.data() + static_cast<int64_t>(c) * plane;
    const T* dy = dout.data() + static_cast<int64_t>(c) * plane;
    T* dx = din.data() + static_cast<int64_t>(c) * plane;
    double mean = saved.mean[static_cast<size_t>(c)];
    double invstd = saved.invstd[static_cast<size_t>(c)];
    double sum_dy = 0, sum_dy_xhat = 0;
    for (int64_t i = 0; i < plane; ++i) {
      double xhat = (static_cast<double>(x[i]) - mean) * invstd;
      sum_dy += static_cast<double>(dy[i]);
      sum_dy_xhat += static_cast<double>(dy[i]) * xhat;
    }
    dgamma[c] += static_cast<T>(sum_dy_xhat);
    dbeta[c] += static_cast<T>(sum_dy);
    double g = static_cast<double>(gamma[c]);
    double mean_dy = sum_dy / n;
    double mean_dy_xhat = sum_dy_xhat / n;
    for (int64_t i = 0; i < plane; ++i) {
      double xhat = (static_cast<double>(x[i]) - mean) * invstd;
      dx[i] += static_cast<T>(g * invstd *
                              (static_cast<double>(dy[i]) - mean_dy - xhat * mean_dy_xhat));
    }
  }
}

template <class T>
void batchnorm_infer_forward(const Tensor<T>& in, const Tensor<T>& gamma, const Tensor<T>& beta,
                             const Tensor<T>& running_mean, const Tensor<T>& running_var,
                             double eps, Tensor<T>& out) {
  MapDims d = map_dims(in);
  out = Tensor<T>({d.c, d.nz, d.ny, d.nx});
  const int64_t plane = d.plane();
  for (int c = 0; c < d.c; ++c) {
    double invstd = 1.0 / std::sqrt(static_cast<double>(running_var[c]) + eps);
    T scale = static_cast<T>(static_cast<double>(gamma[c]) * invstd);
    T shift = static_cast<T>(static_cast<double>(beta[c]) -
                             static_cast<double>(running_mean[c]) * static_cast<double>(gamma[c]) * invstd);
    const T* src = in.data() + static_cast<int64_t>(c) * plane;
    T* dst = out.data() + static_cast<int64_t>(c) * plane;
    for (int64_t i = 0; i < plane; ++i) dst[i] = scale * src[i] + shift;
  }
}

template <class T>
void batchnorm_infer_backward(const Tensor<T>& in, const Tensor<T>& gamma,
                              const Tensor<T>& running_mean, const Tensor<T>& running_var,
                              double eps, const Tensor<T>& dout, Tensor<T>& din, Tensor<T>& dgamma,
                              Tensor<T>& dbeta) {
  MapDims d = map_dims(in);
  if (din.numel() != d.numel()) din = Tensor<T>({d.c, d.nz, d.ny, d.nx});
  if (dgamma.numel() == 0) dgamma = Tensor<T>({d.c});
  if (dbeta.numel() == 0) dbeta = Tensor<T>({d.c});
  const int64_t plane = d.plane();
  for (int c = 0; c < d.c; ++c) {
    double invstd = 1.0 / std::sqrt(static_cast<double>(running_var[c]) + eps);
    double mean = static_cast<double>(running_mean[c]);
    const T* x = in.data() + static_cast<int64_t>(c) * plane;
    const T* dy = dout.data() + static_cast<int64_t>(c) * plane;
    T* dx = din.data() + static_cast<int64_t>(c) * plane;
    T scale = static_cast<T>(static_cast<double>(gamma[c]) * invstd);
    double sum_dy = 0, sum_dy_xhat = 0;
    for (int64_t i = 0; i < plane; ++i) {
      sum_dy += static_cast<double>(dy[i]);
      sum_dy_xhat += static_cast<double>(dy[i]) * (static_cast<double>(x[i]) - mean) * invstd;
      dx[i] += scale * dy[i];
    }
    dgamma[c] += static_cast<T>(sum_dy_xhat);
    dbeta[c] += static_cast<T>(sum_dy);
  }
}

// ---------------------------------------------------------------------------
// Pointwise nonlinearities.

template <class T>
void elu_forward(const Tensor<T>& in, Tensor<T>& out) {
  out = in;
  for (auto& v : out.v) v = v > T(0) ? v : static_cast<T>(std::expm1(static_cast<double>(v)));
}

template <class T>
void elu_backward(const Tensor<T>& in, const Tensor<T>& out, const Tensor<T>& dout, Tensor<T>& din) {
  if (din.numel() != in.numel()) {
    din = in;
    din.fill(T(0));
  }
  for (int64_t i = 0; i < in.numel(); ++i)
    din[i] += in[i] > T(0) ? dout[i] : dout[i] * (out[i] + T(1));
}

template <class T>
void sigmoid_forward(const Tensor<T>& in, Tensor<T>& out) {
  out = in;
  for (auto& v : out.v) v = static_cast<T>(1.0 / (1.0 + std::exp(-static_cast<double>(v))));
}

template <class T>
void sigmoid_backward(const Tensor<T>& out, const Tensor<T>& dout, Tensor<T>& din) {
  if (din.numel() != out.numel()) {
    din = out;
    din.fill(T(0));
  }
  for (int64_t i = 0; i < out.numel(); ++i) din[i] += dout[i] * out[i] * (T(1) - out[i]);
}

// ---------------------------------------------------------------------------
// Inverted dropout. The mask records the survivor multiplier.

template <class T>
void dropout_forward(const Tensor<T>& in, double rate, Rng& rng, Tensor<T>& out,
                     std::vector<uint8_t>& mask) {
  if (rate < 0.0 || rate >= 1.0) fail(Errc::validation, "dropout rate must be in [0,1)");
  out = in;
  mask.assign(static_cast<size_t>(in.numel()), 1);
  if (rate == 0.0) return;
  T scale = static_cast<T>(1.0 / (1.0 - rate));
  for (int64_t i = 0; i < in.numel(); ++i) {
    if (rng.uniform() < rate) {
      mask[static_cast<size_t>(i)] = 0;
      out[i] = T(0);
    } else {
      out[i] = in[i] * scale;
    }
  }
}

template <class T>
void dropout_backward(const std::vector<uint8_t>& mask, double rate, const Tensor<T>& dout,
                      Tensor<T>& din) {
  if (din.numel() != dout.numel()) {
    din = dout;
    din.fill(T(0));
  }
  T scale = static_cast<T>(rate == 0.0 ? 1.0 : 1.0 / (1.0 - rate));
  for (int64_t i = 0; i < dout.numel(); ++i)
    if (mask[static_cast<size_t>(i)]) din[i] += dout[i] * scale;
}

// ---------------------------------------------------------------------------
// Binary cross-entropy, mean over elements, predictions clamped away from
// {0,1}. Gradient is zero where the clamp is active.

inline constexpr double kBceClamp = 1e-7;

template <class T>
double bce_forward(const Tensor<T>& pred, const Tensor<T>& target) {
  if (pred.numel() != target.numel()) fail(Errc::validation, "bce shape mismatch");
  if (pred.numel() == 0) fail(Errc::validation, "bce of empty tensor");
  double sum = 0;
  for (int64_t i = 0; i < pred.numel(); ++i) {
    double p = std::clamp(static_cast<double>(pred[i]), kBceClamp, 1.0 - kBceClamp);
    double t = static_cast<double>(target[i]);
    sum -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
  }
  return sum / static_cast<double>(pred.numel());
}

template <class T>
void bce_backward(const Tensor<T>& pred, const Tensor<T>& target, double dloss, Tensor<T>& dpred) {
  if (dpred.numel() != pred.numel()) {
    dpred = pred;
    dpred.fill(T(0));
  }
  double inv_n = dloss / static_cast<double>(pred.numel());
  for (int64_t i = 0; i < pred.numel(); ++i) {
    double p = static_cast<double>(pred[i]);
    if (p < kBceClamp || p > 1.0 - kBceClamp) continue;  // clamp region: flat
    double t = static_cast<double>(target[i]);
    dpred[i] += static_cast<T>(inv_n * (-t / p + (1.0 - t) / (1.0 - p)));
  }
}

// Mean squared error over elements (evaluation metric; not the training loss).
template <class T>
double mse(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.numel() != b.numel()) fail(Errc::validation, "mse shape mismatch");
  double sum = 0;
  for (int64_t i = 0; i < a.numel(); ++i) {
    double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sum += d * d;
  }
  return sum / static_cast<double>(a.numel());
}

}  // namespace fusestrata::nn
