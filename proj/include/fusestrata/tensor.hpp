// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <vector>

#include "fusestrata/common.hpp"

namespace fusestrata {

// Dense row-aligned tensor. Layout convention across the project: the LAST
// dim index varies fastest in memory. Feature maps are (c, z, y, x) and
// volumes are (z, y, x), which makes an x-run contiguous and lets a volume
// read straight off disk double as one channel of a feature map.
template <class T>
struct Tensor {
  std::vector<int> dims;
  std::vector<T> v;

  Tensor() = default;
  explicit Tensor(std::vector<int> d) : dims(std::move(d)) {
    v.assign(static_cast<size_t>(numel_of(dims)), T(0));
  }
  Tensor(std::initializer_list<int> d) : Tensor(std::vector<int>(d)) {}

  static int64_t numel_of(const std::vector<int>& d) {
    int64_t n = 1;
    for (int x : d) {
      if (x < 0) fail(Errc::validation, "negative tensor dim");
      n *= x;
    }
    return n;
  }

  int64_t numel() const { return static_cast<int64_t>(v.size()); }
  bool empty() const { return v.empty(); }
  T* data() { return v.data(); }
  const T* data() const { return v.data(); }
  T& operator[](int64_t i) { return v[static_cast<size_t>(i)]; }
  const T& operator[](int64_t i) const { return v[static_cast<size_t>(i)]; }

  int dim(int i) const { return dims[static_cast<size_t>(i)]; }
  int ndim() const { return static_cast<int>(dims.size()); }

  void fill(T value) { std::fill(v.begin(), v.end(), value); }

  Tensor reshaped(std::vector<int> d) const {
    if (numel_of(d) != numel()) fail(Errc::validation, "reshape changes element count");
    Tensor out = *this;
    out.dims = std::move(d);
    return out;
  }

  template <class U>
  Tensor<U> cast() const {
    Tensor<U> out;
    out.dims = dims;
    out.v.resize(v.size());
    for (size_t i = 0; i < v.size(); ++i) out.v[i] = static_cast<U>(v[i]);
    return out;
  }
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

}  // namespace fusestrata
