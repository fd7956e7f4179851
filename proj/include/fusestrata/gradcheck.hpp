// SPDX-License-Identifier: Apache-2.0
#pragma once

// Central finite-difference validation of reverse-mode gradients. Works on
// any scalar-valued function of a tensor list; the analytic side is whatever
// the caller computes (normally a Graph backward pass).

#include <functional>
#include <vector>

#include "fusestrata/rng.hpp"
#include "fusestrata/tensor.hpp"

namespace fusestrata::nn {

struct GradCheckReport {
  double max_rel_err = 0.0;
  int checked = 0;
  // location of the worst element, for diagnosis
  int worst_tensor = -1;
  int64_t worst_index = -1;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
};

// loss:  pure forward evaluation (must be deterministic; re-seed any internal
//        randomness per call).
// grads: analytic gradient of `loss` w.r.t. each tensor, same shapes.
// Central differences at step `eps`; relative error uses max(|a|,|fd|,1) as
// the denominator so near-zero gradients are judged absolutely.
// At most `max_per_tensor` elements are probed per tensor (seeded subset).
inline GradCheckReport check_gradients(
    const std::function<double(const std::vector<TensorD>&)>& loss,
    const std::vector<TensorD>& point, const std::vector<TensorD>& analytic, double eps = 1e-5,
    int max_per_tensor = 400, uint64_t seed = 17) {
  GradCheckReport report;
  std::vector<TensorD> work = point;
  for (size_t t = 0; t < point.size(); ++t) {
    if (analytic[t].numel() != point[t].numel())
      fail(Errc::validation, "gradient/point shape mismatch");
    std::vector<int64_t> probe;
    int64_t n = point[t].numel();
    if (n <= max_per_tensor) {
      probe.resize(static_cast<size_t>(n));
      for (int64_t i = 0; i < n; ++i) probe[static_cast<size_t>(i)] = i;
    } else {
      Rng rng(derive_seed(seed, "gradcheck", t));
      for (int i = 0; i < max_per_tensor; ++i)
        probe.push_back(static_cast<int64_t>(rng.below(static_cast<uint64_t>(n))));
    }
    for (int64_t idx : probe) {
      double saved = work[t][idx];
      work[t][idx] = saved + eps;
      double up = loss(work);
      work[t][idx] = saved - eps;
      double down = loss(work);
      work[t][idx] = saved;
      double fd = (up - down) / (2.0 * eps);
      double a = analytic[t][idx];
      double denom = std::max({std::fabs(a), std::fabs(fd), 1.0});
      double rel = std::fabs(a - fd) / denom;
      ++report.checked;
      if (rel > report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst_tensor = static_cast<int>(t);
        report.worst_index = idx;
        report.analytic_at_worst = a;
        report.numeric_at_worst = fd;
      }
    }
  }
  return report;
}

}  // namespace fusestrata::nn
