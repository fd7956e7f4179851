// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace fusestrata {

enum class Errc { io, parse, validation, numeric };

class Error : public std::runtime_error {
public:
  Error(Errc code, std::string msg) : std::runtime_error(std::move(msg)), code_(code) {}
  Errc code() const { return code_; }

private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

inline std::string strprintf(const char* fmt, ...) {
  va_list ap;
  va_start(ap, fmt);
  va_list ap2;
  va_copy(ap2, ap);
  int n = std::vsnprintf(nullptr, 0, fmt, ap);
  va_end(ap);
  std::string out(static_cast<size_t>(n), '\0');
  std::vsnprintf(out.data(), out.size() + 1, fmt, ap2);
  va_end(ap2);
  return out;
}

// Shortest round-trippable decimal forms used for every number that lands in
// an output file; keeps reruns byte-comparable.
inline std::string fmt_double(double v) { return strprintf("%.17g", v); }
inline std::string fmt_float(float v) { return strprintf("%.9g", v); }

// Linear-interpolation percentile (the numpy default). `p` in [0, 100];
// `sorted` must be ascending and non-empty.
inline double percentile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) fail(Errc::validation, "percentile of empty range");
  if (sorted.size() == 1) return sorted[0];
  double rank = p / 100.0 * static_cast<double>(sorted.size() - 1);
  double lo = std::floor(rank);
  size_t i = static_cast<size_t>(lo);
  if (i + 1 >= sorted.size()) return sorted.back();
  double w = rank - lo;
  return sorted[i] * (1.0 - w) + sorted[i + 1] * w;
}

inline double percentile(std::vector<double> values, double p) {
  std::sort(values.begin(), values.end());
  return percentile_sorted(values, p);
}

inline double median_sorted(const std::vector<double>& sorted) {
  if (sorted.empty()) fail(Errc::validation, "median of empty range");
  size_t n = sorted.size();
  if (n % 2 == 1) return sorted[n / 2];
  return 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

inline double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return median_sorted(values);
}

// Median absolute deviation, unscaled.
inline double mad(const std::vector<double>& values) {
  double med = median(values);
  std::vector<double> dev(values.size());
  for (size_t i = 0; i < values.size(); ++i) dev[i] = std::fabs(values[i] - med);
  return median(std::move(dev));
}

// Runs fn(i) for i in [0, n). With `threads` <= 1 the loop stays on the calling
// thread; otherwise work is split into contiguous ranges, one per worker, so
// the partition (and any per-index output) is independent of scheduling.
inline void parallel_for(size_t n, int threads, const std::function<void(size_t)>& fn) {
  if (threads <= 1 || n < 2) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  size_t workers = std::min<size_t>(static_cast<size_t>(threads), n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (size_t w = 0; w < workers; ++w) {
    size_t begin = n * w / workers;
    size_t end = n * (w + 1) / workers;
    pool.emplace_back([begin, end, &fn] {
      for (size_t i = begin; i < end; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

// Worker cap shared by the CLI and library entry points: explicit argument
// wins, then the FUSESTRATA_THREADS environment variable, then 1.
inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("FUSESTRATA_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

}  // namespace fusestrata
