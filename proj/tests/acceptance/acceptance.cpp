// SPDX-License-Identifier: Apache-2.0
//
// Acceptance gate for the whole library: eleven numbered criteria, one
// [PASS] line each, first failure prints [FAIL] with the offending check and
// exits nonzero. Every check stays on in release builds. The heavyweight
// criteria (single-subject overfit, the end-to-end chain) run through the
// same pipeline stages the command-line tool uses, so artifacts land on disk
// and the determinism criterion can rerun and byte-compare them.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "fusestrata/apcluster.hpp"
#include "fusestrata/factors.hpp"
#include "fusestrata/model.hpp"
#include "fusestrata/pipeline.hpp"
#include "fusestrata/reconmetrics.hpp"
#include "fusestrata/report.hpp"
#include "fusestrata/rng.hpp"
#include "fusestrata/stratstats.hpp"
#include "fusestrata/synth.hpp"
#include "fusestrata/trainer.hpp"
#include "fusestrata/volume.hpp"
#include "support/gradcheck_helpers.hpp"
#include "support/nn_oracles.hpp"
#include "support/testutil.hpp"

using namespace fusestrata;
using oracles::distinct_tensor;
using oracles::random_tensor;

namespace {

#define REQUIRE(cond, ...)                                          \
  do {                                                              \
    if (!(cond)) {                                                  \
      std::fprintf(stderr, "[FAIL] %s:%d ", __FILE__, __LINE__);    \
      std::fprintf(stderr, __VA_ARGS__);                            \
      std::fprintf(stderr, "\n");                                   \
      std::exit(1);                                                 \
    }                                                               \
  } while (0)

void pass(int criterion, const char* fmt, ...) {
  std::printf("[PASS] criterion %2d: ", criterion);
  va_list args;
  va_start(args, fmt);
  std::vprintf(fmt, args);
  va_end(args);
  std::printf("\n");
  std::fflush(stdout);
}

double now_s() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

constexpr uint64_t kGateSeed = 20260822;

// ---------------------------------------------------------------------------
// criterion 1: finite-difference gradient checks, >= 20 random instances per
// operator and per composed block, all below 1e-4 relative error in f64

struct GradCase {
  const char* name;
  // builds a random instance and returns its gradcheck report
  std::function<nn::GradCheckReport(Rng&, int)> run;
};

nn::GradCheckReport check(const gradsupport::Builder& b, const std::vector<TensorD>& point,
                          double eps = 1e-5) {
  return gradsupport::check_op(b, point, eps);
}

std::vector<GradCase> grad_cases() {
  std::vector<GradCase> cases;

  cases.push_back({"conv3d", [](Rng& rng, int inst) {
    int k = std::array<int, 3>{1, 3, 5}[inst % 3];
    int ci = 1 + static_cast<int>(rng.below(3)), co = 1 + static_cast<int>(rng.below(3));
    int nx = 3 + static_cast<int>(rng.below(3));
    std::vector<TensorD> p = {random_tensor<double>({ci, 4, 4, nx}, rng),
                              random_tensor<double>({co, ci, k, k, k}, rng, 0.3),
                              random_tensor<double>({co}, rng),
                              random_tensor<double>({co, 4, 4, nx}, rng)};
    return check([k](nn::Graph<double>& g, const std::vector<int>& ids) {
      return g.dot(g.conv3d(ids[0], ids[1], ids[2], k), ids[3]);
    }, p);
  }});

  cases.push_back({"depthwise", [](Rng& rng, int inst) {
    int k = (inst % 2) ? 5 : 3;
    int c = 1 + static_cast<int>(rng.below(3));
    int nx = 3 + static_cast<int>(rng.below(3));
    std::vector<TensorD> p = {random_tensor<double>({c, 4, 4, nx}, rng),
                              random_tensor<double>({c, k, k, k}, rng, 0.3),
                              random_tensor<double>({c}, rng),
                              random_tensor<double>({c, 4, 4, nx}, rng)};
    return check([k](nn::Graph<double>& g, const std::vector<int>& ids) {
      return g.dot(g.depthwise(ids[0], ids[1], ids[2], k), ids[3]);
    }, p);
  }});

  cases.push_back({"maxpool", [](Rng& rng, int) {
    int c = 1 + static_cast<int>(rng.below(2));
    int nx = 3 + static_cast<int>(rng.below(3)), ny = 3 + static_cast<int>(rng.below(3));
    int nz = 3 + static_cast<int>(rng.below(3));
    TensorD in = distinct_tensor<double>({c, nz, ny, nx}, rng);
    TensorD w = random_tensor<double>({c, (nz + 1) / 2, (ny + 1) / 2, (nx + 1) / 2}, rng);
    // tight FD step keeps the probe away from rank-order ties
    return check([](nn::Graph<double>& g, const std::vector<int>& ids) {
      return g.dot(g.maxpool(ids[0]), ids[1]);
    }, {in, w}, 1e-6);
  }});

  cases.push_back({"upsample", [](Rng& rng, int) {
    int c = 1 + static_cast<int>(rng.below(2));
    int nx = 2 + static_cast<int>(rng.below(3)), ny = 2 + static_cast<int>(rng.below(2));
    std::vector<TensorD> p = {random_tensor<double>({c, 2, ny, nx}, rng),
                              random_tensor<double>({c, 4, 2 * ny, 2 * nx}, rng)};
    return check([](nn::Graph<double>& g, const std::vector<int>& ids) {
      return g.dot(g.upsample(ids[0]), ids[1]);
    }, p);
  }});

  cases.push_back({"batchnorm train", [](Rng& rng, int) {
    int c = 1 + static_cast<int>(rng.below(3));
    TensorD gamma = random_tensor<double>({c}, rng, 0.5);
    for (auto& v : gamma.v) v += 1.5;  // keep the scale away from zero
    std::vector<TensorD> p = {random_tensor<double>({c, 3, 3, 3}, rng), gamma,
                              random_tensor<double>({c}, rng, 0.5),
                              random_tensor<double>({c, 3, 3, 3}, rng)};
    return check([](nn::Graph<double>& g, const std::vector<int>& ids) {
      int y = g.batchnorm_train(ids[0], ids[1], ids[2], 1e-3, nullptr, nullptr, 0.99);
      return g.dot(y, ids[3]);
    }, p);
  }});

  cases.push_back({"batchnorm infer", [](Rng& rng, int) {
    int c = 1 + static_cast<int>(rng.below(3));
    TensorD rm({c}), rv({c});
    for (int i = 0; i < c; ++i) {
      rm[i] = rng.uniform(-0.5, 0.5);
      rv[i] = rng.uniform(0.5, 1.5);
    }
    std::vector<TensorD> p = {random_tensor<double>({c, 3, 3, 3}, rng),
                              random_tensor<double>({c}, rng, 0.5),
                              random_tensor<double>({c}, rng, 0.5),
                              random_tensor<double>({c, 3, 3, 3}, rng)};
    return check([rm, rv](nn::Graph<double>& g, const std::vector<int>& ids) {
      int y = g.batchnorm_infer(ids[0], ids[1], ids[2], g.leaf(rm), g.leaf(rv), 1e-3);
      return g.dot(y, ids[3]);
    }, p);
  }});

  cases.push_back({"elu", [](Rng& rng, int) {
    TensorD in = random_tensor<double>({2, 3, 3, 3}, rng);
    for (auto& v : in.v)
      if (std::fabs(v) < 1e-2) v = v < 0 ? v - 0.1 : v + 0.1;  // avoid the kink
    std::vector<TensorD> p = {in, random_tensor<double>({2, 3, 3, 3}, rng)};
    return check([](nn::Graph<double>& g, const std::vector<int>& ids) {
      return g.dot(g.elu(ids[0]), ids[1]);
    }, p);
  }});

  cases.push_back({"sigmoid", [](Rng& rng, int) {
    std::vector<TensorD> p = {random_tensor<double>({2, 3, 3, 3}, rng),
                              random_tensor<double>({2, 3, 3, 3}, rng)};
    return check([](nn::Graph<double>& g, const std::vector<int>& ids) {
      return g.dot(g.sigmoid(ids[0]), ids[1]);
    }, p);
  }});

  cases.push_back({"dropout", [](Rng& rng, int inst) {
    double rate = 0.1 + 0.1 * (inst % 4);
    uint64_t mask_seed = 900 + static_cast<uint64_t>(inst);
    std::vector<TensorD> p = {random_tensor<double>({2, 3, 3, 3}, rng),
                              random_tensor<double>({2, 3, 3, 3}, rng)};
    return check([rate, mask_seed](nn::Graph<double>& g, const std::vector<int>& ids) {
      Rng mask_rng(mask_seed);  // identical mask on every forward evaluation
      return g.dot(g.dropout(ids[0], rate, &mask_rng), ids[1]);
    }, p);
  }});

  cases.push_back({"bce", [](Rng& rng, int) {
    TensorD pred({1, 2, 3, 2}), target({1, 2, 3, 2});
    for (int64_t i = 0; i < pred.numel(); ++i) {
      pred[i] = rng.uniform(0.1, 0.9);
      target[i] = rng.uniform(0.0, 1.0);
    }
    return check([target](nn::Graph<double>& g, const std::vector<int>& ids) {
      return g.bce(ids[0], g.leaf(target));
    }, {pred});
  }});

  cases.push_back({"add", [](Rng& rng, int) {
    std::vector<TensorD> p = {random_tensor<double>({2, 3, 2, 3}, rng),
                              random_tensor<double>({2, 3, 2, 3}, rng),
                              random_tensor<double>({2, 3, 2, 3}, rng)};
    return check([](nn::Graph<double>& g, const std::vector<int>& ids) {
      return g.dot(g.add(ids[0], ids[1]), ids[2]);
    }, p);
  }});

  cases.push_back({"concat", [](Rng& rng, int) {
    int ca = 1 + static_cast<int>(rng.below(2)), cb = 1 + static_cast<int>(rng.below(2));
    std::vector<TensorD> p = {random_tensor<double>({ca, 3, 2, 3}, rng),
                              random_tensor<double>({cb, 3, 2, 3}, rng),
                              random_tensor<double>({ca + cb, 3, 2, 3}, rng)};
    return check([](nn::Graph<double>& g, const std::vector<int>& ids) {
      return g.dot(g.concat(ids[0], ids[1]), ids[2]);
    }, p);
  }});

  cases.push_back({"reshape", [](Rng& rng, int) {
    std::vector<TensorD> p = {random_tensor<double>({2, 3, 2, 3}, rng),
                              random_tensor<double>({4, 3, 3}, rng)};
    return check([](nn::Graph<double>& g, const std::vector<int>& ids) {
      return g.dot(g.reshape(ids[0], {4, 3, 3}), ids[1]);
    }, p);
  }});

  cases.push_back({"separable block", [](Rng& rng, int inst) {
    int k = (inst % 2) ? 5 : 3;
    int ci = 1 + static_cast<int>(rng.below(2)), co = 1 + static_cast<int>(rng.below(3));
    TensorD gamma = random_tensor<double>({co}, rng, 0.3);
    for (auto& v : gamma.v) v += 1.2;
    std::vector<TensorD> p = {random_tensor<double>({ci, 4, 4, 4}, rng),
                              random_tensor<double>({ci, k, k, k}, rng, 0.3),
                              random_tensor<double>({ci}, rng),
                              random_tensor<double>({co, ci, 1, 1, 1}, rng),
                              random_tensor<double>({co}, rng),
                              gamma,
                              random_tensor<double>({co}, rng, 0.3),
                              random_tensor<double>({co, 4, 4, 4}, rng)};
    return check([k](nn::Graph<double>& g, const std::vector<int>& ids) {
      int y = g.depthwise(ids[0], ids[1], ids[2], k);
      y = g.conv3d(y, ids[3], ids[4], 1);
      y = g.batchnorm_train(y, ids[5], ids[6], 1e-3, nullptr, nullptr, 0.99);
      y = g.elu(y);
      return g.dot(y, ids[7]);
    }, p);
  }});

  cases.push_back({"mid-flow block", [](Rng& rng, int) {
    int c = 2 + static_cast<int>(rng.below(2));
    const int k = 3;
    std::vector<TensorD> p;
    p.push_back(random_tensor<double>({c, 4, 4, 4}, rng));
    for (int b = 0; b < 3; ++b) {
      p.push_back(random_tensor<double>({c, k, k, k}, rng, 0.3));
      p.push_back(random_tensor<double>({c}, rng));
      p.push_back(random_tensor<double>({c, c, 1, 1, 1}, rng));
      p.push_back(random_tensor<double>({c}, rng));
      TensorD gamma = random_tensor<double>({c}, rng, 0.3);
      for (auto& v : gamma.v) v += 1.2;
      p.push_back(gamma);
      p.push_back(random_tensor<double>({c}, rng, 0.3));
    }
    p.push_back(random_tensor<double>({c, 4, 4, 4}, rng));
    return check([](nn::Graph<double>& g, const std::vector<int>& ids) {
      int x = ids[0];
      int y = x;
      for (int b = 0; b < 3; ++b) {
        int o = 1 + b * 6;
        y = g.depthwise(y, ids[o], ids[o + 1], 3);
        y = g.conv3d(y, ids[o + 2], ids[o + 3], 1);
        y = g.batchnorm_train(y, ids[o + 4], ids[o + 5], 1e-3, nullptr, nullptr, 0.99);
        y = g.elu(y);
      }
      return g.dot(g.add(x, y), ids[19]);
    }, p);
  }});

  return cases;
}

void criterion_1() {
  double t0 = now_s();
  double worst = 0;
  auto cases = grad_cases();
  for (size_t op = 0; op < cases.size(); ++op) {
    Rng rng(derive_seed(kGateSeed, "accept.grad", op));
    for (int inst = 0; inst < 20; ++inst) {
      nn::GradCheckReport rep = cases[op].run(rng, inst);
      REQUIRE(rep.checked > 0, "%s instance %d checked nothing", cases[op].name, inst);
      REQUIRE(rep.max_rel_err < 1e-4, "%s instance %d rel err %.3e >= 1e-4", cases[op].name,
              inst, rep.max_rel_err);
      worst = std::max(worst, rep.max_rel_err);
    }
  }
  double elapsed = now_s() - t0;
  REQUIRE(elapsed < 120.0, "gradient suite took %.1fs >= 120s", elapsed);
  pass(1, "gradients: %zu ops x 20 instances, worst rel err %.2e, %.1fs", cases.size(), worst,
       elapsed);
}

// ---------------------------------------------------------------------------
// criterion 2: default geometry and a real forward pass

void criterion_2() {
  ModelConfig cfg;  // published defaults
  REQUIRE(cfg.bx() == 4 && cfg.by() == 4 && cfg.bz() == 3, "bottleneck grid %dx%dx%d != 4x4x3",
          cfg.bx(), cfg.by(), cfg.bz());
  REQUIRE(cfg.bottleneck_channels() == 32, "bottleneck channels %d != 32",
          cfg.bottleneck_channels());
  REQUIRE(cfg.embedding_length() == 1536, "embedding length %lld != 1536",
          static_cast<long long>(cfg.embedding_length()));

  FuseModel<float> model(cfg, 5);
  Rng rng(6);
  std::vector<Tensor<float>> inputs;
  for (int m = 0; m < cfg.n_modalities; ++m) {
    Tensor<float> t({1, cfg.nz, cfg.ny, cfg.nx});
    for (auto& v : t.v) v = static_cast<float>(rng.uniform(0.0, 1.0));
    inputs.push_back(t);
  }
  Tensor<float> emb = model.embed(inputs);
  REQUIRE(emb.numel() == 1536, "fused embedding carries %lld values, want 1536",
          static_cast<long long>(emb.numel()));
  std::vector<Tensor<float>> rec = model.reconstruct(inputs);
  REQUIRE(static_cast<int>(rec.size()) == cfg.n_modalities, "reconstruction count %zu",
          rec.size());
  for (int m = 0; m < cfg.n_modalities; ++m) {
    const auto& r = rec[static_cast<size_t>(m)];
    REQUIRE(r.ndim() == 4 && r.dim(0) == 1 && r.dim(1) == cfg.nz && r.dim(2) == cfg.ny &&
                r.dim(3) == cfg.nx,
            "modality %d reconstruction dims mismatch", m);
    for (float v : r.v) REQUIRE(std::isfinite(v), "modality %d non-finite output", m);
  }
  pass(2, "geometry: bottleneck 4x4x3x32, fused embedding 1536, recon dims match inputs");
}

// ---------------------------------------------------------------------------
// criterion 3: mid-flow parameter ratio, exact integers

void criterion_3() {
  double t0 = now_s();
  // closed forms at k=5: standard 3*125*C^2, separable 3*(125*C + C^2)
  REQUIRE(midflow_weights_standard(32, 5) == 384000, "standard count C=32");
  REQUIRE(midflow_weights_separable(32, 5) == 15072, "separable count C=32");
  REQUIRE(midflow_weights_standard(24, 5) == 216000, "standard count C=24");
  REQUIRE(midflow_weights_separable(24, 5) == 10728, "separable count C=24");
  for (int64_t c : {8, 16, 24, 32, 48, 64}) {
    // ratio == 125C/(125+C) exactly: cross-multiplied integer identity
    int64_t lhs = midflow_weights_standard(c, 5) * (125 + c);
    int64_t rhs = 125 * c * midflow_weights_separable(c, 5);
    REQUIRE(lhs == rhs, "ratio identity fails at C=%lld", static_cast<long long>(c));
  }
  double r32 = midflow_weight_ratio(32, 5);
  double r24 = midflow_weight_ratio(24, 5);
  REQUIRE(std::fabs(r32 - 4000.0 / 157.0) < 1e-12, "C=32 ratio %.6f", r32);
  REQUIRE(std::fabs(r24 - 3000.0 / 149.0) < 1e-12, "C=24 ratio %.6f", r24);
  REQUIRE(std::fabs(r32 - 25.5) < 0.05, "C=32 ratio %.3f not ~25.5", r32);
  REQUIRE(std::fabs(r24 - 20.1) < 0.05, "C=24 ratio %.3f not ~20.1", r24);

  // count_params reports the same ratio for models whose largest C is 32/24
  FuseModel<float> deep(ModelConfig{}, 1);  // depth 5, base 2 -> C=32
  REQUIRE(deep.count_params().separable_vs_standard_ratio == r32, "count_params ratio C=32");
  ModelConfig c24;
  c24.nx = c24.ny = c24.nz = 48;
  c24.depth = 4;
  c24.base_channels = 3;  // 3 << 3 = 24 at the bottleneck
  FuseModel<float> mid(c24, 1);
  REQUIRE(mid.count_params().separable_vs_standard_ratio == r24, "count_params ratio C=24");
  double elapsed = now_s() - t0;
  REQUIRE(elapsed < 1.0, "parameter arithmetic took %.2fs >= 1s", elapsed);
  pass(3, "mid-flow ratio 125C/(125+C) exact; C=32 -> %.4fx, C=24 -> %.4fx", r32, r24);
}

// ---------------------------------------------------------------------------
// criterion 4: single-subject overfit through the pipeline stages

RunConfig overfit_config() {
  RunConfig rc;
  rc.set("seed", "21");
  rc.set("synth.n", "1");
  rc.set("synth.dims", "32x32x24");
  rc.set("synth.groups", "1");
  rc.set("model.depth", "3");
  rc.set("model.channels", "4");
  rc.set("model.dropout", "0");
  rc.set("training.epochs", "500");
  rc.set("training.lr", "1e-3");
  return rc;
}

std::vector<MetricRow> run_overfit(const std::string& out) {
  RunConfig rc = overfit_config();
  stage_synth(rc, out);
  stage_train(rc, out + "/dataset", out);
  return stage_metrics(rc, out + "/dataset", out + "/model.ckpt", out);
}

void criterion_4(const std::string& out) {
  double t0 = now_s();
  std::vector<MetricRow> rows = run_overfit(out);
  double elapsed = now_s() - t0;
  REQUIRE(rows.size() == 2, "expected 2 modality rows, got %zu", rows.size());
  for (const MetricRow& r : rows)
    REQUIRE(r.mse < 0.01, "modality %s MSE %.6f >= 0.01 after 500 steps", r.modality.c_str(),
            r.mse);
  REQUIRE(elapsed < 900.0, "overfit run took %.0fs >= 900s", elapsed);
  pass(4, "overfit 32x32x24 depth 3, 500 steps: MSE %s=%.4f %s=%.4f in %.0fs",
       rows[0].modality.c_str(), rows[0].mse, rows[1].modality.c_str(), rows[1].mse, elapsed);
}

// ---------------------------------------------------------------------------
// criterion 5: 10-fold CV harness plus the identity-model stub

void criterion_5(const std::string& out) {
  RunConfig rc;
  rc.set("seed", "19");
  rc.set("synth.n", "40");
  rc.set("synth.dims", "16x16x8");
  rc.set("synth.groups", "3");
  rc.set("model.depth", "2");
  rc.set("training.epochs", "2");
  rc.set("training.folds", "10");
  rc.set("metrics.roi", "2x2x2");
  rc.set("metrics.pairs", "200");

  stage_synth(rc, out);
  CvResult cv = stage_cv(rc, out + "/dataset", out);
  REQUIRE(cv.folds.size() == 10, "CV produced %zu folds", cv.folds.size());
  for (const FoldReport& fold : cv.folds) {
    REQUIRE(fold.rows.size() == 8, "fold %d held %zu rows, want 4 subjects x 2 modalities",
            fold.fold, fold.rows.size());
    REQUIRE(fold.medians.size() == 2, "fold %d medians", fold.fold);
  }
  REQUIRE(cv.summary.size() == 6, "summary rows %zu != 2 modalities x 3 metrics",
          cv.summary.size());
  for (const CvSummaryRow& s : cv.summary) {
    REQUIRE(std::isfinite(s.median) && std::isfinite(s.mad), "summary %s/%s not finite",
            s.modality.c_str(), s.metric.c_str());
    REQUIRE(s.mad >= 0, "negative MAD");
  }
  for (const char* name : {"cv_metrics.csv", "fold_medians.csv", "cv_summary.json",
                           "cv_boxplot.svg"}) {
    std::filesystem::path p = std::filesystem::path(out) / name;
    REQUIRE(std::filesystem::exists(p) && std::filesystem::file_size(p) > 0, "%s missing", name);
  }

  // identity stub: reconstruction == input must score exactly zero everywhere
  Dataset ds = load_dataset(out + "/dataset");
  normalize_dataset(ds);
  const Volume& v0 = ds.volume(0, 0);
  Dims dims{v0.nx, v0.ny, v0.nz};
  ReconFactory identity = [](const Dataset&, uint64_t) {
    return [](const SubjectRecord& subject) { return subject.volumes; };
  };
  CvResult stub = cross_validate(ds, rc.model_config(&dims), rc.train_config(), rc.cnr_config(),
                                 10, identity);
  for (const FoldReport& fold : stub.folds)
    for (const MetricRow& r : fold.rows)
      REQUIRE(r.mse == 0.0 && r.normdiff == 0.0 && r.cnr_normdiff == 0.0,
              "identity stub fold %d subject %s: %g/%g/%g not exactly 0", fold.fold,
              r.subject_id.c_str(), r.mse, r.normdiff, r.cnr_normdiff);
  for (const CvSummaryRow& s : stub.summary)
    REQUIRE(s.median == 0.0 && s.mad == 0.0, "identity stub summary %s/%s nonzero",
            s.modality.c_str(), s.metric.c_str());
  pass(5, "10-fold CV on 40 subjects: medians+MAD emitted; identity stub scores exactly 0/0/0");
}

// ---------------------------------------------------------------------------
// criterion 6: metric hand values and brute-force oracles

// counting-based mid-rank Kruskal-Wallis, independent of the sort-based path
struct OracleKw {
  double h = 0;
  int df = 0;
  bool tied = false;
};

OracleKw kw_oracle(const std::vector<double>& v, const std::vector<int>& g) {
  int n = static_cast<int>(v.size());
  std::vector<double> rank(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    int less = 0, equal = 0;
    for (int j = 0; j < n; ++j) {
      if (v[static_cast<size_t>(j)] < v[static_cast<size_t>(i)]) ++less;
      else if (v[static_cast<size_t>(j)] == v[static_cast<size_t>(i)]) ++equal;
    }
    rank[static_cast<size_t>(i)] = less + (equal + 1) / 2.0;
  }
  std::map<int, std::pair<double, int>> by_group;
  for (int i = 0; i < n; ++i) {
    auto& slot = by_group[g[static_cast<size_t>(i)]];
    slot.first += rank[static_cast<size_t>(i)];
    ++slot.second;
  }
  std::map<double, int> mult;
  for (double x : v) ++mult[x];
  double tie = 0;
  for (const auto& kv : mult) {
    double t = kv.second;
    if (kv.second > 1) tie += t * t * t - t;
  }
  OracleKw res;
  res.df = static_cast<int>(by_group.size()) - 1;
  double nn = n;
  double denom = 1.0 - tie / (nn * nn * nn - nn);
  if (denom <= 0) {
    res.tied = true;
    return res;
  }
  double total = 0;
  for (const auto& kv : by_group) total += kv.second.first * kv.second.first / kv.second.second;
  res.h = std::max((12.0 / (nn * (nn + 1.0)) * total - 3.0 * (nn + 1.0)) / denom, 0.0);
  return res;
}

// brute-force silhouette with its own distance code
double silhouette_oracle(const TensorD& points, const std::vector<int>& labels) {
  int n = points.dims[0], d = points.dims[1];
  int k = 1 + *std::max_element(labels.begin(), labels.end());
  std::vector<int> sizes(static_cast<size_t>(k), 0);
  for (int l : labels) ++sizes[static_cast<size_t>(l)];
  auto dist = [&](int i, int j) {
    double acc = 0;
    for (int t = 0; t < d; ++t) {
      double diff =
          points[static_cast<int64_t>(i) * d + t] - points[static_cast<int64_t>(j) * d + t];
      acc += diff * diff;
    }
    return std::sqrt(acc);
  };
  double total = 0;
  for (int i = 0; i < n; ++i) {
    int own = labels[static_cast<size_t>(i)];
    if (sizes[static_cast<size_t>(own)] == 1) continue;
    double a = 0;
    for (int j = 0; j < n; ++j)
      if (j != i && labels[static_cast<size_t>(j)] == own) a += dist(i, j);
    a /= sizes[static_cast<size_t>(own)] - 1;
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      if (c == own || sizes[static_cast<size_t>(c)] == 0) continue;
      double sum = 0;
      for (int j = 0; j < n; ++j)
        if (labels[static_cast<size_t>(j)] == c) sum += dist(i, j);
      b = std::min(b, sum / sizes[static_cast<size_t>(c)]);
    }
    double denom = std::max(a, b);
    total += denom == 0 ? 0.0 : (b - a) / denom;
  }
  return total / n;
}

void criterion_6() {
  // NormDiff hand values (exactly representable volume intensities)
  Volume real(4, 4, 2), rec(4, 4, 2);
  for (auto& v : real.v) v = 0.25f;
  for (auto& v : rec.v) v = 0.75f;
  REQUIRE(std::fabs(mse(real, rec) - 0.25) < 1e-12, "constant-offset MSE");
  REQUIRE(std::fabs(normdiff_median(real, rec) - 0.5) < 1e-12, "hand normdiff median");
  REQUIRE(std::fabs(normdiff_scalar(0.4, 0.6) - 0.2) < 1e-12, "scalar normdiff 0.2");
  REQUIRE(normdiff_scalar(0.0, 0.0) == 0.0, "0/0 convention");

  // CNR hand value: a 4x4x3 block of ones above a block of zeros; pooled 96
  // voxels have mean 0.5, population std 0.5 -> CNR (1-0)/0.5 = 2
  Volume two(4, 4, 6);
  for (int z = 0; z < 3; ++z)
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 4; ++x) two.at(x, y, z) = 1.0f;
  CnrConfig cfg;
  cfg.background_thresh = -1.0;
  cfg.seed = 8;
  REQUIRE(std::fabs(cnr_median(two, cfg) - 2.0) < 1e-12, "two-block CNR");
  REQUIRE(std::fabs(normdiff_scalar(1.0, 2.0) - 1.0 / 3.0) < 1e-12, "CNR normdiff 1/3");

  // maxpool vs the naive oracle across every shape up to 5^3 at 1..2 channels
  Rng rng(derive_seed(kGateSeed, "accept.maxpool", 0));
  int pool_checked = 0;
  for (int c = 1; c <= 2; ++c)
    for (int nz = 1; nz <= 5; ++nz)
      for (int ny = 1; ny <= 5; ++ny)
        for (int nx = 1; nx <= 5; ++nx) {
          TensorD in = random_tensor<double>({c, nz, ny, nx}, rng);
          TensorD got;
          nn::maxpool_forward(in, got, nullptr);
          TensorD want = oracles::naive_maxpool(in);
          REQUIRE(got.dims == want.dims, "maxpool dims at %dx%dx%dx%d", c, nz, ny, nx);
          for (int64_t i = 0; i < got.numel(); ++i)
            REQUIRE(std::fabs(got[i] - want[i]) < 1e-10, "maxpool value at %dx%dx%dx%d", c, nz,
                    ny, nx);
          ++pool_checked;
        }

  // Kruskal-Wallis vs the counting oracle, every instance n <= 12
  Rng kw_rng(derive_seed(kGateSeed, "accept.kw", 0));
  int kw_checked = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    int n = 4 + static_cast<int>(kw_rng.below(9));  // 4..12
    int k = 2 + static_cast<int>(kw_rng.below(3));
    if (k > n) k = n;
    std::vector<double> v(static_cast<size_t>(n));
    for (auto& x : v) x = std::floor(kw_rng.uniform(0.0, 5.0));  // forces ties
    std::vector<int> g(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
      g[static_cast<size_t>(i)] = i < k ? i : static_cast<int>(kw_rng.below(static_cast<uint64_t>(k)));
    OracleKw want = kw_oracle(v, g);
    KwResult got = kruskal_wallis(v, g);
    REQUIRE(got.df == want.df && got.all_tied == want.tied, "KW shape trial %d", trial);
    if (!want.tied) {
      REQUIRE(std::fabs(got.h - want.h) < 1e-10, "KW H trial %d: %.12f vs %.12f", trial, got.h,
              want.h);
      ++kw_checked;
    }
  }
  REQUIRE(kw_checked > 1500, "too few non-degenerate KW trials");

  // silhouette vs brute force, every instance n <= 50
  Rng sil_rng(derive_seed(kGateSeed, "accept.sil", 0));
  for (int trial = 0; trial < 300; ++trial) {
    int n = 4 + static_cast<int>(sil_rng.below(47));  // 4..50
    int d = 2 + static_cast<int>(sil_rng.below(3));
    int k = 2 + static_cast<int>(sil_rng.below(3));
    if (k > n) k = n;
    TensorD pts({n, d});
    for (auto& x : pts.v) x = sil_rng.uniform(-2.0, 2.0);
    std::vector<int> labels(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) labels[static_cast<size_t>(i)] = i % k;  // every cluster occupied
    double got = silhouette(pts, labels);
    double want = silhouette_oracle(pts, labels);
    REQUIRE(std::fabs(got - want) < 1e-10, "silhouette trial %d: %.12f vs %.12f", trial, got,
            want);
  }
  pass(6, "hand metrics to 1e-12; %d maxpool, %d KW, 300 silhouette oracle instances to 1e-10",
       pool_checked, kw_checked);
}

// ---------------------------------------------------------------------------
// criterion 7: affinity propagation against an independent reference

// plain-loop message passing straight from the documented update formulas
struct ReferenceAp {
  int n;
  std::vector<double> s, r, a;

  ReferenceAp(const TensorD& similarities, double preference)
      : n(similarities.dims[0]), s(similarities.v), r(static_cast<size_t>(n) * n, 0.0),
        a(static_cast<size_t>(n) * n, 0.0) {
    for (int i = 0; i < n; ++i) s[static_cast<size_t>(i) * n + i] = preference;
  }

  void iterate(double damping) {
    std::vector<double> rn(static_cast<size_t>(n) * n), an(static_cast<size_t>(n) * n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        double best = -std::numeric_limits<double>::infinity();
        for (int kp = 0; kp < n; ++kp) {
          if (kp == k) continue;
          double v = a[static_cast<size_t>(i) * n + kp] + s[static_cast<size_t>(i) * n + kp];
          if (v > best) best = v;
        }
        rn[static_cast<size_t>(i) * n + k] = s[static_cast<size_t>(i) * n + k] - best;
      }
    for (size_t x = 0; x < r.size(); ++x) r[x] = damping * r[x] + (1.0 - damping) * rn[x];

    for (int k = 0; k < n; ++k) {
      double total = 0;
      for (int i = 0; i < n; ++i) total += std::max(0.0, r[static_cast<size_t>(i) * n + k]);
      double rkk = r[static_cast<size_t>(k) * n + k];
      for (int i = 0; i < n; ++i) {
        if (i == k) {
          an[static_cast<size_t>(i) * n + k] = total - std::max(0.0, rkk);
        } else {
          double sum =
              total - std::max(0.0, r[static_cast<size_t>(i) * n + k]) - std::max(0.0, rkk);
          an[static_cast<size_t>(i) * n + k] = std::min(0.0, rkk + sum);
        }
      }
    }
    for (size_t x = 0; x < a.size(); ++x) a[x] = damping * a[x] + (1.0 - damping) * an[x];
  }
};

TensorD blob_points(uint64_t seed, int per_blob, double spread) {
  Rng rng(seed);
  const double cx[3] = {0.0, 8.0, 0.0};
  const double cy[3] = {0.0, 0.0, 8.0};
  TensorD pts({3 * per_blob, 2});
  for (int b = 0; b < 3; ++b)
    for (int i = 0; i < per_blob; ++i) {
      int64_t row = static_cast<int64_t>(b) * per_blob + i;
      pts[row * 2] = cx[b] + spread * rng.normal();
      pts[row * 2 + 1] = cy[b] + spread * rng.normal();
    }
  return pts;
}

RunConfig cluster_config() {
  RunConfig rc;
  rc.set("seed", "7");
  rc.set("clustering.grid", "4x50");
  rc.set("clustering.max_iter", "500");
  return rc;
}

void write_blob_embeddings(const std::string& csv_path) {
  TensorD pts = blob_points(derive_seed(kGateSeed, "accept.blobs", 0), 8, 0.4);
  std::vector<std::string> ids;
  for (int i = 0; i < pts.dims[0]; ++i) ids.push_back(strprintf("s%04d", i));
  write_embeddings_csv(csv_path, ids, pts, cluster_config().provenance());
}

void criterion_7(const std::string& out) {
  // bit-for-bit message trajectories on 10 random instances
  for (int inst = 0; inst < 10; ++inst) {
    Rng rng(derive_seed(kGateSeed, "accept.ap", static_cast<uint64_t>(inst)));
    int n = 5 + static_cast<int>(rng.below(26));  // 5..30
    int d = 2 + static_cast<int>(rng.below(3));
    TensorD pts({n, d});
    for (auto& v : pts.v) v = rng.uniform(-3.0, 3.0);
    TensorD s = similarity_matrix(pts);
    std::vector<double> offdiag;
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        if (i != k) offdiag.push_back(s[static_cast<int64_t>(i) * n + k]);
    double pref = median(offdiag);
    double damping = 0.5 + 0.1 * (inst % 5);

    ReferenceAp ref(s, pref);
    int observed = 0, mismatches = 0;
    ApObserver observer = [&](int, const std::vector<double>& r, const std::vector<double>& a) {
      ref.iterate(damping);
      ++observed;
      if (r != ref.r || a != ref.a) ++mismatches;
    };
    affinity_propagation(s, pref, damping, 200, 30, &observer);
    REQUIRE(observed > 0, "instance %d ran no iterations", inst);
    REQUIRE(mismatches == 0, "instance %d (n=%d): %d/%d iterations diverge from the reference",
            inst, n, mismatches, observed);
  }

  // planted three-blob recovery across 10 seeds
  GridConfig gc;
  gc.n_damping = 4;
  gc.n_preference = 50;
  gc.max_iter = 500;
  double min_ari = 1.0;
  std::vector<int> truth(24);
  for (int i = 0; i < 24; ++i) truth[static_cast<size_t>(i)] = i / 8;
  for (uint64_t s = 0; s < 10; ++s) {
    TensorD pts = blob_points(derive_seed(kGateSeed, "accept.blobs", s), 8, 0.4);
    GridResult grid = grid_search(pts, gc);
    REQUIRE(grid.best.n_clusters == 3, "seed %llu selected K=%d", (unsigned long long)s,
            grid.best.n_clusters);
    double ari = adjusted_rand_index(grid.best.labels, truth);
    REQUIRE(ari >= 0.9, "seed %llu ARI %.3f < 0.9", (unsigned long long)s, ari);
    min_ari = std::min(min_ari, ari);
  }

  // artifacts for the determinism criterion
  std::filesystem::create_directories(out);
  write_blob_embeddings(out + "/embeddings.csv");
  stage_cluster(cluster_config(), out + "/embeddings.csv", out);
  pass(7, "message trajectories bit-identical on 10 instances; 3-blob K=3 with min ARI %.3f",
       min_ari);
}

// ---------------------------------------------------------------------------
// criterion 8: varimax properties and factor retention

void criterion_8() {
  // sweep criteria never decrease
  Rng rng(derive_seed(kGateSeed, "accept.varimax", 0));
  for (int trial = 0; trial < 50; ++trial) {
    int p = 4 + static_cast<int>(rng.below(9));
    int k = 2 + static_cast<int>(rng.below(3));
    TensorD load({p, k});
    for (auto& v : load.v) v = rng.uniform(-1.0, 1.0);
    VarimaxResult vr = varimax(load);
    for (size_t i = 1; i < vr.sweep_criteria.size(); ++i)
      REQUIRE(vr.sweep_criteria[i] >= vr.sweep_criteria[i - 1] - 1e-12,
              "trial %d sweep %zu decreased", trial, i);
  }

  // planted simple structure: rotation recovery matches a 0.01-degree grid
  for (uint64_t seed : {31ull, 32ull, 33ull}) {
    Rng srng(seed);
    int p = 10;
    TensorD base({p, 2});
    for (int i = 0; i < p; ++i) {
      double mag = 0.5 + 0.4 * srng.uniform(0.0, 1.0);
      base[static_cast<int64_t>(i) * 2 + (i % 2)] =
          (srng.uniform(0.0, 1.0) < 0.5 ? -1 : 1) * mag;
    }
    double theta = srng.uniform(0.1, 1.4);
    double c = std::cos(theta), s = std::sin(theta);
    TensorD mixed({p, 2});
    for (int i = 0; i < p; ++i) {
      mixed[static_cast<int64_t>(i) * 2] =
          base[static_cast<int64_t>(i) * 2] * c - base[static_cast<int64_t>(i) * 2 + 1] * s;
      mixed[static_cast<int64_t>(i) * 2 + 1] =
          base[static_cast<int64_t>(i) * 2] * s + base[static_cast<int64_t>(i) * 2 + 1] * c;
    }
    VarimaxResult vr = varimax(mixed);
    double grid_best = -1;
    const double deg = std::acos(-1.0) / 180.0;
    for (int step = 0; step < 9000; ++step) {  // 0..90 degrees in 0.01 steps
      double phi = step * 0.01 * deg;
      double cc = std::cos(phi), ss = std::sin(phi);
      TensorD rot({p, 2});
      for (int i = 0; i < p; ++i) {
        rot[static_cast<int64_t>(i) * 2] =
            mixed[static_cast<int64_t>(i) * 2] * cc - mixed[static_cast<int64_t>(i) * 2 + 1] * ss;
        rot[static_cast<int64_t>(i) * 2 + 1] =
            mixed[static_cast<int64_t>(i) * 2] * ss + mixed[static_cast<int64_t>(i) * 2 + 1] * cc;
      }
      grid_best = std::max(grid_best, varimax_criterion(rot));
    }
    double diff = std::fabs(varimax_criterion(vr.rotated) - grid_best);
    REQUIRE(diff < 1e-6, "seed %llu: |varimax - grid| = %.3e", (unsigned long long)seed, diff);
  }

  // rank-1 correlation: one retained factor with eigenvalue p
  {
    int p = 6;
    TensorD corr({p, p});
    for (auto& v : corr.v) v = 1.0;
    PcaResult pca = pca_retain_corr(corr);
    REQUIRE(pca.k == 1, "all-ones correlation retained %d factors", pca.k);
    REQUIRE(std::fabs(pca.eigenvalues[0] - p) < 1e-8, "top eigenvalue %.9f != %d",
            pca.eigenvalues[0], p);

    // same claim through the full fit on perfectly collinear data
    Rng drng(derive_seed(kGateSeed, "accept.rank1", 0));
    int n = 30;
    PhenoTable table;
    for (int i = 0; i < n; ++i) table.subject_ids.push_back(strprintf("s%04d", i));
    std::vector<double> driver(static_cast<size_t>(n));
    for (auto& v : driver) v = drng.normal();
    for (int j = 0; j < p; ++j) table.variable_names.push_back(strprintf("var_%02d", j + 1));
    table.values.resize(static_cast<size_t>(n) * p);
    table.missing.assign(static_cast<size_t>(n) * p, 0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < p; ++j)
        table.values[static_cast<size_t>(i) * p + j] = (j + 1.0) * driver[static_cast<size_t>(i)];
    FactorModel fm = fit_factors(table);
    REQUIRE(fm.k == 1, "collinear table retained %d factors", fm.k);
    REQUIRE(std::fabs(fm.eigenvalues[0] - p) < 1e-8, "collinear top eigenvalue %.9f",
            fm.eigenvalues[0]);
  }
  pass(8, "varimax sweeps monotone; 0.01-degree grid recovery < 1e-6; rank-1 -> 1 factor");
}

// ---------------------------------------------------------------------------
// criterion 9: statistics hand values and bootstrap null calibration

void criterion_9() {
  KwResult kw = kruskal_wallis({1, 2, 3, 4, 5, 6}, {0, 0, 0, 1, 1, 1});
  REQUIRE(std::fabs(kw.h - 27.0 / 7.0) < 1e-6, "H %.9f != 27/7", kw.h);

  FdrResult fdr = bh_fdr({0.01, 0.02, 0.03, 0.5}, 0.05);
  int rejections = 0;
  for (uint8_t r : fdr.reject) rejections += r;
  REQUIRE(rejections == 3, "BH rejected %d of 4", rejections);
  const double expect_q[4] = {0.04, 0.04, 0.04, 0.5};
  for (int i = 0; i < 4; ++i)
    REQUIRE(std::fabs(fdr.q[static_cast<size_t>(i)] - expect_q[i]) < 1e-12, "q[%d] = %.12f", i,
            fdr.q[static_cast<size_t>(i)]);

  // null calibration: 200 independent standard-normal factors, M=1000
  Rng rng(101);
  int n = 60, factors = 200;
  TensorD scores({n, factors});
  for (auto& v : scores.v) v = rng.normal();
  std::vector<int> labels(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) labels[static_cast<size_t>(i)] = i / 20;
  BootstrapConfig bc;
  bc.m_replicates = 1000;
  bc.seed = 102;
  StatReport rep = stratification_stats(scores, labels, bc, 0.05);
  int low = 0;
  for (const StatRow& row : rep.rows)
    if (row.p_bootstrap < 0.05) ++low;
  double frac = low / static_cast<double>(factors);
  REQUIRE(frac >= 0.03 && frac <= 0.07, "null calibration fraction %.4f outside [0.03, 0.07]",
          frac);
  pass(9, "KW H=27/7, BH q=[.04 .04 .04 .5] with 3 rejections, null p<.05 fraction %.3f", frac);
}

// ---------------------------------------------------------------------------
// criterion 10: end-to-end synthetic cohort

RunConfig pipeline_config() {
  RunConfig rc;
  rc.set("seed", "7");
  rc.set("synth.n", "60");
  rc.set("synth.dims", "16x16x8");
  rc.set("synth.groups", "3");
  rc.set("synth.effect", "3");
  rc.set("model.depth", "2");
  rc.set("training.epochs", "40");
  rc.set("metrics.roi", "2x2x2");
  rc.set("clustering.grid", "10x200");
  rc.set("stats.bootstrap_m", "1000");
  return rc;
}

// the planted factor loads on the first n_loaded phenotype variables
int planted_factor(const FactorModel& fm, int n_loaded) {
  int best = 0;
  double best_mass = -1;
  for (int j = 0; j < fm.k; ++j) {
    double mass = 0;
    for (int i = 0; i < n_loaded; ++i)
      mass += std::fabs(fm.loadings[static_cast<int64_t>(i) * fm.k + j]);
    if (mass > best_mass) {
      best_mass = mass;
      best = j;
    }
  }
  return best;
}

void criterion_10(const std::string& out) {
  double t0 = now_s();
  PipelineResult res = run_pipeline(pipeline_config(), out);
  double elapsed = now_s() - t0;

  REQUIRE(res.factors.k >= 1, "no factors retained");
  int sig = 0;
  for (const StatRow& row : res.stats.rows) sig += row.sig_bootstrap ? 1 : 0;
  REQUIRE(sig >= 1, "no factor survives FDR on the surrogate p-values");

  int planted = planted_factor(res.factors, 4);
  const StatRow& row = res.stats.rows[static_cast<size_t>(planted)];
  REQUIRE(row.sig_bootstrap, "planted factor %s not significant (q=%.4f)", row.factor.c_str(),
          row.q_bootstrap);

  int clusters = static_cast<int>(res.profile.cluster_sizes.size());
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int c = 0; c < clusters; ++c) {
    double v = res.profile.log10_quantiles[static_cast<int64_t>(planted) * clusters + c];
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  REQUIRE(hi - lo > 0.3, "profile gap %.3f <= 0.3 on the planted factor", hi - lo);
  REQUIRE(elapsed < 1800.0, "pipeline took %.0fs >= 1800s", elapsed);
  pass(10, "end-to-end: %d/%d factors significant, planted %s gap %.3f, %.0fs", sig,
       res.factors.k, row.factor.c_str(), hi - lo, elapsed);
}

// ---------------------------------------------------------------------------
// criterion 11: reruns of 4, 7, and 10 are byte-identical on CSV/JSON

std::vector<std::string> report_files(const std::string& root) {
  std::vector<std::string> rel;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    if (ext == ".csv" || ext == ".json")
      rel.push_back(std::filesystem::relative(entry.path(), root).string());
  }
  std::sort(rel.begin(), rel.end());
  return rel;
}

int compare_artifacts(const std::string& a, const std::string& b, const char* what) {
  std::vector<std::string> fa = report_files(a), fb = report_files(b);
  REQUIRE(fa == fb, "%s: rerun produced a different artifact set", what);
  REQUIRE(!fa.empty(), "%s: no CSV/JSON artifacts found", what);
  for (const std::string& rel : fa) {
    auto ba = testutil::read_bytes((std::filesystem::path(a) / rel).string());
    auto bb = testutil::read_bytes((std::filesystem::path(b) / rel).string());
    REQUIRE(ba == bb, "%s: %s differs between reruns", what, rel.c_str());
  }
  return static_cast<int>(fa.size());
}

void criterion_11(const std::string& c4a, const std::string& c7a, const std::string& c10a,
                  const std::string& scratch) {
  std::string c4b = scratch + "/overfit-rerun";
  run_overfit(c4b);
  int n4 = compare_artifacts(c4a, c4b, "overfit");

  std::string c7b = scratch + "/cluster-rerun";
  std::filesystem::create_directories(c7b);
  write_blob_embeddings(c7b + "/embeddings.csv");
  stage_cluster(cluster_config(), c7b + "/embeddings.csv", c7b);
  int n7 = compare_artifacts(c7a, c7b, "clustering");

  std::string c10b = scratch + "/pipeline-rerun";
  run_pipeline(pipeline_config(), c10b);
  int n10 = compare_artifacts(c10a, c10b, "pipeline");

  pass(11, "reruns byte-identical: %d overfit, %d clustering, %d pipeline CSV/JSON artifacts",
       n4, n7, n10);
}

}  // namespace

int main() {
  testutil::ScratchDir scratch;
  std::string root = scratch.path().string();
  std::string c4 = root + "/overfit", c5 = root + "/cv", c7 = root + "/cluster";
  std::string c10 = root + "/pipeline";

  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4(c4);
  criterion_5(c5);
  criterion_6();
  criterion_7(c7);
  criterion_8();
  criterion_9();
  criterion_10(c10);
  criterion_11(c4, c7, c10, root);

  std::printf("acceptance: 11/11 criteria hold\n");
  return 0;
}
