// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "fusestrata/synth.hpp"
#include "fusestrata/trainer.hpp"

using namespace fusestrata;

namespace {

// tiny cohort and model for fast loops
ModelConfig tiny_model_cfg(int n_modalities = 2) {
  ModelConfig cfg;
  cfg.n_modalities = n_modalities;
  cfg.nx = 8;
  cfg.ny = 8;
  cfg.nz = 8;
  cfg.depth = 2;
  cfg.base_channels = 2;
  cfg.kernel = 3;
  return cfg;
}

Dataset tiny_dataset(int n_subjects, uint64_t seed) {
  SynthConfig cfg;
  cfg.n_subjects = n_subjects;
  cfg.nx = 8;
  cfg.ny = 8;
  cfg.nz = 8;
  cfg.n_groups = n_subjects > 1 ? 2 : 1;
  cfg.seed = seed;
  return synth_dataset(cfg).dataset;
}

}  // namespace

TEST_CASE("kfold: documented size profile at n=974") {
  auto folds = kfold_split(974, 10, 3);
  REQUIRE(folds.size() == 10);
  std::multiset<size_t> sizes;
  for (const auto& f : folds) sizes.insert(f.test_ids.size());
  CHECK(sizes.count(98) == 4);
  CHECK(sizes.count(97) == 6);
}

TEST_CASE("kfold: test sets partition the population") {
  for (int n : {10, 23, 40}) {
    auto folds = kfold_split(n, 10, 17);
    std::set<int> seen;
    for (const auto& f : folds) {
      for (int id : f.test_ids) {
        CHECK(seen.insert(id).second);  // pairwise disjoint
        CHECK(std::find(f.train_ids.begin(), f.train_ids.end(), id) == f.train_ids.end());
      }
      CHECK(f.train_ids.size() + f.test_ids.size() == static_cast<size_t>(n));
    }
    CHECK(static_cast<int>(seen.size()) == n);
  }
}

TEST_CASE("kfold: seeded determinism and errors") {
  auto a = kfold_split(40, 10, 5);
  auto b = kfold_split(40, 10, 5);
  for (size_t f = 0; f < a.size(); ++f) CHECK(a[f].test_ids == b[f].test_ids);
  auto c = kfold_split(40, 10, 6);
  bool same = true;
  for (size_t f = 0; f < a.size(); ++f)
    if (a[f].test_ids != c[f].test_ids) same = false;
  CHECK_FALSE(same);
  CHECK_THROWS_AS(kfold_split(9, 10, 1), Error);
  CHECK_THROWS_AS(kfold_split(10, 0, 1), Error);
}

TEST_CASE("train: zero learning rate leaves parameters and losses untouched") {
  ModelConfig mcfg = tiny_model_cfg();
  mcfg.dropout_rate = 0.0;  // the loss is then a pure function of the weights
  Dataset ds = tiny_dataset(3, 100);
  FuseModel<float> model(mcfg, 7);
  std::vector<std::vector<float>> before;
  for (const auto& e : model.entries()) before.push_back(e.value.v);

  TrainConfig tcfg;
  tcfg.epochs = 3;
  tcfg.lr = 0.0;
  tcfg.seed = 9;
  auto curve = train(model, ds, tcfg);

  size_t i = 0;
  bool params_unchanged = true;
  for (const auto& e : model.entries()) {
    if (e.trainable && e.value.v != before[i]) params_unchanged = false;
    ++i;
  }
  CHECK(params_unchanged);
  REQUIRE(curve.size() == 3);
  CHECK(curve[1] == curve[0]);
  CHECK(curve[2] == curve[0]);
}

TEST_CASE("train: two runs with one seed agree bit for bit") {
  ModelConfig mcfg = tiny_model_cfg();
  Dataset ds = tiny_dataset(3, 200);
  TrainConfig tcfg;
  tcfg.epochs = 2;
  tcfg.seed = 11;

  FuseModel<float> a(mcfg, 21), b(mcfg, 21);
  auto ca = train(a, ds, tcfg);
  auto cb = train(b, ds, tcfg);
  CHECK(ca == cb);
  for (size_t i = 0; i < a.entries().size(); ++i)
    CHECK(a.entries()[i].value.v == b.entries()[i].value.v);

  FuseModel<float> c(mcfg, 21);
  TrainConfig other = tcfg;
  other.seed = 12;
  auto cc = train(c, ds, other);
  CHECK(cc != ca);  // dropout stream differs
}

TEST_CASE("train: overfitting a single subject burns off the excess loss") {
  ModelConfig mcfg = tiny_model_cfg();
  mcfg.dropout_rate = 0.0;
  Dataset ds = tiny_dataset(1, 300);
  FuseModel<float> model(mcfg, 31);

  // BCE against soft targets bottoms out at the target entropy, so progress
  // is judged on the excess above that floor
  double floor = 0;
  {
    auto inputs = subject_inputs<float>(ds.subjects[0]);
    for (auto& t : inputs) {
      nn::Graph<float> g;
      int a = g.leaf(t);
      floor += g.value(g.bce(a, a))[0];
    }
  }

  TrainConfig tcfg;
  tcfg.epochs = 200;
  tcfg.lr = 2e-3;  // faster than the cohort default on this tiny problem
  tcfg.seed = 32;
  auto curve = train(model, ds, tcfg);
  double excess0 = curve.front() - floor;
  double excess1 = curve.back() - floor;
  CHECK(excess1 < 0.25 * excess0);

  // loss is also non-increasing on 50-epoch windows once past the warmup
  for (size_t e = 60; e < curve.size(); ++e) CHECK(curve[e] <= curve[e - 50]);

  auto recon = model.reconstruct(subject_inputs<float>(ds.subjects[0]));
  for (size_t m = 0; m < recon.size(); ++m) {
    double err = mse(ds.subjects[0].volumes[m], tensor_to_volume(recon[m]));
    CHECK(err < 0.03);
  }
}

TEST_CASE("train: a poisoned weight aborts with a diagnostic") {
  ModelConfig mcfg = tiny_model_cfg();
  Dataset ds = tiny_dataset(2, 400);
  FuseModel<float> model(mcfg, 41);
  for (auto& e : model.entries())
    if (e.name == "fuse.w") e.value[0] = std::numeric_limits<float>::quiet_NaN();
  TrainConfig tcfg;
  tcfg.epochs = 1;
  CHECK_THROWS_WITH_AS(train(model, ds, tcfg), doctest::Contains("non-finite loss"), Error);
}

TEST_CASE("train: setup validation") {
  ModelConfig mcfg = tiny_model_cfg();
  FuseModel<float> model(mcfg, 51);
  TrainConfig tcfg;
  tcfg.epochs = 0;
  Dataset ds = tiny_dataset(2, 500);
  CHECK_THROWS_AS(train(model, ds, tcfg), Error);

  tcfg.epochs = 1;
  Dataset wrong = ds;
  for (auto& s : wrong.subjects) s.volumes.pop_back();
  wrong.modalities.pop_back();
  CHECK_THROWS_WITH_AS(train(model, wrong, tcfg), doctest::Contains("modality count"), Error);
}

TEST_CASE("cross_validate: identity reconstruction scores exactly zero") {
  Dataset ds = tiny_dataset(12, 600);
  ModelConfig mcfg = tiny_model_cfg();
  TrainConfig tcfg;
  tcfg.seed = 61;
  CnrConfig ccfg;
  ccfg.roi_x = 2;
  ccfg.roi_y = 2;
  ccfg.roi_z = 2;
  ccfg.n_pairs = 50;
  ccfg.seed = 62;

  ReconFactory identity = [](const Dataset&, uint64_t) -> ReconFn {
    return [](const SubjectRecord& s) { return s.volumes; };
  };
  CvResult cv = cross_validate(ds, mcfg, tcfg, ccfg, 4, identity);

  REQUIRE(cv.folds.size() == 4);
  int rows = 0;
  for (const auto& fold : cv.folds)
    for (const auto& row : fold.rows) {
      ++rows;
      CHECK(row.mse == 0.0);
      CHECK(row.normdiff == 0.0);
      CHECK(row.cnr_normdiff == 0.0);
      CHECK(row.cnr_real == row.cnr_rec);
    }
  CHECK(rows == 12 * 2);  // every subject x modality appears once

  // identical per-fold medians -> across-fold MAD of 0
  for (const auto& s : cv.summary) {
    CHECK(s.median == 0.0);
    CHECK(s.mad == 0.0);
  }
}

TEST_CASE("cross_validate: trained folds produce finite metrics and a full partition") {
  Dataset ds = tiny_dataset(6, 700);
  ModelConfig mcfg = tiny_model_cfg();
  mcfg.base_channels = 1;
  TrainConfig tcfg;
  tcfg.epochs = 1;
  tcfg.seed = 71;
  CnrConfig ccfg;
  ccfg.roi_x = 2;
  ccfg.roi_y = 2;
  ccfg.roi_z = 2;
  ccfg.n_pairs = 30;
  ccfg.seed = 72;

  CvResult cv = cross_validate(ds, mcfg, tcfg, ccfg, 3);
  std::set<std::string> seen;
  for (const auto& fold : cv.folds)
    for (const auto& row : fold.rows) {
      CHECK(std::isfinite(row.mse));
      CHECK(std::isfinite(row.normdiff));
      CHECK(std::isfinite(row.cnr_normdiff));
      CHECK(row.mse >= 0.0);
      seen.insert(row.subject_id);
    }
  CHECK(seen.size() == 6);
  CHECK(cv.summary.size() == 2 * 3);  // modalities x metrics
}

TEST_CASE("embeddings: row order, determinism, and length") {
  Dataset ds = tiny_dataset(4, 800);
  ModelConfig mcfg = tiny_model_cfg();
  FuseModel<float> model(mcfg, 81);
  TensorF e1 = extract_embeddings(model, ds);
  TensorF e2 = extract_embeddings(model, ds);
  CHECK(e1.v == e2.v);  // idempotent
  REQUIRE(e1.dims == std::vector<int>({4, static_cast<int>(mcfg.embedding_length())}));

  // row order follows subject order: reversing subjects reverses rows
  Dataset rev = ds;
  std::reverse(rev.subjects.begin(), rev.subjects.end());
  TensorF er = extract_embeddings(model, rev);
  int64_t e_len = mcfg.embedding_length();
  for (int s = 0; s < 4; ++s)
    for (int64_t j = 0; j < e_len; ++j)
      CHECK(er[static_cast<int64_t>(s) * e_len + j] == e1[(3 - s) * e_len + j]);

  // duplicated subject -> duplicated row
  Dataset dup = ds;
  dup.subjects[1] = dup.subjects[0];
  dup.subjects[1].subject_id = "copy";
  TensorF ed = extract_embeddings(model, dup);
  for (int64_t j = 0; j < e_len; ++j) CHECK(ed[j] == ed[e_len + j]);
}
