// SPDX-License-Identifier: Apache-2.0
#pragma once

// Training loop (BCE, adaptive-moment updates, batch size 1 by default),
// k-fold cross-validation over reconstruction metrics, and embedding
// extraction for the clustering stages.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "fusestrata/model.hpp"
#include "fusestrata/reconmetrics.hpp"
#include "fusestrata/volume.hpp"

namespace fusestrata {

struct TrainConfig {
  int epochs = 200;
  int batch_size = 1;
  double lr = 1e-4;
  double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  uint64_t seed = 0;
  bool use_double = false;  // train in f64 instead of f32

  void validate() const {
    if (epochs < 1) fail(Errc::validation, "epochs must be >= 1");
    if (batch_size < 1) fail(Errc::validation, "batch_size must be >= 1");
    if (!(lr >= 0)) fail(Errc::validation, "learning rate must be >= 0");
  }
};

struct FoldSplit {
  std::vector<int> train_ids;
  std::vector<int> test_ids;
};

// Shuffled near-equal partition; fold sizes differ by at most one.
std::vector<FoldSplit> kfold_split(int n_subjects, int k, uint64_t seed);

struct MetricRow {
  std::string subject_id;
  int fold = -1;
  std::string modality;
  double mse = 0, normdiff = 0, cnr_real = 0, cnr_rec = 0, cnr_normdiff = 0;
};

struct ModalityMedians {
  std::string modality;
  double mse = 0, normdiff = 0, cnr_normdiff = 0;
};

struct FoldReport {
  int fold = -1;
  std::vector<MetricRow> rows;            // one per held-out subject x modality
  std::vector<ModalityMedians> medians;   // per modality over this fold's rows
};

struct CvSummaryRow {
  std::string modality;
  std::string metric;  // "mse" | "normdiff" | "cnr_normdiff"
  double median = 0;   // median across fold medians
  double mad = 0;      // MAD across fold medians
};

struct CvResult {
  std::vector<FoldReport> folds;
  std::vector<CvSummaryRow> summary;
};

// Reconstruction callback used by cross_validate; the factory receives the
// training split and a per-fold seed, and the returned function maps one
// held-out subject to its per-modality reconstructions.
using ReconFn = std::function<std::vector<Volume>(const SubjectRecord&)>;
using ReconFactory = std::function<ReconFn(const Dataset& train_set, uint64_t fold_seed)>;

CvResult cross_validate(const Dataset& ds, const ModelConfig& mcfg, const TrainConfig& tcfg,
                        const CnrConfig& ccfg, int k, const ReconFactory& factory);
// default factory: train a fresh model on each fold's training split
CvResult cross_validate(const Dataset& ds, const ModelConfig& mcfg, const TrainConfig& tcfg,
                        const CnrConfig& ccfg, int k = 10);

// ---------------------------------------------------------------------------

template <class T>
Tensor<T> volume_to_tensor(const Volume& vol) {
  Tensor<T> t({1, vol.nz, vol.ny, vol.nx});
  for (int64_t i = 0; i < vol.size(); ++i) t[i] = static_cast<T>(vol.v[static_cast<size_t>(i)]);
  return t;
}

template <class T>
Volume tensor_to_volume(const Tensor<T>& t) {
  nn::MapDims d = nn::map_dims(t);
  if (d.c != 1) fail(Errc::validation, "expected a single-channel map");
  Volume vol(d.nx, d.ny, d.nz);
  for (int64_t i = 0; i < t.numel(); ++i) vol.v[static_cast<size_t>(i)] = static_cast<float>(t[i]);
  return vol;
}

template <class T>
std::vector<Tensor<T>> subject_inputs(const SubjectRecord& subject) {
  std::vector<Tensor<T>> inputs;
  inputs.reserve(subject.volumes.size());
  for (const Volume& v : subject.volumes) inputs.push_back(volume_to_tensor<T>(v));
  return inputs;
}

namespace detail {
template <class T>
void check_train_setup(const FuseModel<T>& model, const Dataset& ds) {
  ds.validate();
  if (ds.n_subjects() == 0) fail(Errc::validation, "empty dataset");
  if (ds.n_modalities() != model.config().n_modalities)
    fail(Errc::validation, "dataset modality count does not match the model");
  const Volume& v0 = ds.volume(0, 0);
  if (v0.nx != model.config().nx || v0.ny != model.config().ny || v0.nz != model.config().nz)
    fail(Errc::validation, "dataset volume dims do not match the model");
}

template <class T>
std::string first_bad_tensor(const FuseModel<T>& model) {
  for (const auto& e : model.entries()) {
    for (auto v : e.value.v)
      if (!std::isfinite(static_cast<double>(v))) return e.name;
    for (auto v : e.grad.v)
      if (!std::isfinite(static_cast<double>(v))) return e.name + ".grad";
  }
  return "(loss only)";
}
}  // namespace detail

// One full training run; the model is updated in place and the per-epoch mean
// subject loss is returned. Deterministic in (model seed, cfg.seed).
template <class T>
std::vector<double> train(FuseModel<T>& model, const Dataset& ds, const TrainConfig& cfg) {
  cfg.validate();
  detail::check_train_setup(model, ds);

  auto& entries = model.entries();
  std::vector<Tensor<T>> m1(entries.size()), m2(entries.size());
  for (size_t i = 0; i < entries.size(); ++i) {
    if (!entries[i].trainable) continue;
    m1[i] = Tensor<T>(entries[i].value.dims);
    m2[i] = Tensor<T>(entries[i].value.dims);
  }

  int n = ds.n_subjects();
  int64_t adam_t = 0;
  std::vector<double> curve;
  curve.reserve(static_cast<size_t>(cfg.epochs));

  auto adam_step = [&]() {
    ++adam_t;
    double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(adam_t));
    double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(adam_t));
    for (size_t i = 0; i < entries.size(); ++i) {
      if (!entries[i].trainable) continue;
      Tensor<T>& w = entries[i].value;
      Tensor<T>& g = entries[i].grad;
      if (g.empty()) continue;
      for (int64_t j = 0; j < w.numel(); ++j) {
        double gj = g[j];
        double a = cfg.beta1 * static_cast<double>(m1[i][j]) + (1 - cfg.beta1) * gj;
        double b = cfg.beta2 * static_cast<double>(m2[i][j]) + (1 - cfg.beta2) * gj * gj;
        m1[i][j] = static_cast<T>(a);
        m2[i][j] = static_cast<T>(b);
        double update = cfg.lr * (a / bc1) / (std::sqrt(b / bc2) + cfg.adam_eps);
        w[j] = static_cast<T>(static_cast<double>(w[j]) - update);
      }
    }
  };

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng dropout_rng(derive_seed(cfg.seed, "train.dropout", static_cast<uint64_t>(epoch)));
    double epoch_loss = 0;
    int in_batch = 0;
    model.zero_grads();
    for (int s = 0; s < n; ++s) {
      auto inputs = subject_inputs<T>(ds.subjects[static_cast<size_t>(s)]);
      auto r = model.forward_graph(inputs, FuseModel<T>::Mode::kTrain, true, &dropout_rng, true);
      double loss = static_cast<double>(r.graph.value(r.loss_id)[0]);
      if (!std::isfinite(loss))
        fail(Errc::numeric,
             strprintf("non-finite loss at epoch %d step %d subject %s (first bad tensor: %s)",
                       epoch, s, ds.subjects[static_cast<size_t>(s)].subject_id.c_str(),
                       detail::first_bad_tensor(model).c_str()));
      epoch_loss += loss;
      r.graph.backward(r.loss_id);
      model.collect_grads(r);
      if (++in_batch == cfg.batch_size || s == n - 1) {
        adam_step();
        model.zero_grads();
        in_batch = 0;
      }
    }
    curve.push_back(epoch_loss / n);
  }
  return curve;
}

// Inference embeddings, one row per subject in dataset order.
template <class T>
Tensor<T> extract_embeddings(const FuseModel<T>& model, const Dataset& ds) {
  detail::check_train_setup(model, ds);
  int n = ds.n_subjects();
  int e_len = static_cast<int>(model.config().embedding_length());
  Tensor<T> out({n, e_len});
  for (int s = 0; s < n; ++s) {
    Tensor<T> row = model.embed(subject_inputs<T>(ds.subjects[static_cast<size_t>(s)]));
    std::copy(row.v.begin(), row.v.end(), out.v.begin() + static_cast<int64_t>(s) * e_len);
  }
  return out;
}

}  // namespace fusestrata
