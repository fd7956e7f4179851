// SPDX-License-Identifier: Apache-2.0
#include "fusestrata/trainer.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <numeric>

namespace fusestrata {

std::vector<FoldSplit> kfold_split(int n_subjects, int k, uint64_t seed) {
  if (k < 1) fail(Errc::validation, "k must be >= 1");
  if (n_subjects < k)
    fail(Errc::validation, strprintf("cannot split %d subjects into %d folds", n_subjects, k));
  std::vector<int> perm(static_cast<size_t>(n_subjects));
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(derive_seed(seed, "kfold", 0));
  rng.shuffle(perm);

  std::vector<FoldSplit> folds(static_cast<size_t>(k));
  int base = n_subjects / k, extra = n_subjects % k;
  int pos = 0;
  for (int f = 0; f < k; ++f) {
    int len = base + (f < extra ? 1 : 0);
    auto& fold = folds[static_cast<size_t>(f)];
    fold.test_ids.assign(perm.begin() + pos, perm.begin() + pos + len);
    pos += len;
    std::sort(fold.test_ids.begin(), fold.test_ids.end());
  }
  for (int f = 0; f < k; ++f) {
    auto& fold = folds[static_cast<size_t>(f)];
    size_t t = 0;
    for (int i = 0; i < n_subjects; ++i) {
      if (t < fold.test_ids.size() && fold.test_ids[t] == i) {
        ++t;
        continue;
      }
      fold.train_ids.push_back(i);
    }
  }
  return folds;
}

namespace {

Dataset subset(const Dataset& ds, const std::vector<int>& ids) {
  Dataset out;
  out.modalities = ds.modalities;
  for (int id : ids) out.subjects.push_back(ds.subjects[static_cast<size_t>(id)]);
  return out;
}

double median_field(const std::vector<MetricRow>& rows, const std::string& modality,
                    double MetricRow::* field) {
  std::vector<double> vals;
  for (const auto& r : rows)
    if (r.modality == modality) vals.push_back(r.*field);
  return median(vals);
}

}  // namespace

CvResult cross_validate(const Dataset& ds, const ModelConfig& mcfg, const TrainConfig& tcfg,
                        const CnrConfig& ccfg, int k, const ReconFactory& factory) {
  ds.validate();
  mcfg.validate();
  tcfg.validate();
  auto splits = kfold_split(ds.n_subjects(), k, tcfg.seed);

  CvResult result;
  for (int f = 0; f < k; ++f) {
    Dataset train_set = subset(ds, splits[static_cast<size_t>(f)].train_ids);
    uint64_t fold_seed = derive_seed(tcfg.seed, "cv.fold", static_cast<uint64_t>(f));
    ReconFn reconstruct = factory(train_set, fold_seed);

    FoldReport report;
    report.fold = f;
    for (int id : splits[static_cast<size_t>(f)].test_ids) {
      const SubjectRecord& subject = ds.subjects[static_cast<size_t>(id)];
      std::vector<Volume> recon = reconstruct(subject);
      if (recon.size() != subject.volumes.size())
        fail(Errc::validation, "reconstruction returned wrong modality count");
      for (size_t m = 0; m < recon.size(); ++m) {
        MetricRow row;
        row.subject_id = subject.subject_id;
        row.fold = f;
        row.modality = ds.modalities[m];
        const Volume& real = subject.volumes[m];
        row.mse = mse(real, recon[m]);
        row.normdiff = normdiff_median(real, recon[m]);
        CnrMedians cnrs = cnr_medians(real, recon[m], ccfg);
        row.cnr_real = cnrs.real_median;
        row.cnr_rec = cnrs.rec_median;
        row.cnr_normdiff = normdiff_scalar(cnrs.real_median, cnrs.rec_median);
        report.rows.push_back(std::move(row));
      }
    }
    for (const auto& mod : ds.modalities) {
      ModalityMedians med;
      med.modality = mod;
      med.mse = median_field(report.rows, mod, &MetricRow::mse);
      med.normdiff = median_field(report.rows, mod, &MetricRow::normdiff);
      med.cnr_normdiff = median_field(report.rows, mod, &MetricRow::cnr_normdiff);
      report.medians.push_back(med);
    }
    result.folds.push_back(std::move(report));
  }

  for (const auto& mod : ds.modalities) {
    struct Probe {
      const char* name;
      double ModalityMedians::* field;
    };
    for (Probe p : {Probe{"mse", &ModalityMedians::mse}, Probe{"normdiff", &ModalityMedians::normdiff},
                    Probe{"cnr_normdiff", &ModalityMedians::cnr_normdiff}}) {
      std::vector<double> vals;
      for (const auto& fold : result.folds)
        for (const auto& med : fold.medians)
          if (med.modality == mod) vals.push_back(med.*p.field);
      CvSummaryRow row;
      row.modality = mod;
      row.metric = p.name;
      row.median = median(vals);
      row.mad = mad(vals);
      result.summary.push_back(std::move(row));
    }
  }
  return result;
}

CvResult cross_validate(const Dataset& ds, const ModelConfig& mcfg, const TrainConfig& tcfg,
                        const CnrConfig& ccfg, int k) {
  ReconFactory factory = [&mcfg, &tcfg](const Dataset& train_set, uint64_t fold_seed) -> ReconFn {
    auto model = std::make_shared<FuseModel<float>>(mcfg, fold_seed);
    TrainConfig fold_cfg = tcfg;
    fold_cfg.seed = fold_seed;
    train(*model, train_set, fold_cfg);
    return [model](const SubjectRecord& subject) {
      auto recon = model->reconstruct(subject_inputs<float>(subject));
      std::vector<Volume> out;
      out.reserve(recon.size());
      for (const auto& t : recon) out.push_back(tensor_to_volume(t));
      return out;
    };
  };
  return cross_validate(ds, mcfg, tcfg, ccfg, k, factory);
}

}  // namespace fusestrata
