// SPDX-License-Identifier: Apache-2.0
//
// Python face of the pipeline. Two layers: config-driven stage wrappers that
// mirror the command-line subcommands (paths in, artifacts out), and direct
// numpy bindings for the numeric core so the statistical pieces can be used
// on in-memory arrays without touching disk.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fusestrata/apcluster.hpp"
#include "fusestrata/factors.hpp"
#include "fusestrata/pipeline.hpp"
#include "fusestrata/rng.hpp"
#include "fusestrata/stratstats.hpp"

namespace py = pybind11;
using namespace fusestrata;

namespace {

py::array_t<double> to_numpy(const TensorD& t) {
  std::vector<py::ssize_t> shape(t.dims.begin(), t.dims.end());
  if (shape.empty()) shape.push_back(0);
  py::array_t<double> out(shape);
  std::copy(t.v.begin(), t.v.end(), out.mutable_data());
  return out;
}

TensorD to_tensor(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  TensorD t;
  t.dims.assign(a.shape(), a.shape() + a.ndim());
  t.v.assign(a.data(), a.data() + a.size());
  return t;
}

TensorD to_matrix(const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
                  const char* what) {
  if (a.ndim() != 2) fail(Errc::validation, strprintf("%s must be a 2-d array", what));
  return to_tensor(a);
}

// dict of str -> value gives one RunConfig; values are stringified the same
// way the command line would pass them, so validation and precedence match.
RunConfig make_config(const py::dict& cfg) {
  RunConfig rc;
  for (auto item : cfg)
    rc.set(py::cast<std::string>(py::str(item.first)), py::cast<std::string>(py::str(item.second)));
  return rc;
}

py::dict cluster_dict(const ClusterResult& r) {
  py::dict d;
  d["labels"] = r.labels;
  d["exemplar_of"] = r.exemplar_of;
  d["n_clusters"] = r.n_clusters;
  d["damping"] = r.damping;
  d["preference"] = r.preference;
  d["iterations"] = r.iterations;
  d["converged"] = r.converged;
  d["silhouette"] = r.silhouette_score;
  return d;
}

py::dict grid_dict(const GridResult& g) {
  py::dict d;
  d["best"] = cluster_dict(g.best);
  py::list cells;
  for (const GridCell& c : g.table) {
    py::dict e;
    e["damping"] = c.damping;
    e["preference"] = c.preference;
    e["n_clusters"] = c.n_clusters;
    e["converged"] = c.converged;
    e["eligible"] = c.eligible;
    e["silhouette"] = c.silhouette_score;
    cells.append(e);
  }
  d["table"] = cells;
  return d;
}

py::dict factor_dict(const FactorModel& fm) {
  py::dict d;
  d["variable_names"] = fm.variable_names;
  d["k"] = fm.k;
  d["eigenvalues"] = fm.eigenvalues;
  d["explained_variance"] = fm.explained_variance;
  d["loadings"] = to_numpy(fm.loadings);
  d["rotation"] = to_numpy(fm.rotation);
  d["scores"] = to_numpy(fm.scores);
  return d;
}

py::dict stats_dict(const StatReport& rep) {
  py::dict d;
  py::list rows;
  for (const StatRow& r : rep.rows) {
    py::dict e;
    e["factor"] = r.factor;
    e["h"] = r.h;
    e["df"] = r.df;
    e["p_asymptotic"] = r.p_asymptotic;
    e["q_asymptotic"] = r.q_asymptotic;
    e["sig_asymptotic"] = r.sig_asymptotic;
    e["p_bootstrap"] = r.p_bootstrap;
    e["p_bootstrap_smoothed"] = r.p_bootstrap_smoothed;
    e["q_bootstrap"] = r.q_bootstrap;
    e["sig_bootstrap"] = r.sig_bootstrap;
    e["degenerate"] = r.degenerate;
    rows.append(e);
  }
  d["rows"] = rows;
  d["alpha"] = rep.alpha;
  d["m_replicates"] = rep.m_replicates;
  d["with_replacement"] = rep.with_replacement;
  d["seed"] = rep.seed;
  d["warnings"] = rep.warnings;
  return d;
}

py::dict profile_dict(const ProfileMatrix& pm) {
  py::dict d;
  d["factor_names"] = pm.factor_names;
  d["cluster_sizes"] = pm.cluster_sizes;
  d["quantiles"] = to_numpy(pm.quantiles);
  d["log10_quantiles"] = to_numpy(pm.log10_quantiles);
  return d;
}

py::list rows_to_list(const std::vector<MetricRow>& rows) {
  py::list out;
  for (const MetricRow& r : rows) {
    py::dict e;
    e["subject_id"] = r.subject_id;
    e["fold"] = r.fold;
    e["modality"] = r.modality;
    e["mse"] = r.mse;
    e["normdiff"] = r.normdiff;
    e["cnr_real"] = r.cnr_real;
    e["cnr_rec"] = r.cnr_rec;
    e["cnr_normdiff"] = r.cnr_normdiff;
    out.append(e);
  }
  return out;
}

// NaN cells become masked entries; everything else is observed.
PhenoTable table_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
                            const std::vector<std::string>* names) {
  if (a.ndim() != 2) fail(Errc::validation, "phenotype values must be a 2-d array");
  PhenoTable t;
  int n = static_cast<int>(a.shape(0)), p = static_cast<int>(a.shape(1));
  for (int i = 0; i < n; ++i) t.subject_ids.push_back(strprintf("s%04d", i));
  if (names) {
    if (static_cast<int>(names->size()) != p)
      fail(Errc::validation, "variable_names length must match column count");
    t.variable_names = *names;
  } else {
    for (int j = 0; j < p; ++j) t.variable_names.push_back(strprintf("var_%02d", j + 1));
  }
  t.values.assign(a.data(), a.data() + a.size());
  t.missing.assign(t.values.size(), 0);
  for (size_t i = 0; i < t.values.size(); ++i)
    if (std::isnan(t.values[i])) {
      t.values[i] = 0;
      t.missing[i] = 1;
    }
  return t;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "multimodal volume fusion and stratification core";

  py::register_exception<Error>(m, "PipelineError");

  // -- config-driven stages, path in / artifacts out ------------------------

  m.def(
      "synth",
      [](const py::dict& cfg, const std::string& out_dir) {
        SynthResult r = stage_synth(make_config(cfg), out_dir);
        py::dict d;
        d["labels"] = r.labels;
        d["subject_ids"] = [&] {
          std::vector<std::string> ids;
          for (const auto& s : r.dataset.subjects) ids.push_back(s.subject_id);
          return ids;
        }();
        return d;
      },
      py::arg("config"), py::arg("out_dir"),
      "Generate a synthetic cohort under out_dir (volumes, manifest, phenotypes, labels).");

  m.def(
      "train",
      [](const py::dict& cfg, const std::string& dataset_dir, const std::string& out_dir) {
        return stage_train(make_config(cfg), dataset_dir, out_dir);
      },
      py::arg("config"), py::arg("dataset_dir"), py::arg("out_dir"),
      "Train on a dataset directory; returns the per-epoch loss curve and writes model.ckpt.");

  m.def(
      "embed",
      [](const py::dict& cfg, const std::string& dataset_dir, const std::string& checkpoint,
         const std::string& out_dir) {
        EmbeddingTable t = stage_embed(make_config(cfg), dataset_dir, checkpoint, out_dir);
        return py::make_tuple(t.subject_ids, to_numpy(t.values));
      },
      py::arg("config"), py::arg("dataset_dir"), py::arg("checkpoint"), py::arg("out_dir"),
      "Extract fused embeddings for every subject; returns (subject_ids, n x e array).");

  m.def(
      "metrics",
      [](const py::dict& cfg, const std::string& dataset_dir, const std::string& checkpoint,
         const std::string& out_dir) {
        return rows_to_list(stage_metrics(make_config(cfg), dataset_dir, checkpoint, out_dir));
      },
      py::arg("config"), py::arg("dataset_dir"), py::arg("checkpoint"), py::arg("out_dir"),
      "Reconstruction metrics per subject and modality.");

  m.def(
      "cross_validate",
      [](const py::dict& cfg, const std::string& dataset_dir, const std::string& out_dir) {
        CvResult r = stage_cv(make_config(cfg), dataset_dir, out_dir);
        py::list summary;
        for (const CvSummaryRow& s : r.summary) {
          py::dict e;
          e["modality"] = s.modality;
          e["metric"] = s.metric;
          e["median"] = s.median;
          e["mad"] = s.mad;
          summary.append(e);
        }
        py::dict d;
        d["n_folds"] = static_cast<int>(r.folds.size());
        d["summary"] = summary;
        return d;
      },
      py::arg("config"), py::arg("dataset_dir"), py::arg("out_dir"),
      "K-fold cross-validation with per-fold metric reports.");

  m.def(
      "cluster",
      [](const py::dict& cfg, const std::string& embeddings_csv, const std::string& out_dir) {
        return grid_dict(stage_cluster(make_config(cfg), embeddings_csv, out_dir));
      },
      py::arg("config"), py::arg("embeddings_csv"), py::arg("out_dir"),
      "Damping x preference grid search over affinity propagation.");

  m.def(
      "factors",
      [](const py::dict& cfg, const std::string& phenotypes_csv, const std::string& out_dir) {
        return factor_dict(stage_factors(make_config(cfg), phenotypes_csv, out_dir));
      },
      py::arg("config"), py::arg("phenotypes_csv"), py::arg("out_dir"),
      "Phenotype factor extraction (correlation PCA, Kaiser retention, Varimax, scores).");

  m.def(
      "stats",
      [](const py::dict& cfg, const std::string& scores_csv, const std::string& labels_csv,
         const std::string& out_dir) {
        return stats_dict(stage_stats(make_config(cfg), scores_csv, labels_csv, out_dir));
      },
      py::arg("config"), py::arg("scores_csv"), py::arg("labels_csv"), py::arg("out_dir"),
      "Cluster-vs-factor Kruskal-Wallis tests with bootstrap null and FDR control.");

  m.def(
      "profile",
      [](const py::dict& cfg, const std::string& scores_csv, const std::string& labels_csv,
         const std::string& out_dir) {
        return profile_dict(stage_profile(make_config(cfg), scores_csv, labels_csv, out_dir));
      },
      py::arg("config"), py::arg("scores_csv"), py::arg("labels_csv"), py::arg("out_dir"),
      "Rank-quantile cluster profile matrix.");

  m.def(
      "pipeline",
      [](const py::dict& cfg, const std::string& out_dir) {
        PipelineResult r = run_pipeline(make_config(cfg), out_dir);
        py::dict d;
        d["planted_labels"] = r.planted_labels;
        d["cluster"] = cluster_dict(r.grid.best);
        d["factors"] = factor_dict(r.factors);
        d["stats"] = stats_dict(r.stats);
        d["profile"] = profile_dict(r.profile);
        return d;
      },
      py::arg("config"), py::arg("out_dir"),
      "Full chain: synth, train, embed, cluster, factors, stats, profile.");

  m.def("params", &params_text, py::arg("channels") = 32, py::arg("kernel") = 5,
        "Mid-flow residual block parameter arithmetic as printed by the CLI.");

  m.def(
      "model_geometry",
      [](const py::dict& cfg) {
        ModelConfig mc = make_config(cfg).model_config();
        py::dict d;
        d["dims"] = py::make_tuple(mc.nx, mc.ny, mc.nz);
        d["depth"] = mc.depth;
        d["base_channels"] = mc.base_channels;
        d["bottleneck_channels"] = mc.bottleneck_channels();
        d["n_modalities"] = mc.n_modalities;
        d["bottleneck"] = py::make_tuple(mc.bx(), mc.by(), mc.bz(), mc.embed_channels());
        d["embedding_length"] = mc.embedding_length();
        return d;
      },
      py::arg("config") = py::dict(),
      "Bottleneck and embedding geometry implied by a configuration.");

  m.def("derive_seed", &derive_seed, py::arg("master"), py::arg("tag"), py::arg("index") = 0,
        "Deterministic per-purpose seed stream.");

  // -- in-memory numeric core ----------------------------------------------

  m.def(
      "kruskal_wallis",
      [](const std::vector<double>& values, const std::vector<int>& groups) {
        KwResult r = kruskal_wallis(values, groups);
        py::dict d;
        d["h"] = r.h;
        d["df"] = r.df;
        d["p"] = r.p;
        d["all_tied"] = r.all_tied;
        return d;
      },
      py::arg("values"), py::arg("groups"),
      "Mid-rank Kruskal-Wallis with tie correction.");

  m.def(
      "bh_fdr",
      [](const std::vector<double>& pvals, double alpha) {
        FdrResult r = bh_fdr(pvals, alpha);
        std::vector<bool> rej(r.reject.begin(), r.reject.end());
        return py::make_tuple(r.q, rej);
      },
      py::arg("pvals"), py::arg("alpha") = 0.05,
      "Benjamini-Hochberg step-up; returns (q_values, reject_flags).");

  m.def(
      "stratification_stats",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& scores,
         const std::vector<int>& labels, int m_replicates, uint64_t seed, bool with_replacement,
         double alpha, const std::optional<std::vector<std::string>>& names) {
        BootstrapConfig bc;
        bc.m_replicates = m_replicates;
        bc.seed = seed;
        bc.with_replacement = with_replacement;
        return stats_dict(stratification_stats(to_matrix(scores, "scores"), labels, bc, alpha,
                                               names ? &*names : nullptr));
      },
      py::arg("scores"), py::arg("labels"), py::arg("m_replicates") = 10000, py::arg("seed") = 0,
      py::arg("with_replacement") = false, py::arg("alpha") = 0.05,
      py::arg("factor_names") = py::none(),
      "Per-factor Kruskal-Wallis against cluster labels with bootstrap null and FDR.");

  m.def(
      "cluster_profiles",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& scores,
         const std::vector<int>& labels, const std::optional<std::vector<std::string>>& names) {
        return profile_dict(
            cluster_profiles(to_matrix(scores, "scores"), labels, names ? &*names : nullptr));
      },
      py::arg("scores"), py::arg("labels"), py::arg("factor_names") = py::none(),
      "Rank-quantile profile matrix from in-memory scores.");

  m.def(
      "fit_factors",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& values,
         const std::optional<std::vector<std::string>>& names, int varimax_max_iter,
         double varimax_tol) {
        PhenoTable t = table_from_array(values, names ? &*names : nullptr);
        return factor_dict(fit_factors(t, varimax_max_iter, varimax_tol));
      },
      py::arg("values"), py::arg("variable_names") = py::none(),
      py::arg("varimax_max_iter") = 500, py::arg("varimax_tol") = 1e-8,
      "Factor model from an n x p array; NaN cells are treated as missing.");

  m.def(
      "varimax",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& loadings,
         int max_iter, double tol, bool kaiser_normalize) {
        VarimaxResult r = varimax(to_matrix(loadings, "loadings"), max_iter, tol, kaiser_normalize);
        py::dict d;
        d["rotated"] = to_numpy(r.rotated);
        d["rotation"] = to_numpy(r.rotation);
        d["sweeps"] = r.sweeps;
        d["criterion"] = r.criterion;
        return d;
      },
      py::arg("loadings"), py::arg("max_iter") = 500, py::arg("tol") = 1e-8,
      py::arg("kaiser_normalize") = true, "Varimax rotation by pairwise planar sweeps.");

  m.def(
      "varimax_criterion",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& loadings,
         bool kaiser_normalize) {
        return varimax_criterion(to_matrix(loadings, "loadings"), kaiser_normalize);
      },
      py::arg("loadings"), py::arg("kaiser_normalize") = true,
      "The quantity Varimax maximizes.");

  m.def(
      "similarity_matrix",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& points) {
        return to_numpy(similarity_matrix(to_matrix(points, "points")));
      },
      py::arg("points"), "Negative squared Euclidean similarities, zero diagonal.");

  m.def(
      "affinity_propagation",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& similarities,
         double preference, double damping, int max_iter, int convergence_window) {
        return cluster_dict(affinity_propagation(to_matrix(similarities, "similarities"),
                                                 preference, damping, max_iter,
                                                 convergence_window));
      },
      py::arg("similarities"), py::arg("preference"), py::arg("damping") = 0.5,
      py::arg("max_iter") = 1000, py::arg("convergence_window") = 50,
      "Affinity propagation on a precomputed similarity matrix.");

  m.def(
      "grid_search",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& points,
         int n_damping, int n_preference, int max_iter, int convergence_window, double pref_lo_pct,
         double pref_hi_pct) {
        GridConfig gc;
        gc.n_damping = n_damping;
        gc.n_preference = n_preference;
        gc.max_iter = max_iter;
        gc.convergence_window = convergence_window;
        gc.pref_lo_pct = pref_lo_pct;
        gc.pref_hi_pct = pref_hi_pct;
        return grid_dict(grid_search(to_matrix(points, "points"), gc));
      },
      py::arg("points"), py::arg("n_damping") = 10, py::arg("n_preference") = 1000,
      py::arg("max_iter") = 1000, py::arg("convergence_window") = 50, py::arg("pref_lo_pct") = 1.0,
      py::arg("pref_hi_pct") = 99.0,
      "Silhouette-selected damping x preference grid search.");

  m.def(
      "silhouette",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& points,
         const std::vector<int>& labels) {
        return silhouette(to_matrix(points, "points"), labels);
      },
      py::arg("points"), py::arg("labels"), "Mean silhouette over points.");

  m.def("adjusted_rand_index", &adjusted_rand_index, py::arg("a"), py::arg("b"),
        "Chance-adjusted agreement between two labelings.");

  m.def("normdiff_scalar", &normdiff_scalar, py::arg("real_value"), py::arg("rec_value"),
        "(rec - real)/(rec + real) with 0/0 := 0.");
}
