// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Subcommands map one-to-one onto the pipeline
// stages; a key=value config file provides defaults and flags override it.

#include <CLI11.hpp>

#include <deque>
#include <iostream>
#include <string>
#include <tuple>
#include <vector>

#include "fusestrata/pipeline.hpp"

namespace {

using fusestrata::Errc;
using fusestrata::Error;
using fusestrata::RunConfig;

// collects flag values and replays the ones actually given onto a RunConfig,
// so file settings survive unless a flag overrides them
struct Overrides {
  std::deque<std::string> storage;
  std::vector<std::tuple<CLI::Option*, std::string, std::string*>> opts;
  std::vector<std::pair<CLI::Option*, std::string>> flags;

  CLI::Option* add(CLI::App* sub, const std::string& flag, const std::string& key,
                   const std::string& help) {
    storage.emplace_back();
    CLI::Option* opt = sub->add_option(flag, storage.back(), help);
    opts.emplace_back(opt, key, &storage.back());
    return opt;
  }
  CLI::Option* add_flag(CLI::App* sub, const std::string& flag, const std::string& key,
                        const std::string& help) {
    CLI::Option* opt = sub->add_flag(flag, help);
    flags.emplace_back(opt, key);
    return opt;
  }
  void apply(RunConfig& rc) const {
    for (const auto& [opt, key, value] : opts)
      if (opt->count() > 0) rc.set(key, *value);
    for (const auto& [opt, key] : flags)
      if (opt->count() > 0) rc.set(key, "true");
  }
};

void add_model_flags(CLI::App* sub, Overrides& ov) {
  ov.add(sub, "--dims", "model.dims", "volume dims XxYxZ (default: taken from the dataset)");
  ov.add(sub, "--depth", "model.depth", "encoder depth (pool levels)");
  ov.add(sub, "--channels", "model.channels", "base channel count at the first level");
  ov.add(sub, "--kernel", "model.kernel", "conv kernel size (odd)");
  ov.add(sub, "--dropout", "model.dropout", "dropout rate in [0,1)");
  ov.add(sub, "--modalities", "model.modalities", "number of input modalities");
  ov.add(sub, "--epochs", "training.epochs", "training epochs");
  ov.add(sub, "--lr", "training.lr", "Adam learning rate");
  ov.add(sub, "--batch", "training.batch", "batch size");
  ov.add_flag(sub, "--f64", "training.f64", "train in double precision");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fusestrata: multimodal volume autoencoder stratification pipeline"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  app.add_option("--config", config_path, "key=value config file with [section] headers");
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  Overrides global;
  global.add(&app, "--seed", "seed", "master seed; every random stream derives from it");
  global.add(&app, "--threads", "threads", "worker cap (FUSESTRATA_THREADS as fallback)");

  Overrides ov;

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic multimodal cohort");
  synth->fallthrough();
  ov.add(synth, "--n", "synth.n", "number of subjects");
  ov.add(synth, "--dims", "synth.dims", "volume dims XxYxZ");
  ov.add(synth, "--groups", "synth.groups", "number of planted groups");
  ov.add(synth, "--effect", "synth.effect", "planted group effect size");
  ov.add(synth, "--phenotypes", "synth.phenotypes", "phenotype variable count");
  ov.add(synth, "--loaded", "synth.loaded", "phenotypes that track group identity");

  std::string data_dir, model_path, embeddings_csv, pheno_csv, scores_csv, labels_csv;

  CLI::App* train = app.add_subcommand("train", "train the autoencoder on a dataset");
  train->fallthrough();
  train->add_option("--data", data_dir, "dataset directory or manifest")->required();
  add_model_flags(train, ov);

  CLI::App* cv = app.add_subcommand("cv", "k-fold cross-validated reconstruction metrics");
  cv->fallthrough();
  cv->add_option("--data", data_dir, "dataset directory or manifest")->required();
  add_model_flags(cv, ov);
  ov.add(cv, "--k", "training.folds", "number of folds");
  ov.add(cv, "--roi", "metrics.roi", "CNR ROI dims XxYxZ");
  ov.add(cv, "--pairs", "metrics.pairs", "CNR ROI pair sample size");

  CLI::App* embed = app.add_subcommand("embed", "extract fused embeddings with a checkpoint");
  embed->fallthrough();
  embed->add_option("--data", data_dir, "dataset directory or manifest")->required();
  embed->add_option("--model", model_path, "checkpoint file")->required();
  ov.add_flag(embed, "--f64", "training.f64", "checkpoint was trained in double precision");

  CLI::App* metrics = app.add_subcommand("metrics", "reconstruction metrics for a checkpoint");
  metrics->fallthrough();
  metrics->add_option("--data", data_dir, "dataset directory or manifest")->required();
  metrics->add_option("--model", model_path, "checkpoint file")->required();
  ov.add(metrics, "--roi", "metrics.roi", "CNR ROI dims XxYxZ");
  ov.add(metrics, "--pairs", "metrics.pairs", "CNR ROI pair sample size");
  ov.add(metrics, "--background", "metrics.background", "background intensity threshold");
  ov.add_flag(metrics, "--f64", "training.f64", "checkpoint was trained in double precision");

  CLI::App* cluster = app.add_subcommand("cluster", "affinity propagation over a damping x preference grid");
  cluster->fallthrough();
  cluster->add_option("--embeddings", embeddings_csv, "embeddings CSV")->required();
  ov.add(cluster, "--grid", "clustering.grid", "grid sizes as DAMPINGxPREFERENCE, e.g. 10x1000");

  CLI::App* factors = app.add_subcommand("factors", "factor analysis of a phenotype table");
  factors->fallthrough();
  factors->add_option("--pheno", pheno_csv, "phenotype CSV")->required();
  ov.add(factors, "--threshold", "factor.threshold", "absolute loading display threshold");

  CLI::App* stats = app.add_subcommand("stats", "stratification tests of factor scores against clusters");
  stats->fallthrough();
  stats->add_option("--scores", scores_csv, "factor scores CSV")->required();
  stats->add_option("--labels", labels_csv, "cluster labels CSV")->required();
  ov.add(stats, "--bootstrap-m", "stats.bootstrap_m", "surrogate replicate count");
  ov.add_flag(stats, "--replacement", "stats.replacement", "resample subjects with replacement");
  ov.add(stats, "--alpha", "stats.alpha", "significance level");

  CLI::App* profile = app.add_subcommand("profile", "cluster quantile profiles of factor scores");
  profile->fallthrough();
  profile->add_option("--scores", scores_csv, "factor scores CSV")->required();
  profile->add_option("--labels", labels_csv, "cluster labels CSV")->required();

  int params_channels = 32, params_kernel = 5;
  CLI::App* params = app.add_subcommand("params", "mid-flow parameter count comparison");
  params->add_option("--channels", params_channels, "mid-flow channel count")
      ->capture_default_str();
  params->add_option("--kernel", params_kernel, "conv kernel size")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << "\n";
    return 1;
  }

  try {
    if (params->parsed()) {
      std::cout << fusestrata::params_text(params_channels, params_kernel);
      return 0;
    }

    RunConfig rc;
    if (!config_path.empty()) rc = fusestrata::load_run_config(config_path);
    global.apply(rc);
    ov.apply(rc);

    if (synth->parsed()) {
      fusestrata::SynthResult res = fusestrata::stage_synth(rc, out_dir);
      std::cout << "wrote " << out_dir << "/dataset with " << res.dataset.n_subjects()
                << " subjects, " << res.phenotypes.p() << " phenotype variables\n";
    } else if (train->parsed()) {
      std::vector<double> curve = fusestrata::stage_train(rc, data_dir, out_dir);
      std::cout << "trained " << curve.size() << " epochs, final loss "
                << fusestrata::strprintf("%.6g", curve.back()) << "; wrote " << out_dir
                << "/model.ckpt\n";
    } else if (cv->parsed()) {
      fusestrata::CvResult result = fusestrata::stage_cv(rc, data_dir, out_dir);
      for (const auto& row : result.summary)
        std::cout << row.modality << " " << row.metric << ": median "
                  << fusestrata::strprintf("%.6g", row.median) << ", MAD "
                  << fusestrata::strprintf("%.6g", row.mad) << "\n";
      std::cout << "wrote CV reports under " << out_dir << "\n";
    } else if (embed->parsed()) {
      fusestrata::EmbeddingTable table =
          fusestrata::stage_embed(rc, data_dir, model_path, out_dir);
      std::cout << "wrote " << out_dir << "/embeddings.csv (" << table.subject_ids.size()
                << " x " << table.values.dims[1] << ")\n";
    } else if (metrics->parsed()) {
      auto rows = fusestrata::stage_metrics(rc, data_dir, model_path, out_dir);
      std::cout << "wrote " << out_dir << "/metrics.csv (" << rows.size() << " rows)\n";
    } else if (cluster->parsed()) {
      fusestrata::GridResult grid = fusestrata::stage_cluster(rc, embeddings_csv, out_dir);
      std::cout << "selected " << grid.best.n_clusters << " clusters (damping "
                << fusestrata::strprintf("%.6g", grid.best.damping) << ", preference "
                << fusestrata::strprintf("%.6g", grid.best.preference) << ", silhouette "
                << fusestrata::strprintf("%.6g", grid.best.silhouette_score) << ")\n";
    } else if (factors->parsed()) {
      fusestrata::FactorModel fm = fusestrata::stage_factors(rc, pheno_csv, out_dir);
      std::cout << "retained " << fm.k << " factors, explained variance "
                << fusestrata::strprintf("%.6g", fm.explained_variance) << "\n";
    } else if (stats->parsed()) {
      fusestrata::StatReport report = fusestrata::stage_stats(rc, scores_csv, labels_csv, out_dir);
      int sig = 0;
      for (const auto& row : report.rows) sig += row.sig_bootstrap ? 1 : 0;
      std::cout << report.rows.size() << " factors tested, " << sig
                << " significant after FDR; wrote " << out_dir << "/stats.csv\n";
      for (const std::string& w : report.warnings) std::cerr << "warning: " << w << "\n";
    } else if (profile->parsed()) {
      fusestrata::ProfileMatrix prof =
          fusestrata::stage_profile(rc, scores_csv, labels_csv, out_dir);
      std::cout << "wrote profile for " << prof.factor_names.size() << " factors x "
                << prof.cluster_sizes.size() << " clusters\n";
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return (e.code() == Errc::validation || e.code() == Errc::parse) ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
