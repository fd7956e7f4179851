// SPDX-License-Identifier: Apache-2.0
#include "fusestrata/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fusestrata/pheno.hpp"

namespace fusestrata {

namespace {

namespace fs = std::filesystem;

const std::map<std::string, std::vector<std::string>>& known_keys() {
  static const std::map<std::string, std::vector<std::string>> keys = {
      {"", {"seed", "threads"}},
      {"model", {"dims", "depth", "channels", "kernel", "dropout", "modalities",
                 "embedding_channels"}},
      {"training", {"epochs", "lr", "batch", "f64", "folds"}},
      {"synth", {"n", "dims", "groups", "effect", "phenotypes", "loaded"}},
      {"metrics", {"roi", "pairs", "background"}},
      {"clustering", {"grid", "max_iter", "window", "pref_lo", "pref_hi"}},
      {"factor", {"varimax_iter", "varimax_tol", "threshold"}},
      {"stats", {"bootstrap_m", "replacement", "alpha"}},
  };
  return keys;
}

void check_key(const std::string& full, const std::string& origin) {
  std::string section, key = full;
  size_t dot = full.find('.');
  if (dot != std::string::npos) {
    section = full.substr(0, dot);
    key = full.substr(dot + 1);
  }
  auto it = known_keys().find(section);
  if (it == known_keys().end())
    fail(Errc::validation, origin + ": unknown config section '" + section + "'");
  const auto& names = it->second;
  if (std::find(names.begin(), names.end(), key) == names.end())
    fail(Errc::validation, origin + ": unknown config key '" + full + "'");
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<int> parse_int_triple(const std::string& text, int count, const std::string& what) {
  std::vector<int> out;
  std::string cur;
  std::istringstream ss(text);
  while (std::getline(ss, cur, 'x')) {
    try {
      size_t pos = 0;
      int v = std::stoi(cur, &pos);
      if (pos != cur.size() || v <= 0) throw std::invalid_argument(cur);
      out.push_back(v);
    } catch (const std::logic_error&) {
      fail(Errc::validation, what + ": expected positive integers like 32x32x24, got '" + text + "'");
    }
  }
  if (static_cast<int>(out.size()) != count)
    fail(Errc::validation, what + ": expected " + std::to_string(count) +
                               " values separated by 'x', got '" + text + "'");
  return out;
}

std::string dims_string(int nx, int ny, int nz) {
  return std::to_string(nx) + "x" + std::to_string(ny) + "x" + std::to_string(nz);
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(Errc::io, dir + ": cannot create directory");
}

std::vector<std::string> factor_names_for(int k) {
  std::vector<std::string> names;
  for (int j = 0; j < k; ++j) names.push_back("F" + std::to_string(j + 1));
  return names;
}

TensorD to_double(const Tensor<float>& t) {
  TensorD out(t.dims);
  for (int64_t i = 0; i < t.numel(); ++i) out[i] = static_cast<double>(t[i]);
  return out;
}

const TensorD& to_double(const TensorD& t) { return t; }

Dataset load_normalized(const std::string& dataset_dir) {
  Dataset ds = load_dataset(dataset_dir);
  normalize_dataset(ds);
  return ds;
}

template <class T>
std::vector<double> train_and_save(const RunConfig& rc, const Dataset& ds,
                                   const ModelConfig& mcfg, const std::string& out_dir) {
  FuseModel<T> model(mcfg, rc.master_seed());
  std::vector<double> curve = train(model, ds, rc.train_config());
  model.save_checkpoint(out_dir + "/model.ckpt");
  return curve;
}

template <class T>
EmbeddingTable embed_with(const Dataset& ds, const std::string& checkpoint_path) {
  FuseModel<T> model = FuseModel<T>::load_checkpoint(checkpoint_path);
  EmbeddingTable table;
  for (const SubjectRecord& s : ds.subjects) table.subject_ids.push_back(s.subject_id);
  table.values = to_double(extract_embeddings(model, ds));
  return table;
}

template <class T>
std::vector<MetricRow> metrics_with(const Dataset& ds, const std::string& checkpoint_path,
                                    const CnrConfig& ccfg) {
  FuseModel<T> model = FuseModel<T>::load_checkpoint(checkpoint_path);
  detail::check_train_setup(model, ds);
  std::vector<MetricRow> rows;
  for (const SubjectRecord& subject : ds.subjects) {
    auto recon = model.reconstruct(subject_inputs<T>(subject));
    for (size_t m = 0; m < recon.size(); ++m) {
      MetricRow row;
      row.subject_id = subject.subject_id;
      row.fold = 0;
      row.modality = ds.modalities[m];
      const Volume& real = subject.volumes[m];
      Volume rec = tensor_to_volume(recon[m]);
      row.mse = mse(real, rec);
      row.normdiff = normdiff_median(real, rec);
      CnrMedians cnrs = cnr_medians(real, rec, ccfg);
      row.cnr_real = cnrs.real_median;
      row.cnr_rec = cnrs.rec_median;
      row.cnr_normdiff = normdiff_scalar(cnrs.real_median, cnrs.rec_median);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

struct ScoresAndLabels {
  ScoreTable scores;
  LabelTable labels;
};

ScoresAndLabels load_aligned(const std::string& scores_csv, const std::string& labels_csv) {
  ScoresAndLabels data;
  data.scores = read_scores_csv(scores_csv);
  data.labels = read_labels_csv(labels_csv);
  if (data.scores.subject_ids != data.labels.subject_ids)
    fail(Errc::validation,
         scores_csv + " and " + labels_csv + " list different subjects or a different order");
  return data;
}

}  // namespace

Dims parse_dims(const std::string& text) {
  auto v = parse_int_triple(text, 3, "dims");
  return {v[0], v[1], v[2]};
}

void RunConfig::set(const std::string& key, const std::string& value) {
  check_key(key, "config override");
  values[key] = value;
}

std::string RunConfig::get(const std::string& key, const std::string& fallback) const {
  auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

int RunConfig::get_int(const std::string& key, int fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  try {
    size_t pos = 0;
    int v = std::stoi(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::logic_error&) {
    fail(Errc::validation, key + ": expected an integer, got '" + it->second + "'");
  }
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  try {
    size_t pos = 0;
    double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::logic_error&) {
    fail(Errc::validation, key + ": expected a number, got '" + it->second + "'");
  }
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  const std::string& v = it->second;
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  fail(Errc::validation, key + ": expected a boolean, got '" + v + "'");
}

uint64_t RunConfig::get_u64(const std::string& key, uint64_t fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  try {
    size_t pos = 0;
    unsigned long long v = std::stoull(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument(key);
    return static_cast<uint64_t>(v);
  } catch (const std::logic_error&) {
    fail(Errc::validation, key + ": expected an unsigned integer, got '" + it->second + "'");
  }
}

int RunConfig::threads() const {
  if (has("threads")) {
    int t = get_int("threads", 1);
    if (t < 1) fail(Errc::validation, "threads must be >= 1");
    return t;
  }
  if (const char* env = std::getenv("FUSESTRATA_THREADS")) {
    try {
      int t = std::stoi(env);
      if (t >= 1) return t;
    } catch (const std::logic_error&) {
    }
    fail(Errc::validation, std::string("FUSESTRATA_THREADS: expected a positive integer, got '") +
                               env + "'");
  }
  return 1;
}

ModelConfig RunConfig::model_config(const Dims* data_dims) const {
  ModelConfig cfg;
  if (has("model.dims")) {
    Dims d = parse_dims(get("model.dims", ""));
    cfg.nx = d.nx;
    cfg.ny = d.ny;
    cfg.nz = d.nz;
  } else if (data_dims) {
    cfg.nx = data_dims->nx;
    cfg.ny = data_dims->ny;
    cfg.nz = data_dims->nz;
  }
  cfg.depth = get_int("model.depth", cfg.depth);
  cfg.base_channels = get_int("model.channels", cfg.base_channels);
  cfg.kernel = get_int("model.kernel", cfg.kernel);
  cfg.dropout_rate = get_double("model.dropout", cfg.dropout_rate);
  cfg.n_modalities = get_int("model.modalities", cfg.n_modalities);
  cfg.embedding_channels = get_int("model.embedding_channels", cfg.embedding_channels);
  cfg.validate();
  return cfg;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig cfg;
  cfg.epochs = get_int("training.epochs", cfg.epochs);
  cfg.lr = get_double("training.lr", cfg.lr);
  cfg.batch_size = get_int("training.batch", cfg.batch_size);
  cfg.use_double = get_bool("training.f64", cfg.use_double);
  cfg.seed = master_seed();
  cfg.validate();
  return cfg;
}

SynthConfig RunConfig::synth_config() const {
  SynthConfig cfg;
  cfg.n_subjects = get_int("synth.n", cfg.n_subjects);
  if (has("synth.dims")) {
    Dims d = parse_dims(get("synth.dims", ""));
    cfg.nx = d.nx;
    cfg.ny = d.ny;
    cfg.nz = d.nz;
  }
  cfg.n_groups = get_int("synth.groups", cfg.n_groups);
  cfg.effect_size = get_double("synth.effect", cfg.effect_size);
  cfg.n_phenotypes = get_int("synth.phenotypes", cfg.n_phenotypes);
  cfg.n_loaded = get_int("synth.loaded", cfg.n_loaded);
  cfg.seed = master_seed();
  return cfg;
}

CnrConfig RunConfig::cnr_config() const {
  CnrConfig cfg;
  if (has("metrics.roi")) {
    auto v = parse_int_triple(get("metrics.roi", ""), 3, "metrics.roi");
    cfg.roi_x = v[0];
    cfg.roi_y = v[1];
    cfg.roi_z = v[2];
  }
  cfg.n_pairs = get_int("metrics.pairs", cfg.n_pairs);
  cfg.background_thresh = get_double("metrics.background", cfg.background_thresh);
  cfg.seed = derive_seed(master_seed(), "cnr.pairs", 0);
  return cfg;
}

GridConfig RunConfig::grid_config() const {
  GridConfig cfg;
  if (has("clustering.grid")) {
    auto v = parse_int_triple(get("clustering.grid", ""), 2, "clustering.grid");
    cfg.n_damping = v[0];
    cfg.n_preference = v[1];
  }
  cfg.max_iter = get_int("clustering.max_iter", cfg.max_iter);
  cfg.convergence_window = get_int("clustering.window", cfg.convergence_window);
  cfg.pref_lo_pct = get_double("clustering.pref_lo", cfg.pref_lo_pct);
  cfg.pref_hi_pct = get_double("clustering.pref_hi", cfg.pref_hi_pct);
  return cfg;
}

BootstrapConfig RunConfig::bootstrap_config() const {
  BootstrapConfig cfg;
  cfg.m_replicates = get_int("stats.bootstrap_m", cfg.m_replicates);
  cfg.with_replacement = get_bool("stats.replacement", cfg.with_replacement);
  cfg.seed = master_seed();
  return cfg;
}

Provenance RunConfig::provenance(const ModelConfig* resolved) const {
  Provenance prov;
  prov.add("seed", master_seed());
  prov.add("threads", threads());

  if (resolved) {
    prov.add("model.dims", dims_string(resolved->nx, resolved->ny, resolved->nz));
    prov.add("model.depth", resolved->depth);
    prov.add("model.channels", resolved->base_channels);
    prov.add("model.kernel", resolved->kernel);
    prov.add("model.dropout", resolved->dropout_rate);
    prov.add("model.modalities", resolved->n_modalities);
    prov.add("model.embedding_channels", resolved->embed_channels());
  } else {
    ModelConfig defaults;
    prov.add("model.dims", get("model.dims", "auto"));
    prov.add("model.depth", get_int("model.depth", defaults.depth));
    prov.add("model.channels", get_int("model.channels", defaults.base_channels));
    prov.add("model.kernel", get_int("model.kernel", defaults.kernel));
    prov.add("model.dropout", get_double("model.dropout", defaults.dropout_rate));
    prov.add("model.modalities", get_int("model.modalities", defaults.n_modalities));
    prov.add("model.embedding_channels",
             get_int("model.embedding_channels", defaults.embedding_channels));
  }

  TrainConfig tdef;
  prov.add("training.epochs", get_int("training.epochs", tdef.epochs));
  prov.add("training.lr", get_double("training.lr", tdef.lr));
  prov.add("training.batch", get_int("training.batch", tdef.batch_size));
  prov.add("training.f64", get_bool("training.f64", tdef.use_double));
  prov.add("training.folds", cv_folds());

  SynthConfig sdef;
  prov.add("synth.n", get_int("synth.n", sdef.n_subjects));
  prov.add("synth.dims", get("synth.dims", dims_string(sdef.nx, sdef.ny, sdef.nz)));
  prov.add("synth.groups", get_int("synth.groups", sdef.n_groups));
  prov.add("synth.effect", get_double("synth.effect", sdef.effect_size));
  prov.add("synth.phenotypes", get_int("synth.phenotypes", sdef.n_phenotypes));
  prov.add("synth.loaded", get_int("synth.loaded", sdef.n_loaded));

  CnrConfig cdef;
  prov.add("metrics.roi", get("metrics.roi", dims_string(cdef.roi_x, cdef.roi_y, cdef.roi_z)));
  prov.add("metrics.pairs", get_int("metrics.pairs", cdef.n_pairs));
  prov.add("metrics.background", get_double("metrics.background", cdef.background_thresh));

  GridConfig gdef;
  prov.add("clustering.grid",
           get("clustering.grid",
               std::to_string(gdef.n_damping) + "x" + std::to_string(gdef.n_preference)));
  prov.add("clustering.max_iter", get_int("clustering.max_iter", gdef.max_iter));
  prov.add("clustering.window", get_int("clustering.window", gdef.convergence_window));
  prov.add("clustering.pref_lo", get_double("clustering.pref_lo", gdef.pref_lo_pct));
  prov.add("clustering.pref_hi", get_double("clustering.pref_hi", gdef.pref_hi_pct));

  prov.add("factor.varimax_iter", get_int("factor.varimax_iter", 500));
  prov.add("factor.varimax_tol", get_double("factor.varimax_tol", 1e-8));
  prov.add("factor.threshold", loading_threshold());

  BootstrapConfig bdef;
  prov.add("stats.bootstrap_m", get_int("stats.bootstrap_m", bdef.m_replicates));
  prov.add("stats.replacement", get_bool("stats.replacement", bdef.with_replacement));
  prov.add("stats.alpha", alpha());
  return prov;
}

RunConfig parse_run_config(const std::string& text, const std::string& origin) {
  RunConfig rc;
  std::istringstream ss(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    std::string where = origin + ":" + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') fail(Errc::parse, where + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (known_keys().find(section) == known_keys().end() || section.empty())
        fail(Errc::validation, where + ": unknown config section '" + section + "'");
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos) fail(Errc::parse, where + ": expected key=value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(Errc::parse, where + ": empty key");
    std::string full = section.empty() ? key : section + "." + key;
    check_key(full, where);
    rc.values[full] = value;
  }
  return rc;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io, path + ": cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path);
}

SynthResult stage_synth(const RunConfig& rc, const std::string& out_dir) {
  SynthConfig cfg = rc.synth_config();
  SynthResult res = synth_dataset(cfg);
  ensure_dir(out_dir);
  save_dataset(out_dir + "/dataset", res.dataset);
  save_phenotypes(out_dir + "/phenotypes.csv", res.phenotypes);
  std::vector<std::string> ids;
  for (const SubjectRecord& s : res.dataset.subjects) ids.push_back(s.subject_id);
  write_labels_csv(out_dir + "/planted_labels.csv", ids, res.labels, rc.provenance());
  return res;
}

std::vector<double> stage_train(const RunConfig& rc, const std::string& dataset_dir,
                                const std::string& out_dir) {
  Dataset ds = load_normalized(dataset_dir);
  const Volume& v0 = ds.volume(0, 0);
  Dims data_dims{v0.nx, v0.ny, v0.nz};
  ModelConfig mcfg = rc.model_config(&data_dims);
  ensure_dir(out_dir);
  std::vector<double> curve = rc.train_config().use_double
                                  ? train_and_save<double>(rc, ds, mcfg, out_dir)
                                  : train_and_save<float>(rc, ds, mcfg, out_dir);
  write_loss_curve_csv(out_dir + "/loss_curve.csv", curve, rc.provenance(&mcfg));
  return curve;
}

EmbeddingTable stage_embed(const RunConfig& rc, const std::string& dataset_dir,
                           const std::string& checkpoint_path, const std::string& out_dir) {
  Dataset ds = load_normalized(dataset_dir);
  EmbeddingTable table = rc.train_config().use_double
                             ? embed_with<double>(ds, checkpoint_path)
                             : embed_with<float>(ds, checkpoint_path);
  ensure_dir(out_dir);
  std::vector<CheckpointEntry> ignored;
  ModelConfig mcfg = read_checkpoint_file(checkpoint_path, ignored);
  write_embeddings_csv(out_dir + "/embeddings.csv", table.subject_ids, table.values,
                       rc.provenance(&mcfg));
  return table;
}

std::vector<MetricRow> stage_metrics(const RunConfig& rc, const std::string& dataset_dir,
                                     const std::string& checkpoint_path,
                                     const std::string& out_dir) {
  Dataset ds = load_normalized(dataset_dir);
  CnrConfig ccfg = rc.cnr_config();
  std::vector<MetricRow> rows = rc.train_config().use_double
                                    ? metrics_with<double>(ds, checkpoint_path, ccfg)
                                    : metrics_with<float>(ds, checkpoint_path, ccfg);
  ensure_dir(out_dir);
  std::vector<CheckpointEntry> ignored;
  ModelConfig mcfg = read_checkpoint_file(checkpoint_path, ignored);
  write_metrics_csv(out_dir + "/metrics.csv", rows, rc.provenance(&mcfg));
  return rows;
}

CvResult stage_cv(const RunConfig& rc, const std::string& dataset_dir,
                  const std::string& out_dir) {
  Dataset ds = load_normalized(dataset_dir);
  const Volume& v0 = ds.volume(0, 0);
  Dims data_dims{v0.nx, v0.ny, v0.nz};
  ModelConfig mcfg = rc.model_config(&data_dims);
  CvResult cv = cross_validate(ds, mcfg, rc.train_config(), rc.cnr_config(), rc.cv_folds());
  ensure_dir(out_dir);
  Provenance prov = rc.provenance(&mcfg);
  std::vector<MetricRow> all_rows;
  for (const FoldReport& fold : cv.folds)
    all_rows.insert(all_rows.end(), fold.rows.begin(), fold.rows.end());
  write_metrics_csv(out_dir + "/cv_metrics.csv", all_rows, prov);
  write_fold_medians_csv(out_dir + "/fold_medians.csv", cv, prov);
  write_cv_summary_json(out_dir + "/cv_summary.json", cv, prov);
  write_boxplot_svg(out_dir + "/cv_boxplot.svg", cv, prov);
  return cv;
}

GridResult stage_cluster(const RunConfig& rc, const std::string& embeddings_csv,
                         const std::string& out_dir) {
  EmbeddingTable table = read_embeddings_csv(embeddings_csv);
  GridResult grid = grid_search(table.values, rc.grid_config());
  ensure_dir(out_dir);
  Provenance prov = rc.provenance();
  write_grid_csv(out_dir + "/grid.csv", grid.table, prov);
  write_cluster_summary_json(out_dir + "/cluster_summary.json", grid.best, prov);
  write_labels_csv(out_dir + "/cluster_labels.csv", table.subject_ids, grid.best.labels, prov);
  return grid;
}

FactorModel stage_factors(const RunConfig& rc, const std::string& phenotypes_csv,
                          const std::string& out_dir) {
  PhenoTable table = load_phenotypes(phenotypes_csv);
  FactorModel fm = fit_factors(table, rc.get_int("factor.varimax_iter", 500),
                               rc.get_double("factor.varimax_tol", 1e-8));
  ensure_dir(out_dir);
  Provenance prov = rc.provenance();
  write_loadings_csv(out_dir + "/loadings.csv", fm, prov);
  write_thresholded_loadings_csv(out_dir + "/loadings_thresholded.csv", fm,
                                 rc.loading_threshold(), prov);
  write_thresholded_loadings_txt(out_dir + "/loadings_thresholded.txt", fm,
                                 rc.loading_threshold(), prov);
  write_scores_csv(out_dir + "/factor_scores.csv", table.subject_ids, fm.scores,
                   factor_names_for(fm.k), prov);
  write_factor_summary_json(out_dir + "/factor_summary.json", fm, prov);
  return fm;
}

StatReport stage_stats(const RunConfig& rc, const std::string& scores_csv,
                       const std::string& labels_csv, const std::string& out_dir) {
  ScoresAndLabels data = load_aligned(scores_csv, labels_csv);
  StatReport report = stratification_stats(data.scores.scores, data.labels.labels,
                                           rc.bootstrap_config(), rc.alpha(),
                                           &data.scores.factor_names);
  ensure_dir(out_dir);
  Provenance prov = rc.provenance();
  write_stat_report_csv(out_dir + "/stats.csv", report, prov);
  write_stat_report_json(out_dir + "/stats.json", report, prov);
  return report;
}

ProfileMatrix stage_profile(const RunConfig& rc, const std::string& scores_csv,
                            const std::string& labels_csv, const std::string& out_dir) {
  ScoresAndLabels data = load_aligned(scores_csv, labels_csv);
  ProfileMatrix prof =
      cluster_profiles(data.scores.scores, data.labels.labels, &data.scores.factor_names);
  ensure_dir(out_dir);
  Provenance prov = rc.provenance();
  write_profile_csv(out_dir + "/profile.csv", prof, prov);
  write_profile_svg(out_dir + "/profile.svg", prof, prov);
  return prof;
}

std::string params_text(int channels, int kernel) {
  if (channels < 1) fail(Errc::validation, "channels must be >= 1");
  if (kernel < 1 || kernel % 2 == 0) fail(Errc::validation, "kernel must be odd and >= 1");
  int64_t standard = midflow_weights_standard(channels, kernel);
  int64_t separable = midflow_weights_separable(channels, kernel);
  std::ostringstream out;
  out << "mid-flow residual block, C=" << channels << ", kernel=" << kernel << "\n";
  out << "standard conv weights:  " << standard << "\n";
  out << "separable conv weights: " << separable << "\n";
  out << "reduction ratio:        " << strprintf("%.6g", midflow_weight_ratio(channels, kernel))
      << "\n";
  return out.str();
}

PipelineResult run_pipeline(const RunConfig& rc, const std::string& out_dir) {
  ensure_dir(out_dir);
  PipelineResult result;
  SynthResult synth = stage_synth(rc, out_dir);
  result.planted_labels = synth.labels;
  stage_train(rc, out_dir + "/dataset", out_dir);
  stage_embed(rc, out_dir + "/dataset", out_dir + "/model.ckpt", out_dir);
  result.grid = stage_cluster(rc, out_dir + "/embeddings.csv", out_dir);
  result.factors = stage_factors(rc, out_dir + "/phenotypes.csv", out_dir);
  result.stats = stage_stats(rc, out_dir + "/factor_scores.csv", out_dir + "/cluster_labels.csv",
                             out_dir);
  result.profile = stage_profile(rc, out_dir + "/factor_scores.csv",
                                 out_dir + "/cluster_labels.csv", out_dir);
  return result;
}

}  // namespace fusestrata
