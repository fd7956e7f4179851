// SPDX-License-Identifier: Apache-2.0
#include "fusestrata/report.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fusestrata {

namespace {

using ordered_json = nlohmann::ordered_json;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary: no newline translation
  if (!out) fail(Errc::io, path + ": cannot open for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io, path + ": cannot open");
  return in;
}

void comment_block(std::ofstream& out, const Provenance& prov) {
  for (const auto& kv : prov.entries) out << "# " << kv.first << "=" << kv.second << "\n";
}

ordered_json provenance_json(const Provenance& prov) {
  ordered_json j = ordered_json::object();
  for (const auto& kv : prov.entries) j[kv.first] = kv.second;
  return j;
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}

// first non-comment line is the header
std::vector<std::vector<std::string>> read_csv_body(const std::string& path,
                                                    std::vector<std::string>* header) {
  std::ifstream in = open_in(path);
  std::string line;
  bool have_header = false;
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!have_header) {
      *header = split_row(line);
      have_header = true;
      continue;
    }
    rows.push_back(split_row(line));
  }
  if (!have_header) fail(Errc::parse, path + ": missing header row");
  return rows;
}

double parse_double(const std::string& s, const std::string& path) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) fail(Errc::parse, path + ": bad number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    fail(Errc::parse, path + ": bad number '" + s + "'");
  }
}

int parse_int(const std::string& s, const std::string& path) {
  try {
    size_t pos = 0;
    int v = std::stoi(s, &pos);
    if (pos != s.size()) fail(Errc::parse, path + ": bad integer '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    fail(Errc::parse, path + ": bad integer '" + s + "'");
  }
}

void write_json_file(const std::string& path, const ordered_json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << "\n";
  if (!out) fail(Errc::io, path + ": write failed");
}

std::string ramp_color(double t) {  // 0 = dark blue, 1 = near white
  t = std::clamp(t, 0.0, 1.0);
  auto lerp = [&](int lo, int hi) { return static_cast<int>(std::lround(lo + (hi - lo) * t)); };
  return strprintf("#%02x%02x%02x", lerp(0x08, 0xf7), lerp(0x30, 0xfb), lerp(0x6b, 0xff));
}

struct BoxStats {
  double lo, q1, med, q3, hi;
};

BoxStats box_stats(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  BoxStats b;
  b.lo = values.front();
  b.hi = values.back();
  b.q1 = percentile_sorted(values, 25.0);
  b.med = percentile_sorted(values, 50.0);
  b.q3 = percentile_sorted(values, 75.0);
  return b;
}

}  // namespace

void write_metrics_csv(const std::string& path, const std::vector<MetricRow>& rows,
                       const Provenance& prov) {
  std::ofstream out = open_out(path);
  comment_block(out, prov);
  out << "subject_id,fold,modality,mse,normdiff,cnr_real,cnr_rec,cnr_normdiff\n";
  for (const MetricRow& r : rows)
    out << r.subject_id << "," << r.fold << "," << r.modality << "," << fmt_double(r.mse) << ","
        << fmt_double(r.normdiff) << "," << fmt_double(r.cnr_real) << ","
        << fmt_double(r.cnr_rec) << "," << fmt_double(r.cnr_normdiff) << "\n";
  if (!out) fail(Errc::io, path + ": write failed");
}

std::vector<MetricRow> read_metrics_csv(const std::string& path) {
  std::vector<std::string> header;
  auto body = read_csv_body(path, &header);
  if (header != split_row("subject_id,fold,modality,mse,normdiff,cnr_real,cnr_rec,cnr_normdiff"))
    fail(Errc::parse, path + ": unexpected metrics header");
  std::vector<MetricRow> rows;
  for (const auto& cells : body) {
    if (cells.size() != 8) fail(Errc::parse, path + ": bad metrics row");
    MetricRow r;
    r.subject_id = cells[0];
    r.fold = parse_int(cells[1], path);
    r.modality = cells[2];
    r.mse = parse_double(cells[3], path);
    r.normdiff = parse_double(cells[4], path);
    r.cnr_real = parse_double(cells[5], path);
    r.cnr_rec = parse_double(cells[6], path);
    r.cnr_normdiff = parse_double(cells[7], path);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_fold_medians_csv(const std::string& path, const CvResult& cv, const Provenance& prov) {
  std::ofstream out = open_out(path);
  comment_block(out, prov);
  out << "fold,modality,mse,normdiff,cnr_normdiff\n";
  for (const FoldReport& fold : cv.folds)
    for (const ModalityMedians& m : fold.medians)
      out << fold.fold << "," << m.modality << "," << fmt_double(m.mse) << ","
          << fmt_double(m.normdiff) << "," << fmt_double(m.cnr_normdiff) << "\n";
  if (!out) fail(Errc::io, path + ": write failed");
}

void write_cv_summary_json(const std::string& path, const CvResult& cv, const Provenance& prov) {
  ordered_json j;
  j["provenance"] = provenance_json(prov);
  j["n_folds"] = cv.folds.size();
  j["summary"] = ordered_json::array();
  for (const CvSummaryRow& row : cv.summary) {
    ordered_json r;
    r["modality"] = row.modality;
    r["metric"] = row.metric;
    r["median"] = row.median;
    r["mad"] = row.mad;
    j["summary"].push_back(std::move(r));
  }
  write_json_file(path, j);
}

void write_loss_curve_csv(const std::string& path, const std::vector<double>& curve,
                          const Provenance& prov) {
  std::ofstream out = open_out(path);
  comment_block(out, prov);
  out << "epoch,loss\n";
  for (size_t e = 0; e < curve.size(); ++e) out << e << "," << fmt_double(curve[e]) << "\n";
  if (!out) fail(Errc::io, path + ": write failed");
}

void write_boxplot_svg(const std::string& path, const CvResult& cv, const Provenance& prov) {
  // one panel per metric, one box per modality, fed by the fold medians
  const char* metrics[] = {"mse", "normdiff", "cnr_normdiff"};
  std::vector<std::string> modalities;
  for (const FoldReport& fold : cv.folds)
    for (const ModalityMedians& m : fold.medians)
      if (std::find(modalities.begin(), modalities.end(), m.modality) == modalities.end())
        modalities.push_back(m.modality);

  const int panel_w = 200, panel_h = 220, margin = 40, box_w = 36;
  int width = margin + 3 * panel_w + margin;
  int height = panel_h + 2 * margin;

  std::ofstream out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" font-family=\"monospace\" font-size=\"11\">\n";
  for (const auto& kv : prov.entries)
    out << "<!-- " << kv.first << "=" << kv.second << " -->\n";
  out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";

  for (int mi = 0; mi < 3; ++mi) {
    int x0 = margin + mi * panel_w;
    // pool this metric's fold medians across modalities for a shared scale
    double lo = 0, hi = 0;
    bool first = true;
    std::vector<std::vector<double>> per_mod(modalities.size());
    for (size_t md = 0; md < modalities.size(); ++md) {
      for (const FoldReport& fold : cv.folds)
        for (const ModalityMedians& m : fold.medians)
          if (m.modality == modalities[md]) {
            double v = mi == 0 ? m.mse : mi == 1 ? m.normdiff : m.cnr_normdiff;
            per_mod[md].push_back(v);
            if (first || v < lo) lo = v;
            if (first || v > hi) hi = v;
            first = false;
          }
    }
    if (first) continue;
    if (hi == lo) {  // degenerate spread: pad so the median line sits mid-panel
      lo -= 0.5;
      hi += 0.5;
    }
    auto ypos = [&](double v) {
      return margin + panel_h - (v - lo) / (hi - lo) * panel_h;
    };
    out << "<text x=\"" << x0 + panel_w / 2 << "\" y=\"" << margin - 14
        << "\" text-anchor=\"middle\">" << metrics[mi] << "</text>\n";
    out << "<line x1=\"" << x0 << "\" y1=\"" << margin << "\" x2=\"" << x0 << "\" y2=\""
        << margin + panel_h << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << x0 - 4 << "\" y=\"" << ypos(hi) + 4
        << "\" text-anchor=\"end\">" << strprintf("%.3g", hi) << "</text>\n";
    out << "<text x=\"" << x0 - 4 << "\" y=\"" << ypos(lo) + 4
        << "\" text-anchor=\"end\">" << strprintf("%.3g", lo) << "</text>\n";

    for (size_t md = 0; md < modalities.size(); ++md) {
      if (per_mod[md].empty()) continue;
      BoxStats b = box_stats(per_mod[md]);
      int cx = x0 + 40 + static_cast<int>(md) * (box_w + 30) + box_w / 2;
      int bx = cx - box_w / 2;
      out << "<line x1=\"" << cx << "\" y1=\"" << ypos(b.lo) << "\" x2=\"" << cx << "\" y2=\""
          << ypos(b.hi) << "\" stroke=\"black\"/>\n";
      for (double whisker : {b.lo, b.hi})
        out << "<line x1=\"" << cx - 8 << "\" y1=\"" << ypos(whisker) << "\" x2=\"" << cx + 8
            << "\" y2=\"" << ypos(whisker) << "\" stroke=\"black\"/>\n";
      out << "<rect x=\"" << bx << "\" y=\"" << ypos(b.q3) << "\" width=\"" << box_w
          << "\" height=\"" << ypos(b.q1) - ypos(b.q3)
          << "\" fill=\"#9ecae1\" stroke=\"black\"/>\n";
      out << "<line x1=\"" << bx << "\" y1=\"" << ypos(b.med) << "\" x2=\"" << bx + box_w
          << "\" y2=\"" << ypos(b.med) << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
      out << "<text x=\"" << cx << "\" y=\"" << margin + panel_h + 16
          << "\" text-anchor=\"middle\">" << modalities[md] << "</text>\n";
    }
  }
  out << "</svg>\n";
  if (!out) fail(Errc::io, path + ": write failed");
}

void write_embeddings_csv(const std::string& path, const std::vector<std::string>& subject_ids,
                          const TensorD& values, const Provenance& prov) {
  if (values.dims.size() != 2) fail(Errc::validation, "embeddings must be n x e");
  int n = values.dims[0], e = values.dims[1];
  if (subject_ids.size() != static_cast<size_t>(n))
    fail(Errc::validation, "subject id count mismatch");
  std::ofstream out = open_out(path);
  comment_block(out, prov);
  out << "subject_id";
  for (int j = 0; j < e; ++j) out << ",e" << j;
  out << "\n";
  for (int i = 0; i < n; ++i) {
    out << subject_ids[static_cast<size_t>(i)];
    for (int j = 0; j < e; ++j) out << "," << fmt_double(values[static_cast<int64_t>(i) * e + j]);
    out << "\n";
  }
  if (!out) fail(Errc::io, path + ": write failed");
}

EmbeddingTable read_embeddings_csv(const std::string& path) {
  std::vector<std::string> header;
  auto body = read_csv_body(path, &header);
  if (header.size() < 2 || header[0] != "subject_id")
    fail(Errc::parse, path + ": expected subject_id then embedding columns");
  int e = static_cast<int>(header.size()) - 1;
  EmbeddingTable table;
  table.values = TensorD({static_cast<int>(body.size()), e});
  for (size_t i = 0; i < body.size(); ++i) {
    if (body[i].size() != header.size()) fail(Errc::parse, path + ": ragged row");
    table.subject_ids.push_back(body[i][0]);
    for (int j = 0; j < e; ++j)
      table.values[static_cast<int64_t>(i) * e + j] = parse_double(body[i][static_cast<size_t>(j) + 1], path);
  }
  return table;
}

void write_labels_csv(const std::string& path, const std::vector<std::string>& subject_ids,
                      const std::vector<int>& labels, const Provenance& prov) {
  if (subject_ids.size() != labels.size()) fail(Errc::validation, "id/label count mismatch");
  std::ofstream out = open_out(path);
  comment_block(out, prov);
  out << "subject_id,cluster\n";
  for (size_t i = 0; i < labels.size(); ++i)
    out << subject_ids[i] << "," << labels[i] << "\n";
  if (!out) fail(Errc::io, path + ": write failed");
}

LabelTable read_labels_csv(const std::string& path) {
  std::vector<std::string> header;
  auto body = read_csv_body(path, &header);
  if (header != split_row("subject_id,cluster"))
    fail(Errc::parse, path + ": unexpected labels header");
  LabelTable table;
  for (const auto& cells : body) {
    if (cells.size() != 2) fail(Errc::parse, path + ": bad label row");
    table.subject_ids.push_back(cells[0]);
    table.labels.push_back(parse_int(cells[1], path));
  }
  return table;
}

void write_grid_csv(const std::string& path, const std::vector<GridCell>& table,
                    const Provenance& prov) {
  std::ofstream out = open_out(path);
  comment_block(out, prov);
  out << "damping,preference,n_clusters,converged,eligible,silhouette\n";
  for (const GridCell& cell : table) {
    out << fmt_double(cell.damping) << "," << fmt_double(cell.preference) << ","
        << cell.n_clusters << "," << (cell.converged ? 1 : 0) << "," << (cell.eligible ? 1 : 0)
        << ",";
    if (cell.eligible) out << fmt_double(cell.silhouette_score);
    out << "\n";
  }
  if (!out) fail(Errc::io, path + ": write failed");
}

void write_cluster_summary_json(const std::string& path, const ClusterResult& result,
                                const Provenance& prov) {
  ordered_json j;
  j["provenance"] = provenance_json(prov);
  j["n_clusters"] = result.n_clusters;
  j["damping"] = result.damping;
  j["preference"] = result.preference;
  j["iterations"] = result.iterations;
  j["converged"] = result.converged;
  j["silhouette"] = result.silhouette_score;
  std::vector<int> exemplars(result.exemplar_of);
  std::sort(exemplars.begin(), exemplars.end());
  exemplars.erase(std::unique(exemplars.begin(), exemplars.end()), exemplars.end());
  j["exemplars"] = exemplars;
  write_json_file(path, j);
}

namespace {

void write_loading_table(const std::string& path, const FactorModel& fm, const double* threshold,
                         const Provenance& prov) {
  std::ofstream out = open_out(path);
  comment_block(out, prov);
  out << "variable";
  for (int j = 0; j < fm.k; ++j) out << ",F" << j + 1;
  out << "\n";
  for (size_t i = 0; i < fm.variable_names.size(); ++i) {
    out << fm.variable_names[i];
    for (int j = 0; j < fm.k; ++j) {
      double v = fm.loadings[static_cast<int64_t>(i) * fm.k + j];
      out << ",";
      if (!threshold || std::fabs(v) >= *threshold) out << fmt_double(v);
    }
    out << "\n";
  }
  if (!out) fail(Errc::io, path + ": write failed");
}

}  // namespace

void write_loadings_csv(const std::string& path, const FactorModel& fm, const Provenance& prov) {
  write_loading_table(path, fm, nullptr, prov);
}

void write_thresholded_loadings_csv(const std::string& path, const FactorModel& fm,
                                    double abs_threshold, const Provenance& prov) {
  write_loading_table(path, fm, &abs_threshold, prov);
}

void write_thresholded_loadings_txt(const std::string& path, const FactorModel& fm,
                                    double abs_threshold, const Provenance& prov) {
  size_t name_w = 8;
  for (const std::string& name : fm.variable_names) name_w = std::max(name_w, name.size());
  std::ofstream out = open_out(path);
  comment_block(out, prov);
  out << std::string(name_w, ' ');
  for (int j = 0; j < fm.k; ++j) out << strprintf("%8s", ("F" + std::to_string(j + 1)).c_str());
  out << "\n";
  for (size_t i = 0; i < fm.variable_names.size(); ++i) {
    const std::string& name = fm.variable_names[i];
    out << name << std::string(name_w - name.size(), ' ');
    for (int j = 0; j < fm.k; ++j) {
      double v = fm.loadings[static_cast<int64_t>(i) * fm.k + j];
      if (std::fabs(v) >= abs_threshold) out << strprintf("%8.2f", v);
      else out << std::string(8, ' ');
    }
    out << "\n";
  }
  if (!out) fail(Errc::io, path + ": write failed");
}

void write_scores_csv(const std::string& path, const std::vector<std::string>& subject_ids,
                      const TensorD& scores, const std::vector<std::string>& factor_names,
                      const Provenance& prov) {
  if (scores.dims.size() != 2) fail(Errc::validation, "scores must be n x k");
  int n = scores.dims[0], k = scores.dims[1];
  if (subject_ids.size() != static_cast<size_t>(n))
    fail(Errc::validation, "subject id count mismatch");
  if (factor_names.size() != static_cast<size_t>(k))
    fail(Errc::validation, "factor name count mismatch");
  std::ofstream out = open_out(path);
  comment_block(out, prov);
  out << "subject_id";
  for (const std::string& name : factor_names) out << "," << name;
  out << "\n";
  for (int i = 0; i < n; ++i) {
    out << subject_ids[static_cast<size_t>(i)];
    for (int j = 0; j < k; ++j) out << "," << fmt_double(scores[static_cast<int64_t>(i) * k + j]);
    out << "\n";
  }
  if (!out) fail(Errc::io, path + ": write failed");
}

ScoreTable read_scores_csv(const std::string& path) {
  std::vector<std::string> header;
  auto body = read_csv_body(path, &header);
  if (header.size() < 2 || header[0] != "subject_id")
    fail(Errc::parse, path + ": expected subject_id then factor columns");
  int k = static_cast<int>(header.size()) - 1;
  ScoreTable table;
  table.factor_names.assign(header.begin() + 1, header.end());
  table.scores = TensorD({static_cast<int>(body.size()), k});
  for (size_t i = 0; i < body.size(); ++i) {
    if (body[i].size() != header.size()) fail(Errc::parse, path + ": ragged row");
    table.subject_ids.push_back(body[i][0]);
    for (int j = 0; j < k; ++j)
      table.scores[static_cast<int64_t>(i) * k + j] = parse_double(body[i][static_cast<size_t>(j) + 1], path);
  }
  return table;
}

void write_factor_summary_json(const std::string& path, const FactorModel& fm,
                               const Provenance& prov) {
  ordered_json j;
  j["provenance"] = provenance_json(prov);
  j["k"] = fm.k;
  j["explained_variance"] = fm.explained_variance;
  j["eigenvalues"] = fm.eigenvalues;
  j["variable_names"] = fm.variable_names;
  write_json_file(path, j);
}

void write_stat_report_csv(const std::string& path, const StatReport& report,
                           const Provenance& prov) {
  std::ofstream out = open_out(path);
  comment_block(out, prov);
  out << "# alpha=" << fmt_double(report.alpha) << "\n";
  out << "# bootstrap_m=" << report.m_replicates << "\n";
  out << "# bootstrap_mode=" << (report.with_replacement ? "replacement" : "permutation") << "\n";
  out << "# stats_seed=" << report.seed << "\n";
  for (const std::string& w : report.warnings) out << "# warning=" << w << "\n";
  out << "factor,h,df,p_asymptotic,q_asymptotic,sig_asymptotic,p_bootstrap,"
         "p_bootstrap_smoothed,q_bootstrap,sig_bootstrap,degenerate\n";
  for (const StatRow& row : report.rows)
    out << row.factor << "," << fmt_double(row.h) << "," << row.df << ","
        << fmt_double(row.p_asymptotic) << "," << fmt_double(row.q_asymptotic) << ","
        << (row.sig_asymptotic ? 1 : 0) << "," << fmt_double(row.p_bootstrap) << ","
        << fmt_double(row.p_bootstrap_smoothed) << "," << fmt_double(row.q_bootstrap) << ","
        << (row.sig_bootstrap ? 1 : 0) << "," << (row.degenerate ? 1 : 0) << "\n";
  if (!out) fail(Errc::io, path + ": write failed");
}

void write_stat_report_json(const std::string& path, const StatReport& report,
                            const Provenance& prov) {
  ordered_json j;
  j["provenance"] = provenance_json(prov);
  j["alpha"] = report.alpha;
  j["bootstrap_m"] = report.m_replicates;
  j["bootstrap_mode"] = report.with_replacement ? "replacement" : "permutation";
  j["seed"] = report.seed;
  j["warnings"] = report.warnings;
  j["rows"] = ordered_json::array();
  for (const StatRow& row : report.rows) {
    ordered_json r;
    r["factor"] = row.factor;
    r["h"] = row.h;
    r["df"] = row.df;
    r["p_asymptotic"] = row.p_asymptotic;
    r["q_asymptotic"] = row.q_asymptotic;
    r["sig_asymptotic"] = row.sig_asymptotic;
    r["p_bootstrap"] = row.p_bootstrap;
    r["p_bootstrap_smoothed"] = row.p_bootstrap_smoothed;
    r["q_bootstrap"] = row.q_bootstrap;
    r["sig_bootstrap"] = row.sig_bootstrap;
    r["degenerate"] = row.degenerate;
    j["rows"].push_back(std::move(r));
  }
  write_json_file(path, j);
}

void write_profile_csv(const std::string& path, const ProfileMatrix& prof,
                       const Provenance& prov) {
  std::ofstream out = open_out(path);
  comment_block(out, prov);
  out << "factor,cluster,cluster_size,quantile,log10_quantile\n";
  int n_clusters = static_cast<int>(prof.cluster_sizes.size());
  for (size_t f = 0; f < prof.factor_names.size(); ++f)
    for (int c = 0; c < n_clusters; ++c)
      out << prof.factor_names[f] << "," << c << "," << prof.cluster_sizes[static_cast<size_t>(c)]
          << "," << fmt_double(prof.quantiles[static_cast<int64_t>(f) * n_clusters + c]) << ","
          << fmt_double(prof.log10_quantiles[static_cast<int64_t>(f) * n_clusters + c]) << "\n";
  if (!out) fail(Errc::io, path + ": write failed");
}

void write_profile_svg(const std::string& path, const ProfileMatrix& prof,
                       const Provenance& prov) {
  int k = static_cast<int>(prof.factor_names.size());
  int n_clusters = static_cast<int>(prof.cluster_sizes.size());
  const int cell_w = 70, cell_h = 28, label_w = 110, header_h = 40, margin = 10;
  int width = margin + label_w + n_clusters * cell_w + margin;
  int height = margin + header_h + k * cell_h + margin;

  std::ofstream out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" font-family=\"monospace\" font-size=\"11\">\n";
  for (const auto& kv : prov.entries)
    out << "<!-- " << kv.first << "=" << kv.second << " -->\n";
  out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";

  for (int c = 0; c < n_clusters; ++c) {
    int x = margin + label_w + c * cell_w + cell_w / 2;
    out << "<text x=\"" << x << "\" y=\"" << margin + 16 << "\" text-anchor=\"middle\">c" << c
        << "</text>\n";
    out << "<text x=\"" << x << "\" y=\"" << margin + 32 << "\" text-anchor=\"middle\">n="
        << prof.cluster_sizes[static_cast<size_t>(c)] << "</text>\n";
  }
  for (int f = 0; f < k; ++f) {
    int y = margin + header_h + f * cell_h;
    out << "<text x=\"" << margin + label_w - 6 << "\" y=\"" << y + cell_h / 2 + 4
        << "\" text-anchor=\"end\">" << prof.factor_names[static_cast<size_t>(f)] << "</text>\n";
    for (int c = 0; c < n_clusters; ++c) {
      double v = prof.log10_quantiles[static_cast<int64_t>(f) * n_clusters + c];
      // fixed ramp over [-2, 0]: dark = low quantile, light = high
      double t = std::clamp((v + 2.0) / 2.0, 0.0, 1.0);
      int x = margin + label_w + c * cell_w;
      out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell_w << "\" height=\""
          << cell_h << "\" fill=\"" << ramp_color(t) << "\" stroke=\"#555\"/>\n";
      out << "<text x=\"" << x + cell_w / 2 << "\" y=\"" << y + cell_h / 2 + 4
          << "\" text-anchor=\"middle\" fill=\"" << (t < 0.5 ? "white" : "black") << "\">"
          << strprintf("%.2f", v) << "</text>\n";
    }
  }
  out << "</svg>\n";
  if (!out) fail(Errc::io, path + ": write failed");
}

}  // namespace fusestrata
