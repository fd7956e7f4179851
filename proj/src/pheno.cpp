// SPDX-License-Identifier: Apache-2.0
#include "fusestrata/pheno.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <unordered_set>

#include "fusestrata/common.hpp"

namespace fusestrata {

namespace {

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  cells.push_back(cur);
  return cells;
}

std::string trimmed(const std::string& s) {
  size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

int PhenoTable::missing_count() const {
  int c = 0;
  for (uint8_t m : missing) c += m;
  return c;
}

void PhenoTable::impute_column_means() {
  int rows = n(), cols = p();
  for (int j = 0; j < cols; ++j) {
    double sum = 0;
    int count = 0;
    for (int i = 0; i < rows; ++i) {
      if (!is_missing(i, j)) {
        sum += at(i, j);
        ++count;
      }
    }
    if (count == 0) fail(Errc::validation, "variable " + variable_names[j] + " entirely missing");
    double mean = sum / count;
    for (int i = 0; i < rows; ++i)
      if (is_missing(i, j)) values[static_cast<size_t>(i) * cols + j] = mean;
  }
}

PhenoTable load_phenotypes(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) fail(Errc::io, csv_path + ": cannot open");
  std::string line;
  if (!std::getline(in, line)) fail(Errc::parse, csv_path + ": empty file");
  std::vector<std::string> header = split_csv_row(line);
  if (header.empty() || trimmed(header[0]) != "subject_id")
    fail(Errc::parse, csv_path + ": first column must be subject_id");

  std::vector<std::string> names(header.begin() + 1, header.end());
  for (auto& name : names) name = trimmed(name);

  PhenoTable raw;
  raw.variable_names = names;
  std::unordered_set<std::string> seen_ids;
  int row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (trimmed(line).empty()) continue;
    std::vector<std::string> cells = split_csv_row(line);
    if (cells.size() != header.size())
      fail(Errc::parse, csv_path + ": row " + std::to_string(row_no) + " has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(header.size()));
    std::string sid = trimmed(cells[0]);
    if (sid.empty()) fail(Errc::parse, csv_path + ": row " + std::to_string(row_no) + ": empty subject_id");
    if (!seen_ids.insert(sid).second)
      fail(Errc::parse, csv_path + ": duplicate subject_id '" + sid + "' at row " +
                            std::to_string(row_no));
    raw.subject_ids.push_back(sid);
    for (size_t j = 1; j < cells.size(); ++j) {
      std::string cell = trimmed(cells[j]);
      if (cell.empty()) {
        raw.values.push_back(0.0);
        raw.missing.push_back(1);
        continue;
      }
      double v = 0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size())
        fail(Errc::parse, csv_path + ": non-numeric cell '" + cell + "' at row " +
                              std::to_string(row_no) + ", column " + names[j - 1]);
      raw.values.push_back(v);
      raw.missing.push_back(0);
    }
  }
  if (raw.subject_ids.empty()) fail(Errc::parse, csv_path + ": no data rows");

  // Drop zero-variance variables (over observed cells) up front; downstream
  // correlation work divides by their spread.
  PhenoTable out;
  out.subject_ids = raw.subject_ids;
  std::vector<int> keep;
  for (int j = 0; j < raw.p(); ++j) {
    double first = 0;
    bool have_first = false, varies = false;
    for (int i = 0; i < raw.n(); ++i) {
      if (raw.is_missing(i, j)) continue;
      if (!have_first) {
        first = raw.at(i, j);
        have_first = true;
      } else if (raw.at(i, j) != first) {
        varies = true;
        break;
      }
    }
    if (varies) {
      keep.push_back(j);
      out.variable_names.push_back(raw.variable_names[j]);
    } else {
      out.dropped.push_back(raw.variable_names[j]);
      out.warnings.push_back("dropped zero-variance variable '" + raw.variable_names[j] + "'");
    }
  }
  out.values.reserve(static_cast<size_t>(raw.n()) * keep.size());
  out.missing.reserve(out.values.capacity());
  for (int i = 0; i < raw.n(); ++i) {
    for (int j : keep) {
      out.values.push_back(raw.at(i, j));
      out.missing.push_back(raw.is_missing(i, j) ? 1 : 0);
    }
  }
  return out;
}

void save_phenotypes(const std::string& csv_path, const PhenoTable& table) {
  std::ofstream out(csv_path, std::ios::trunc);
  if (!out) fail(Errc::io, csv_path + ": cannot open for writing");
  out << "subject_id";
  for (const auto& name : table.variable_names) out << ',' << name;
  out << '\n';
  for (int i = 0; i < table.n(); ++i) {
    out << table.subject_ids[i];
    for (int j = 0; j < table.p(); ++j) {
      out << ',';
      if (!table.is_missing(i, j)) out << fmt_double(table.at(i, j));
    }
    out << '\n';
  }
  if (!out) fail(Errc::io, csv_path + ": write failed");
}

}  // namespace fusestrata
