// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace fusestrata {

// Subjects x variables table of questionnaire / demographic measures.
// Missing cells are masked here and mean-imputed downstream, right before
// factor extraction.
struct PhenoTable {
  std::vector<std::string> subject_ids;
  std::vector<std::string> variable_names;
  std::vector<double> values;        // row-major n x p, missing cells hold 0
  std::vector<uint8_t> missing;      // parallel mask, 1 = missing
  std::vector<std::string> dropped;  // zero-variance variables removed at load
  std::vector<std::string> warnings;

  int n() const { return static_cast<int>(subject_ids.size()); }
  int p() const { return static_cast<int>(variable_names.size()); }
  double at(int row, int col) const { return values[static_cast<size_t>(row) * p() + col]; }
  bool is_missing(int row, int col) const {
    return missing[static_cast<size_t>(row) * p() + col] != 0;
  }
  int missing_count() const;

  // Column means over observed cells written into masked cells; mask kept so
  // callers can still report the imputation count.
  void impute_column_means();
};

// CSV with header row, `subject_id` first column, numeric cells, blank = missing.
PhenoTable load_phenotypes(const std::string& csv_path);
void save_phenotypes(const std::string& csv_path, const PhenoTable& table);

}  // namespace fusestrata
