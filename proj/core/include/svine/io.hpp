#pragma once

#include <string>
#include <vector>

#include "svine/matrix.hpp"

namespace svine {

/// A loaded CSV: numeric columns plus an optional leading label column
/// (dates) that the math ignores but output preserves.
struct Dataset {
  std::vector<std::string> columns;
  std::string date_column;          // empty when absent
  std::vector<std::string> dates;   // one per kept row when date_column set
  Matrix values;
  std::vector<int> rejected_rows;   // 1-based data rows dropped for missing cells
};

/// Reads a comma-separated file with a header row, '.' decimal separator.
/// Rows with empty cells are rejected (and reported); malformed numbers
/// raise a parse error with the line number.
Dataset read_csv(const std::string& path);

void write_csv(const std::string& path, const Dataset& ds);
void write_matrix_csv(const std::string& path, const Matrix& m,
                      const std::vector<std::string>& header);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace svine
