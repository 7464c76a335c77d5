#include "svine/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace svine {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // trim spaces and a trailing CR
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

bool parse_double(const std::string& s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last;
}

}  // namespace

Dataset read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error(path + ": empty file");
  }
  Dataset ds;
  std::vector<std::string> header = split_line(line);
  if (header.empty()) throw std::runtime_error(path + ": empty header row");

  std::vector<std::vector<double>> rows;
  std::vector<std::string> dates;
  bool date_col = false;
  bool first_data_row = true;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_line(line);
    if (fields.size() != header.size()) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected " + std::to_string(header.size()) +
                               " fields, got " + std::to_string(fields.size()));
    }
    if (first_data_row) {
      // a non-numeric first field makes the first column a label column
      double tmp;
      date_col = !fields[0].empty() && !parse_double(fields[0], tmp);
      if (date_col) {
        ds.date_column = header[0];
        ds.columns.assign(header.begin() + 1, header.end());
      } else {
        ds.columns = header;
      }
      if (ds.columns.empty()) {
        throw std::runtime_error(path + ": no numeric columns");
      }
      first_data_row = false;
    }
    const std::size_t start = date_col ? 1 : 0;
    bool missing = false;
    for (std::size_t i = start; i < fields.size(); ++i) {
      if (fields[i].empty() || fields[i] == "NA" || fields[i] == "nan") {
        missing = true;
      }
    }
    const int data_row = line_no - 1;  // 1-based among data rows
    if (missing) {
      ds.rejected_rows.push_back(data_row);
      continue;
    }
    std::vector<double> row(fields.size() - start);
    for (std::size_t i = start; i < fields.size(); ++i) {
      if (!parse_double(fields[i], row[i - start])) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": cannot parse '" + fields[i] +
                                 "' as a number");
      }
    }
    rows.push_back(std::move(row));
    if (date_col) dates.push_back(fields[0]);
  }
  if (rows.empty()) throw std::runtime_error(path + ": no data rows");
  ds.values = Matrix(static_cast<int>(rows.size()),
                     static_cast<int>(ds.columns.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      ds.values.at(static_cast<int>(r), static_cast<int>(c)) = rows[r][c];
    }
  }
  ds.dates = std::move(dates);
  return ds;
}

void write_csv(const std::string& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  if (!ds.date_column.empty()) out << ds.date_column << ',';
  for (std::size_t c = 0; c < ds.columns.size(); ++c) {
    out << ds.columns[c] << (c + 1 < ds.columns.size() ? "," : "\n");
  }
  for (int r = 0; r < ds.values.rows; ++r) {
    if (!ds.date_column.empty()) {
      out << (r < static_cast<int>(ds.dates.size()) ? ds.dates[r] : "") << ',';
    }
    for (int c = 0; c < ds.values.cols; ++c) {
      out << ds.values.at(r, c) << (c + 1 < ds.values.cols ? "," : "\n");
    }
  }
}

void write_matrix_csv(const std::string& path, const Matrix& m,
                      const std::vector<std::string>& header) {
  Dataset ds;
  ds.columns = header;
  ds.values = m;
  write_csv(path, ds);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

}  // namespace svine
