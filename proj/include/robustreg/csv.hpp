#pragma once

#include "robustreg/types.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace robustreg {

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace detail

// CSV with a header row, comma delimiter, '.' decimal separator. The response
// column becomes y; every other column becomes a covariate in header order.
// A leading non-numeric column (e.g. row names) is used for row labels.
inline Dataset dataset_from_csv(const std::string& path,
                                const std::string& response_column,
                                bool intercept = true) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataError("empty file: " + path);
  std::vector<std::string> header = detail::split_csv_line(line);
  for (auto& h : header) h = detail::trim(h);

  int response_idx = -1;
  for (size_t j = 0; j < header.size(); ++j)
    if (header[j] == response_column) response_idx = static_cast<int>(j);
  if (response_idx < 0)
    throw DataError("response column '" + response_column + "' not found in " +
                    path);

  std::vector<std::vector<std::string>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    auto fields = detail::split_csv_line(line);
    if (fields.size() != header.size())
      throw DataError("row " + std::to_string(lineno) + ": expected " +
                      std::to_string(header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    rows.push_back(std::move(fields));
  }
  if (rows.empty()) throw DataError("no data rows in " + path);

  auto numeric = [](const std::string& s, double& out) {
    const std::string t = detail::trim(s);
    if (t.empty()) return false;
    char* end = nullptr;
    out = std::strtod(t.c_str(), &end);
    return end == t.c_str() + t.size();
  };

  // A column is a label column if its first data cell is non-numeric and it
  // is not the response.
  std::vector<int> covariate_cols;
  int label_col = -1;
  for (size_t j = 0; j < header.size(); ++j) {
    if (static_cast<int>(j) == response_idx) continue;
    double v;
    if (!numeric(rows[0][j], v) && label_col < 0) {
      label_col = static_cast<int>(j);
      continue;
    }
    covariate_cols.push_back(static_cast<int>(j));
  }

  const int n = static_cast<int>(rows.size());
  const int p = static_cast<int>(covariate_cols.size());
  Matrix x(n, p);
  Vector y(n);
  std::vector<std::string> labels;
  for (int i = 0; i < n; ++i) {
    double v;
    for (int k = 0; k < p; ++k) {
      const int j = covariate_cols[static_cast<size_t>(k)];
      if (!numeric(rows[i][j], v))
        throw DataError("non-numeric cell at row " + std::to_string(i + 2) +
                        ", column '" + header[static_cast<size_t>(j)] + "'");
      x(i, k) = v;
    }
    if (!numeric(rows[i][static_cast<size_t>(response_idx)], v))
      throw DataError("non-numeric cell at row " + std::to_string(i + 2) +
                      ", column '" + response_column + "'");
    y(i) = v;
    if (label_col >= 0)
      labels.push_back(detail::trim(rows[i][static_cast<size_t>(label_col)]));
  }
  return Dataset(std::move(x), std::move(y), intercept, std::move(labels));
}

}  // namespace robustreg
