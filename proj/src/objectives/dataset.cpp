#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>
#include <vector>

#include "signflow/objectives.hpp"

namespace signflow {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
  throw ConfigError("dataset line " + std::to_string(line) + ": " + msg);
}

double parse_number(std::string_view field, std::size_t line) {
  double v = 0.0;
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (field.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
    fail(line, "'" + std::string(field) + "' is not a finite number");
  }
  return v;
}

}  // namespace

Dataset parse_csv_dataset(const std::string& text) {
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  std::vector<std::string_view> header;
  std::string header_line;
  // Skip a UTF-8 byte order mark and blank leading lines.
  while (std::getline(in, raw)) {
    ++line_no;
    if (line_no == 1 && raw.rfind("\xEF\xBB\xBF", 0) == 0) raw.erase(0, 3);
    if (!trim(raw).empty()) break;
  }
  if (trim(raw).empty()) throw ConfigError("dataset: file has no header row");
  header_line = raw;
  header = split_fields(header_line);

  int label_col = -1;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == "label") {
      if (label_col >= 0) fail(line_no, "duplicate 'label' column");
      label_col = static_cast<int>(j);
    }
  }
  if (label_col < 0) fail(line_no, "header has no 'label' column");
  const std::size_t width = header.size();
  if (width < 2) fail(line_no, "header needs at least one feature column");

  std::vector<std::vector<double>> rows;
  std::vector<double> labels;
  while (std::getline(in, raw)) {
    ++line_no;
    if (trim(raw).empty()) continue;
    const auto fields = split_fields(raw);
    if (fields.size() != width) {
      fail(line_no, "expected " + std::to_string(width) + " fields, found " +
                        std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(width - 1);
    for (std::size_t j = 0; j < width; ++j) {
      const double v = parse_number(fields[j], line_no);
      if (static_cast<int>(j) == label_col) {
        if (v != 1.0 && v != -1.0 && v != 0.0) {
          fail(line_no, "label must be -1/+1 or 0/1, got " + std::string(fields[j]));
        }
        labels.push_back(v);
      } else {
        row.push_back(v);
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("dataset: no data rows");

  bool has_zero = false;
  bool has_minus = false;
  for (double y : labels) {
    has_zero = has_zero || y == 0.0;
    has_minus = has_minus || y == -1.0;
  }
  if (has_zero && has_minus) {
    throw ConfigError("dataset: labels mix the {-1,+1} and {0,1} conventions");
  }

  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(width - 1));
  out.labels.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t m = 0; m < rows.size(); ++m) {
    for (std::size_t j = 0; j + 1 < width; ++j) out.features(m, j) = rows[m][j];
    out.labels[m] = labels[m] == 0.0 ? -1.0 : labels[m];
  }
  return out;
}

Dataset load_csv_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("dataset: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv_dataset(buf.str());
}

void standardize_columns(Matrix& features) {
  const auto n = static_cast<double>(features.rows());
  for (Eigen::Index j = 0; j < features.cols(); ++j) {
    auto col = features.col(j);
    const double scale = col.cwiseAbs().maxCoeff();
    const double mean = col.sum() / n;
    col.array() -= mean;
    const double sd = std::sqrt(col.squaredNorm() / n);
    if (sd > 1e-12 * scale) {
      col /= sd;
    } else {
      col.setZero();
    }
  }
}

}  // namespace signflow
