// SPDX-License-Identifier: Apache-2.0
#include "twingrid/ml/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "twingrid/errors.hpp"

namespace twingrid::ml {

namespace {

std::vector<std::string> split_line(const std::string& line, char delimiter) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
    } else if (c == '"' && cell.empty()) {
      quoted = true;
    } else if (c == delimiter) {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

std::string_view trimmed(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

bool parse_cell(std::string_view raw, char decimal_mark, double& out) {
  const std::string_view cell = trimmed(raw);
  if (cell.empty()) return false;
  std::string text(cell);
  if (decimal_mark == ',') {
    for (char& c : text) {
      if (c == ',') c = '.';
    }
  }
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end && std::isfinite(out);
}

}  // namespace

RawTable parse_table(const std::string& text, char delimiter) {
  RawTable table;
  std::istringstream stream(text);
  std::string line;
  bool first = true;
  while (std::getline(stream, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_line(line, delimiter);
    if (first) {
      for (auto& cell : cells) table.header.emplace_back(trimmed(cell));
      first = false;
    } else {
      table.rows.push_back(std::move(cells));
    }
  }
  return table;
}

CleanTable clean_table(const std::string& text, const TableFormat& format) {
  const RawTable raw = parse_table(text, format.delimiter);
  if (raw.header.empty()) throw ValidationError("clean_table: empty input, no header row");

  const std::size_t width = raw.header.size();
  CleanTable out;
  out.columns = raw.header;

  std::vector<double> parsed;
  parsed.reserve(raw.rows.size() * width);
  std::size_t kept = 0;
  for (const auto& row : raw.rows) {
    if (row.size() != width) {
      ++out.dropped_rows;
      continue;
    }
    bool ok = true;
    std::vector<double> values(width);
    for (std::size_t j = 0; j < width; ++j) {
      if (!parse_cell(row[j], format.decimal_mark, values[j])) {
        ok = false;
        break;
      }
    }
    if (!ok) {
      ++out.dropped_rows;
      continue;
    }
    parsed.insert(parsed.end(), values.begin(), values.end());
    ++kept;
  }
  if (!raw.rows.empty() && kept == 0) {
    throw ValidationError("clean_table: every data row was dropped, no usable numerics");
  }

  out.values.resize(static_cast<Eigen::Index>(kept), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < kept; ++i) {
    for (std::size_t j = 0; j < width; ++j) {
      out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          parsed[i * width + j];
    }
  }
  return out;
}

TableFormat sniff_format(const std::string& text) {
  TableFormat format;
  const std::size_t eol = text.find('\n');
  const std::string header = text.substr(0, eol);
  format.delimiter = header.find(';') != std::string::npos ? ';' : ',';

  if (eol != std::string::npos) {
    std::size_t next = text.find('\n', eol + 1);
    const std::string first_row =
        text.substr(eol + 1, next == std::string::npos ? std::string::npos : next - eol - 1);
    for (const auto& cell : split_line(first_row, format.delimiter)) {
      const std::string_view v = trimmed(cell);
      const std::size_t comma = v.find(',');
      if (comma != std::string_view::npos && comma > 0 && comma + 1 < v.size() &&
          std::isdigit(static_cast<unsigned char>(v[comma - 1])) &&
          std::isdigit(static_cast<unsigned char>(v[comma + 1]))) {
        format.decimal_mark = ',';
        break;
      }
    }
  }
  return format;
}

LabeledDataset label_and_merge(const CleanTable& normal, const CleanTable& attack) {
  if (normal.columns != attack.columns) {
    throw ValidationError("label_and_merge: header mismatch between normal and attack tables");
  }
  LabeledDataset out;
  out.feature_names = normal.columns;
  const Eigen::Index n0 = normal.values.rows();
  const Eigen::Index n1 = attack.values.rows();
  out.x.resize(n0 + n1, normal.values.cols());
  out.x.topRows(n0) = normal.values;
  out.x.bottomRows(n1) = attack.values;
  out.y = Eigen::VectorXi::Zero(n0 + n1);
  out.y.tail(n1).setOnes();
  return out;
}

LabeledDataset dataset_from_labeled(const CleanTable& table, const std::string& label_column) {
  const auto it = std::find(table.columns.begin(), table.columns.end(), label_column);
  if (it == table.columns.end()) {
    throw ValidationError("dataset_from_labeled: no '" + label_column + "' column");
  }
  const Eigen::Index label_idx = it - table.columns.begin();
  const Eigen::Index n = table.values.rows();
  const Eigen::Index d = table.values.cols() - 1;

  LabeledDataset out;
  out.x.resize(n, d);
  out.y.resize(n);
  Eigen::Index col = 0;
  for (Eigen::Index j = 0; j < table.values.cols(); ++j) {
    if (j == label_idx) continue;
    out.x.col(col++) = table.values.col(j);
    out.feature_names.push_back(table.columns[static_cast<std::size_t>(j)]);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = table.values(i, label_idx);
    if (v != 0.0 && v != 1.0) {
      throw ValidationError("dataset_from_labeled: non-binary label at row " + std::to_string(i));
    }
    out.y[i] = static_cast<int>(v);
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("read_text_file: cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("read_text_file: read failed for " + path.string());
  return buffer.str();
}

std::string format_cell(double value, const TableFormat& format) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  std::string text(buf, ptr);
  (void)ec;
  if (format.decimal_mark == ',') {
    for (char& c : text) {
      if (c == '.') c = ',';
    }
  }
  if (text.find(format.delimiter) != std::string::npos) {
    text.insert(text.begin(), '"');
    text.push_back('"');
  }
  return text;
}

void write_table(const std::filesystem::path& path, const std::vector<std::string>& columns,
                 const Matrixd& values, const TableFormat& format) {
  if (values.rows() > 0 && static_cast<std::size_t>(values.cols()) != columns.size()) {
    throw ValidationError("write_table: column count mismatch");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("write_table: cannot open " + path.string());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (j > 0) out << format.delimiter;
    out << columns[j];
  }
  out << '\n';
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      if (j > 0) out << format.delimiter;
      out << format_cell(values(i, j), format);
    }
    out << '\n';
  }
  if (!out) throw IoError("write_table: write failed for " + path.string());
}

}  // namespace twingrid::ml
