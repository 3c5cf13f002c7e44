// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "twingrid/dense.hpp"

namespace twingrid::ml {

/// Text table as read from disk, before numeric parsing.
struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Delimited-text dialect. Decimal commas are only meaningful when they can
/// be told apart from the delimiter (quoted fields or a non-comma delimiter).
struct TableFormat {
  char delimiter = ',';
  char decimal_mark = '.';
};

struct CleanTable {
  std::vector<std::string> columns;
  Matrixd values;  // rows that parsed fully
  std::size_t dropped_rows = 0;
};

/// Numeric samples with binary labels.
struct LabeledDataset {
  Matrixd x;
  Eigen::VectorXi y;
  std::vector<std::string> feature_names;

  Eigen::Index size() const { return x.rows(); }
  Eigen::Index features() const { return x.cols(); }
};

/// Splits delimited text into cells with RFC-4180-style quoting.
RawTable parse_table(const std::string& text, char delimiter);

/// Parses a delimited text table to 64-bit floats. Rows with missing,
/// extra, or unparseable cells are dropped and counted. Throws on an empty
/// input or when every data row is dropped.
CleanTable clean_table(const std::string& text, const TableFormat& format);

/// Guesses delimiter and decimal mark from the header and first data row.
TableFormat sniff_format(const std::string& text);

/// Stacks a normal-operation table over an attack table, labeling rows 0/1.
/// Headers must match exactly, including order.
LabeledDataset label_and_merge(const CleanTable& normal, const CleanTable& attack);

/// Converts a combined table whose last column is the 0/1 label.
LabeledDataset dataset_from_labeled(const CleanTable& table,
                                    const std::string& label_column = "label");

/// Reads a file into memory; IoError with path context on failure.
std::string read_text_file(const std::filesystem::path& path);

/// Serializes one numeric value under the given dialect, quoting when the
/// rendered text contains the delimiter.
std::string format_cell(double value, const TableFormat& format);

/// Writes a table of numeric rows with a header line.
void write_table(const std::filesystem::path& path, const std::vector<std::string>& columns,
                 const Matrixd& values, const TableFormat& format);

}  // namespace twingrid::ml
