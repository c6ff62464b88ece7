#pragma once

#include <string>
#include <vector>

#include "mscreen/types.hpp"

namespace mscreen {

/// Numeric table with a header row. Parsing follows RFC 4180: optional
/// quoting, CRLF or LF line ends, '.' decimal separator, UTF-8. Errors carry
/// 1-based line numbers.
struct CsvTable {
  std::vector<std::string> header;
  Matrix values;  // rows x columns
};

CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text, const std::string& origin = "<csv>");

/// Feature matrix plus the binary label column extracted by name.
struct LabeledData {
  Matrix features;
  LabelVector labels;
  std::vector<std::string> feature_names;
};

LabeledData split_label(const CsvTable& table, const std::string& label_column);

/// Writes header x1,...,xp,<label_name> and one row per sample. Values are
/// printed with enough digits to round-trip doubles exactly.
void write_dataset_csv(const std::string& path, const Matrix& features,
                       const LabelVector& labels,
                       const std::string& label_name = "y");

}  // namespace mscreen
