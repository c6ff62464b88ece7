#include "mscreen/csv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace mscreen {

namespace {

struct CsvParser {
  const std::string& text;
  const std::string& origin;
  std::size_t pos = 0;
  std::size_t line = 1;
  std::size_t record_line = 1;  // line where the current record started

  [[noreturn]] void fail(const std::string& what) const {
    throw DataError(origin + ":" + std::to_string(record_line) + ": " + what);
  }

  bool done() const { return pos >= text.size(); }

  // Reads one record; returns false at end of input.
  bool next_record(std::vector<std::string>& fields) {
    fields.clear();
    if (done()) return false;
    std::string field;
    bool quoted = false;
    record_line = line;
    for (;;) {
      if (done()) {
        if (quoted) fail("unterminated quoted field");
        fields.push_back(field);
        return true;
      }
      const char c = text[pos++];
      if (quoted) {
        if (c == '"') {
          if (!done() && text[pos] == '"') {
            field.push_back('"');
            ++pos;
          } else {
            quoted = false;
          }
        } else {
          if (c == '\n') ++line;
          field.push_back(c);
        }
      } else if (c == '"') {
        if (!field.empty()) fail("unexpected quote inside field");
        quoted = true;
      } else if (c == ',') {
        fields.push_back(field);
        field.clear();
      } else if (c == '\r') {
        if (!done() && text[pos] == '\n') ++pos;
        ++line;
        fields.push_back(field);
        return true;
      } else if (c == '\n') {
        ++line;
        fields.push_back(field);
        return true;
      } else {
        field.push_back(c);
      }
    }
  }
};

double parse_number(const std::string& field, const CsvParser& parser) {
  if (field.empty()) parser.fail("empty numeric field");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end != field.c_str() + field.size() || errno == ERANGE)
    parser.fail("not a number: '" + field + "'");
  return v;
}

}  // namespace

CsvTable parse_csv(const std::string& text, const std::string& origin) {
  CsvParser parser{text, origin};
  CsvTable table;
  std::vector<std::string> fields;
  if (!parser.next_record(table.header) || table.header.empty() ||
      (table.header.size() == 1 && table.header[0].empty()))
    parser.fail("missing header row");

  const std::size_t cols = table.header.size();
  std::vector<double> data;
  std::size_t rows = 0;
  while (parser.next_record(fields)) {
    if (fields.size() == 1 && fields[0].empty()) continue;  // trailing newline
    if (fields.size() != cols)
      parser.fail("expected " + std::to_string(cols) + " fields, got " +
                  std::to_string(fields.size()));
    for (const auto& f : fields) data.push_back(parse_number(f, parser));
    ++rows;
  }
  table.values.resize(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      table.values(r, c) = data[r * cols + c];
  return table;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), path);
}

LabeledData split_label(const CsvTable& table, const std::string& label_column) {
  Index label_idx = -1;
  for (std::size_t c = 0; c < table.header.size(); ++c)
    if (table.header[c] == label_column) label_idx = static_cast<Index>(c);
  if (label_idx < 0)
    throw DataError("label column '" + label_column + "' not found");
  const Index rows = table.values.rows();
  const Index cols = table.values.cols();
  if (rows < 2) throw DataError("need at least two data rows");

  LabeledData out;
  out.features.resize(rows, cols - 1);
  out.labels.resize(rows);
  Index fc = 0;
  for (Index c = 0; c < cols; ++c) {
    if (c == label_idx) continue;
    out.features.col(fc) = table.values.col(c);
    out.feature_names.push_back(table.header[c]);
    ++fc;
  }
  for (Index r = 0; r < rows; ++r) {
    const double v = table.values(r, label_idx);
    if (v != 0.0 && v != 1.0)
      throw DataError("label column must be binary {0,1}, row " +
                      std::to_string(r + 2) + " has " + std::to_string(v));
    out.labels[r] = static_cast<int>(v);
  }
  if (!out.features.allFinite())
    throw DataError("features contain NaN or infinite values");
  return out;
}

void write_dataset_csv(const std::string& path, const Matrix& features,
                       const LabelVector& labels, const std::string& label_name) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  const Index n = features.rows();
  const Index p = features.cols();
  if (labels.size() != n) throw DataError("label length mismatch");

  for (Index j = 0; j < p; ++j) out << 'x' << (j + 1) << ',';
  out << label_name << '\n';
  char buf[40];
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", features(i, j));
      out << buf << ',';
    }
    out << labels[i] << '\n';
  }
  if (!out) throw DataError("write failed for '" + path + "'");
}

}  // namespace mscreen
