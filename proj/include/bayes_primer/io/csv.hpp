#ifndef BAYES_PRIMER_IO_CSV_HPP_
#define BAYES_PRIMER_IO_CSV_HPP_

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "bayes_primer/errors.hpp"

// Minimal CSV reading/writing: RFC-4180-style quoting, '\n' line
// endings, one header row.  Lines starting with '#' are metadata
// comments (the CLI writes the resolved seed this way) and are skipped
// on input.

namespace bayes_primer::io {

// Shortest round-trippable decimal rendering of a double; used for every
// numeric cell so outputs are byte-stable.
inline std::string format_double(double x) {
  if (std::isfinite(x) && x == std::floor(x) && std::fabs(x) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.0f", x);
    return buf;
  }
  for (int prec = 1; prec <= 16; ++prec) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.*g", prec, x);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == x) return buf;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline std::string quote_field(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column_index(const std::string& name) const {
    for (std::size_t j = 0; j < header.size(); ++j) {
      if (header[j] == name) return j;
    }
    throw data_error("csv: missing column '" + name + "'");
  }

  bool has_column(const std::string& name) const {
    for (const auto& h : header) {
      if (h == name) return true;
    }
    return false;
  }

  // Typed read with row/column context in the error message; rows are
  // numbered 1-based over data rows.
  double numeric_at(std::size_t row, std::size_t col) const {
    const std::string& cell = rows[row][col];
    try {
      std::size_t pos = 0;
      const double v = std::stod(cell, &pos);
      if (pos != cell.size()) throw std::invalid_argument(cell);
      return v;
    } catch (const std::exception&) {
      throw data_error("csv: non-numeric cell '" + cell + "' at row " +
                       std::to_string(row + 1) + ", column '" + header[col] +
                       "'");
    }
  }

  std::vector<double> numeric_column(const std::string& name) const {
    const std::size_t j = column_index(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out.push_back(numeric_at(i, j));
    }
    return out;
  }
};

namespace detail {

inline std::vector<std::string> split_record(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace detail

inline CsvTable parse_csv(std::string_view text) {
  CsvTable table;
  std::string line;
  std::istringstream in{std::string(text)};
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto fields = detail::split_record(line);
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
    } else {
      if (fields.size() != table.header.size()) {
        throw data_error("csv: row with " + std::to_string(fields.size()) +
                         " fields, expected " +
                         std::to_string(table.header.size()));
      }
      table.rows.push_back(std::move(fields));
    }
  }
  if (!have_header) throw data_error("csv: empty input");
  return table;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline CsvTable read_csv(const std::string& path) {
  return parse_csv(read_file(path));
}

}  // namespace bayes_primer::io

#endif  // BAYES_PRIMER_IO_CSV_HPP_
