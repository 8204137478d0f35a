#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cfm/errors.hpp"

namespace cfm {

// Deterministic CSV emission: fixed column order, 9 significant digits,
// '.' decimal separator, LF line endings, so goldens are bit-stable on one
// platform.  A tolerance compare rides along for cross-platform drift.

inline std::string format_number(double x, int sig = 9) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", sig, x);
  return buf;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> cells) {
    if (cells.size() != header.size())
      throw ConfigError("CsvTable: row width does not match header");
    rows.push_back(std::move(cells));
  }

  std::string to_string() const {
    std::ostringstream os;
    auto line = [&os](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) os << ',';
        os << cells[i];
      }
      os << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return os.str();
  }

  void write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary); // binary keeps LF on any platform
    if (!out) throw IoError("cannot open for writing: " + path);
    out << to_string();
    if (!out) throw IoError("write failed: " + path);
  }
};

// Split one CSV line; no quoting support (none of our tables need it).
inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

inline std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(split_csv_line(line));
  }
  return rows;
}

struct CsvCompareResult {
  bool match = true;
  std::string message; // first mismatch, human readable
};

// Cell-by-cell comparison: numeric cells within relative tolerance rtol
// (absolute below 1e-300), non-numeric cells must be identical.
inline CsvCompareResult compare_csv(const std::vector<std::vector<std::string>>& a,
                                    const std::vector<std::vector<std::string>>& b,
                                    double rtol) {
  CsvCompareResult res;
  auto fail = [&res](std::string msg) {
    res.match = false;
    res.message = std::move(msg);
    return res;
  };
  if (a.size() != b.size())
    return fail("row count " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != b[i].size()) return fail("row " + std::to_string(i) + ": column count");
    for (std::size_t j = 0; j < a[i].size(); ++j) {
      const std::string &x = a[i][j], &y = b[i][j];
      char* ex = nullptr;
      char* ey = nullptr;
      double vx = std::strtod(x.c_str(), &ex);
      double vy = std::strtod(y.c_str(), &ey);
      bool nx = ex && *ex == '\0' && !x.empty();
      bool ny = ey && *ey == '\0' && !y.empty();
      if (nx && ny) {
        double scale = std::max({std::abs(vx), std::abs(vy), 1e-300});
        if (std::abs(vx - vy) > rtol * scale)
          return fail("row " + std::to_string(i) + " col " + std::to_string(j) + ": " + x +
                      " vs " + y);
      } else if (x != y) {
        return fail("row " + std::to_string(i) + " col " + std::to_string(j) + ": '" + x +
                    "' vs '" + y + "'");
      }
    }
  }
  return res;
}

} // namespace cfm
