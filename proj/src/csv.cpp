#include "bsrmm/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "bsrmm/errors.hpp"

namespace bsrmm {

namespace {

std::vector<std::string> split_line(const std::string& line, const std::string& context) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"' && cur.empty()) {
      quoted = true;
    } else if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  if (quoted) throw input_error("csv: unterminated quote in " + context);
  cells.push_back(cur);
  return cells;
}

bool needs_quoting(const std::string& s) {
  return s.find(',') != std::string::npos || s.find('"') != std::string::npos;
}

void write_cell(std::ofstream& out, const std::string& s) {
  if (!needs_quoting(s)) {
    out << s;
    return;
  }
  out << '"';
  for (char ch : s) {
    if (ch == '"') out << '"';
    out << ch;
  }
  out << '"';
}

}  // namespace

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open file: " + path);
  CsvTable table;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() && in.peek() == EOF) break;
    std::ostringstream ctx;
    ctx << path << ":" << line_no;
    auto cells = split_line(line, ctx.str());
    if (line_no == 1)
      table.header = std::move(cells);
    else
      table.rows.push_back(std::move(cells));
  }
  if (table.header.empty()) throw input_error("csv: empty file: " + path);
  for (size_t r = 0; r < table.rows.size(); ++r) {
    if (table.rows[r].size() != table.header.size()) {
      std::ostringstream msg;
      msg << "csv: row " << r + 2 << " of " << path << " has " << table.rows[r].size()
          << " cells, header has " << table.header.size();
      throw input_error(msg.str());
    }
  }
  return table;
}

void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot write file: " + path);
  for (size_t c = 0; c < table.header.size(); ++c) {
    if (c) out << ',';
    write_cell(out, table.header[c]);
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      write_cell(out, row[c]);
    }
    out << '\n';
  }
  if (!out) throw input_error("write failed: " + path);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& cell, const std::string& context) {
  if (cell.empty()) return std::numeric_limits<double>::quiet_NaN();
  const char* begin = cell.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  while (end && *end == ' ') ++end;
  if (end == begin || (end && *end != '\0'))
    throw input_error("csv: cannot parse number '" + cell + "' at " + context);
  return v;
}

LabeledMatrix read_matrix_csv(const std::string& path) {
  const CsvTable table = read_csv(path);
  if (table.header.size() < 2) throw input_error("matrix csv needs an id column plus data: " + path);
  LabeledMatrix m;
  m.col_ids.assign(table.header.begin() + 1, table.header.end());
  const size_t p = m.col_ids.size();
  m.values.resize(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(p));
  m.row_ids.reserve(table.rows.size());
  for (size_t r = 0; r < table.rows.size(); ++r) {
    m.row_ids.push_back(table.rows[r][0]);
    for (size_t c = 0; c < p; ++c) {
      std::ostringstream ctx;
      ctx << path << " row " << r + 2 << " col " << c + 2;
      m.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          parse_double(table.rows[r][c + 1], ctx.str());
    }
  }
  return m;
}

void write_matrix_csv(const std::string& path, const std::string& id_header,
                      const std::vector<std::string>& row_ids,
                      const std::vector<std::string>& col_ids, const Eigen::MatrixXd& values) {
  if (values.rows() != static_cast<Eigen::Index>(row_ids.size()) ||
      values.cols() != static_cast<Eigen::Index>(col_ids.size()))
    throw input_error("write_matrix_csv: shape mismatch");
  std::ofstream out(path);
  if (!out) throw input_error("cannot write file: " + path);
  write_cell(out, id_header);
  for (const auto& c : col_ids) {
    out << ',';
    write_cell(out, c);
  }
  out << '\n';
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    write_cell(out, row_ids[static_cast<size_t>(r)]);
    for (Eigen::Index c = 0; c < values.cols(); ++c) out << ',' << format_double(values(r, c));
    out << '\n';
  }
  if (!out) throw input_error("write failed: " + path);
}

}  // namespace bsrmm
