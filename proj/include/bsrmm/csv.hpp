#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace bsrmm {

// Minimal CSV support for the project's fixed schemas: header row, first
// column is the id column, numeric payload written with 17 significant
// digits so doubles round-trip bit-exactly.

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const CsvTable& table);

std::string format_double(double v);  // %.17g
// Parses a cell; empty cells map to NaN. Throws input_error with the cell
// location on garbage.
double parse_double(const std::string& cell, const std::string& context);

struct LabeledMatrix {
  std::vector<std::string> row_ids;
  std::vector<std::string> col_ids;
  Eigen::MatrixXd values;
};

LabeledMatrix read_matrix_csv(const std::string& path);
void write_matrix_csv(const std::string& path, const std::string& id_header,
                      const std::vector<std::string>& row_ids,
                      const std::vector<std::string>& col_ids, const Eigen::MatrixXd& values);

}  // namespace bsrmm
