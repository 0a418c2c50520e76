#pragma once

#include <Eigen/Dense>
#include <string>
#include <string_view>

namespace whiteout {

Eigen::MatrixXd read_matrix_csv(const std::string& path);
Eigen::VectorXd read_vector_file(const std::string& path);

// Shortest representation that parses back to the same double.
std::string format_double(double x);

// Writes to a sibling temp file, then renames.
void write_file_atomic(const std::string& path, std::string_view contents);

}  // namespace whiteout
