#include "whiteout/io.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "whiteout/error.hpp"

namespace whiteout {

namespace {

std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_cell(const std::string& path, int row, const std::string& raw) {
  std::string cell = trim(raw);
  double v = 0;
  auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || res.ec != std::errc() || res.ptr != cell.data() + cell.size())
    throw ParseError(path, row, "not a number: '" + cell + "'");
  return v;
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  return in;
}

}  // namespace

Eigen::MatrixXd read_matrix_csv(const std::string& path) {
  auto in = open_or_throw(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) vals.push_back(parse_cell(path, row, cell));
    if (!rows.empty() && vals.size() != rows.front().size())
      throw ParseError(path, row,
                       "expected " + std::to_string(rows.front().size()) + " columns, got " +
                           std::to_string(vals.size()));
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw ParseError(path, 0, "empty matrix file");
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

Eigen::VectorXd read_vector_file(const std::string& path) {
  auto in = open_or_throw(path);
  std::vector<double> vals;
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    vals.push_back(parse_cell(path, row, line));
  }
  if (vals.empty()) throw ParseError(path, 0, "empty vector file");
  return Eigen::Map<Eigen::VectorXd>(vals.data(), vals.size());
}

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_file_atomic(const std::string& path, std::string_view contents) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write " + tmp);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) fail(ErrorKind::Io, "write failed: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorKind::Io, "rename failed: " + path + ": " + ec.message());
}

}  // namespace whiteout
