#pragma once

#include <stdexcept>
#include <string>

namespace whiteout {

enum class ErrorKind {
  ParameterOutOfRange,
  NotPsdDominating,
  InsufficientDof,
  SingularMatrix,
  Numerical,
  Dimension,
  TieOrZero,
  Inapplicable,
  Io,
};

const char* to_string(ErrorKind kind);

class WhiteoutError : public std::runtime_error {
 public:
  WhiteoutError(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised by CSV readers; row is 1-based, 0 when the file itself is the problem.
class ParseError : public WhiteoutError {
 public:
  ParseError(const std::string& path, int row, const std::string& msg)
      : WhiteoutError(ErrorKind::Io, path + ":" + std::to_string(row) + ": " + msg),
        path_(path),
        row_(row) {}
  const std::string& path() const { return path_; }
  int row() const { return row_; }

 private:
  std::string path_;
  int row_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
  throw WhiteoutError(kind, msg);
}

inline void require(bool ok, ErrorKind kind, const std::string& msg) {
  if (!ok) fail(kind, msg);
}

}  // namespace whiteout
