#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace shrinknet {

// Error categories map one-to-one onto the CLI exit codes.
enum class ErrorKind { input = 2, numerical = 3, config = 4 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(ErrorKind::input, what) {}
};

/// Unparseable cell or ragged row. Row and column are 1-based file coordinates.
class MalformedInputError : public InputError {
 public:
  MalformedInputError(const std::string& what, std::size_t row, std::size_t column)
      : InputError(what + " (row " + std::to_string(row) + ", column " + std::to_string(column) + ")"),
        row_(row),
        column_(column) {}
  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

class MissingDataError : public MalformedInputError {
 public:
  MissingDataError(std::size_t row, std::size_t column)
      : MalformedInputError("missing value", row, column) {}
};

class ValidationError : public InputError {
 public:
  explicit ValidationError(const std::string& what) : InputError(what) {}
};

class DegenerateGeneError : public InputError {
 public:
  explicit DegenerateGeneError(const std::string& gene)
      : InputError("gene '" + gene + "' has zero variance"), gene_(gene) {}
  const std::string& gene() const noexcept { return gene_; }

 private:
  std::string gene_;
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

}  // namespace shrinknet
