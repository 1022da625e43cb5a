#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace exidx {

// Bad option/parameter combinations (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or unusable input data (CLI exit code 3). Carries the 1-based
// input row when known.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what, std::size_t row = 0)
      : std::runtime_error(row == 0 ? what : what + " (row " + std::to_string(row) + ")"),
        row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

// A statistic cannot be formed from the given sample (CLI exit code 4).
class DegeneracyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// No value of the series exceeds the requested level.
class NoExceedancesError : public DegeneracyError {
 public:
  using DegeneracyError::DegeneracyError;
  std::size_t n_exceedances() const noexcept { return 0; }
};

// Fewer observations (or exceedances) than the estimator needs.
class InsufficientDataError : public DegeneracyError {
 public:
  using DegeneracyError::DegeneracyError;
};

}  // namespace exidx
