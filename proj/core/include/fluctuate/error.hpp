#pragma once

#include <stdexcept>
#include <string>

namespace fluctuate {

/// Raised when a numerical procedure fails to converge or becomes unstable.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised for malformed or missing input data (files, counts, tables).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fluctuate
