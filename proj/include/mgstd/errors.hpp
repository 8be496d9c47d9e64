#pragma once

#include <stdexcept>
#include <string>

namespace mgstd {

/// Malformed or inconsistent input data (bad CSV rows, non-finite values,
/// points outside the grid domain, ...).
class data_error : public std::runtime_error {
 public:
  explicit data_error(const std::string& what) : std::runtime_error(what) {}
};

/// A point fell outside the grid domain.
class out_of_domain_error : public data_error {
 public:
  explicit out_of_domain_error(const std::string& what) : data_error(what) {}
};

/// A numeric procedure failed to produce a result (threshold selection found
/// no admissible value, trajectory blow-up, degenerate covariance, ...).
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mgstd
