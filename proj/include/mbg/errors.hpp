#pragma once

#include <stdexcept>
#include <string>

namespace mbg {

// Parameter outside the region where the requested quantity is defined
// (gamma poles, support violations, invalid shape parameters).
class domain_error : public std::domain_error {
 public:
  explicit domain_error(const std::string& what) : std::domain_error(what) {}
};

// A truncated series failed to converge within the requested degree.
class convergence_error : public std::runtime_error {
 public:
  explicit convergence_error(const std::string& what) : std::runtime_error(what) {}
};

// A Monte Carlo estimator is statistically unusable (degenerate weights).
class estimator_error : public std::runtime_error {
 public:
  explicit estimator_error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input file / job description.
class schema_error : public std::invalid_argument {
 public:
  explicit schema_error(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace mbg
