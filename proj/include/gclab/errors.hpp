#pragma once

#include <stdexcept>
#include <string>

namespace gclab {

// Scaling or evaluation requested outside the admissible domain (K = 0, h <= 0, ...).
class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// Hyperbolicity degenerate: u = v, equivalently |l| unbounded.
class DegenerateStateError : public std::runtime_error {
 public:
  explicit DegenerateStateError(const std::string& what) : std::runtime_error(what) {}
};

// Improper integral does not converge for the given curvature profile.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

// Denominator of the comparison function reached zero inside the requested range.
class BlowUpError : public std::runtime_error {
 public:
  explicit BlowUpError(const std::string& what) : std::runtime_error(what) {}
};

// Fixed-step integrator could not meet the requested tolerance.
class RefinementError : public std::runtime_error {
 public:
  explicit RefinementError(const std::string& what) : std::runtime_error(what) {}
};

// Requested scan did not locate the feature (e.g. no positive tail for S(t)).
class NotFoundError : public std::runtime_error {
 public:
  explicit NotFoundError(const std::string& what) : std::runtime_error(what) {}
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gclab
