#pragma once

#include <stdexcept>
#include <string>

namespace glfem {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Requested size exceeds a hard capacity guard (e.g. refinement level).
class CapacityError : public Error {
public:
  using Error::Error;
};

/// Invalid configuration value (unsupported degree, unknown preset, ...).
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Structural mismatch between objects (dimensions, non-nested meshes, ...).
class StructuralError : public Error {
public:
  using Error::Error;
};

/// A numerical procedure failed (solver breakdown, NaN, singular system).
class NumericalError : public Error {
public:
  using Error::Error;
};

/// An iterative method did not reach its tolerance within its budget.
class ConvergenceError : public Error {
public:
  using Error::Error;
};

/// Invalid input data (non-finite function value, malformed file, ...).
class InputError : public Error {
public:
  using Error::Error;
};

}  // namespace glfem
