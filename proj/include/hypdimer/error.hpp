#pragma once

#include <stdexcept>
#include <string>

namespace hypdimer {

// Base class for every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed combinatorial input (rotation systems, schedules, vertex sets).
struct GraphError : Error {
  using Error::Error;
};

struct PackingError : Error {
  PackingError(const std::string& what, double worst, int node = -1)
      : Error(what), worst_residual(worst), vertex(node) {}
  double worst_residual;
  int vertex;
};

// A superposition region that violates its construction contract.
struct RegionError : Error {
  RegionError(const std::string& what, int white = -1) : Error(what), white_vertex(white) {}
  int white_vertex;
};

struct LinearAlgebraError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct MissingInputError : Error {
  using Error::Error;
};

// Raised when a computed object fails one of its certified invariants.
struct InvariantError : Error {
  using Error::Error;
};

}  // namespace hypdimer
