#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lpvplan {

/// Base class of every error raised by the planner.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Start or goal position is not a valid query point (inside an obstacle).
class InvalidQuery : public Error {
 public:
  using Error::Error;
};

/// The goal cannot be reached through the visibility graph.
class NoPath : public Error {
 public:
  using Error::Error;
};

/// Reference polyline has fewer than two distinct points.
class InvalidPath : public Error {
 public:
  using Error::Error;
};

/// Lower and upper corridor bounds meet or cross at some prediction step.
class CorridorInfeasible : public Error {
 public:
  CorridorInfeasible(std::size_t step, const std::string& what)
      : Error(what), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// relaxCorridor was called on a corridor that is already at emergency level.
class AlreadyRelaxed : public Error {
 public:
  using Error::Error;
};

/// No feasible trajectory has ever been buffered.
class NoFallbackAvailable : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent scenario description.
class ScenarioError : public Error {
 public:
  using Error::Error;
};

}  // namespace lpvplan
