#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace kmlocal {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation (non-positive
/// bandwidth, lag longer than the series, empty grid, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Vector or matrix dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A fit-function returned a non-finite value.
class EvaluationError : public Error {
 public:
  EvaluationError(std::string label, double x)
      : Error("fit-function '" + label + "' is not finite at x = " + std::to_string(x)),
        label_(std::move(label)),
        x_(x) {}

  const std::string& label() const noexcept { return label_; }
  double x() const noexcept { return x_; }

 private:
  std::string label_;
  double x_;
};

/// Unknown name in a registry (kernel family, built-in process, ...).
class LookupError : public Error {
 public:
  using Error::Error;
};

/// The Euler-Maruyama recurrence hit a negative diffusion value.
class SimulationError : public Error {
 public:
  SimulationError(const std::string& what, std::size_t index, std::vector<double> state)
      : Error(what), index_(index), state_(std::move(state)) {}

  std::size_t index() const noexcept { return index_; }
  const std::vector<double>& state() const noexcept { return state_; }

 private:
  std::size_t index_;
  std::vector<double> state_;
};

/// The (weighted) Gram matrix of a moment fit could not be solved reliably.
class SolveRejected : public Error {
 public:
  SolveRejected(const std::string& what, double condition)
      : Error(what), condition_(condition) {}

  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

/// Malformed or inconsistent input data. `line()` is 1-based, 0 when unknown.
class InputError : public Error {
 public:
  explicit InputError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace kmlocal
