#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace metatune {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. `line()` is 1-based, 0 when not tied to a line.
class FormatError : public Error {
public:
  FormatError(const std::string &what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class VersionError : public Error {
public:
  using Error::Error;
};

class DimensionMismatch : public Error {
public:
  using Error::Error;
};

class EmptyTrainingSet : public Error {
public:
  EmptyTrainingSet() : Error("training set is empty") {}
};

/// The backend executable could not be started at all.
class SpawnFailure : public Error {
public:
  using Error::Error;
};

class DegenerateSplit : public Error {
public:
  using Error::Error;
};

class BenchmarkMismatch : public Error {
public:
  using Error::Error;
};

class CampaignInterrupted : public Error {
public:
  using Error::Error;
};

} // namespace metatune
