#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dqgnn {

/// Process exit status for each error family. The CLI maps exceptions to these.
enum class ExitCode : int {
  kSuccess = 0,
  kUsage = 1,
  kData = 2,
  kInternal = 3,
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

/// Caller passed an argument outside an operation's domain.
class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ExitCode::kUsage, what) {}
};

/// A state would exceed the simulator's qubit ceiling.
class CapacityError : public Error {
 public:
  CapacityError(const std::string& what, int limit)
      : Error(ExitCode::kUsage, what), limit_(limit) {}
  int limit() const noexcept { return limit_; }

 private:
  int limit_;
};

/// Malformed or inconsistent input data.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ExitCode::kData, what) {}
};

/// Dataset file problem, located by file and 1-based line (0 when the whole file is at fault).
class ParseError : public DataError {
 public:
  enum class Kind { kMissingFile, kBadToken, kDanglingReference, kTooManyLabels, kInconsistent };

  ParseError(Kind kind, std::string file, std::size_t line, const std::string& detail)
      : DataError(file + (line ? ":" + std::to_string(line) : std::string()) + ": " + detail),
        kind_(kind),
        file_(std::move(file)),
        line_(line) {}

  Kind kind() const noexcept { return kind_; }
  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  Kind kind_;
  std::string file_;
  std::size_t line_;
};

}  // namespace dqgnn
