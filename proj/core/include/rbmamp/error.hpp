#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rbmamp {

/// Broad error classes. Each maps to a distinct process exit code in the CLI.
enum class ErrorKind { Validation, Io, Divergence };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Bad dimensions, out-of-range parameters, malformed configuration.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorKind::Validation, what) {}
};

/// Unreadable/unwritable files and malformed binary containers.
/// `offset` is the byte offset at which parsing failed, when known.
class IoError : public Error {
 public:
  static constexpr std::size_t kNoOffset = static_cast<std::size_t>(-1);

  explicit IoError(const std::string& what, std::size_t offset = kNoOffset)
      : Error(ErrorKind::Io, what), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// A non-finite value appeared inside an iterative solver.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int iteration)
      : Error(ErrorKind::Divergence, what), iteration_(iteration) {}
  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

/// 0 success, 2 validation, 3 I/O, 4 numerical divergence.
int exit_code(ErrorKind kind) noexcept;

}  // namespace rbmamp
