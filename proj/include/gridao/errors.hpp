#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace gridao {

// Base class for every error the library throws on purpose.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Fewer observations than the operation requires.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

// Argument outside the operation's domain: non-finite values, mismatched
// shapes, parameters out of range.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

// No usable projection direction could be generated within the retry budget.
// When raised while scanning a grid, carries the offending grid point.
class DegenerateDataError : public Error {
 public:
  explicit DegenerateDataError(const std::string& msg) : Error(msg) {}
  DegenerateDataError(const std::string& msg, std::size_t row, std::size_t col)
      : Error(msg), row_(row), col_(col) {}

  bool has_grid_point() const { return row_.has_value(); }
  std::size_t row() const { return *row_; }
  std::size_t col() const { return *col_; }

 private:
  std::optional<std::size_t> row_;
  std::optional<std::size_t> col_;
};

// Grid too small for a stencil-based transform.
class GridTooSmallError : public Error {
 public:
  using Error::Error;
};

// A profile with too few observed cells to interpolate; names the profile.
class ImputationError : public Error {
 public:
  ImputationError(const std::string& msg, std::size_t profile_index)
      : Error(msg), profile_index_(profile_index) {}
  std::size_t profile_index() const { return profile_index_; }

 private:
  std::size_t profile_index_;
};

// Malformed file content; carries the byte offset of the failure when known.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& msg) : Error(msg) {}
  FormatError(const std::string& msg, std::uint64_t byte_offset)
      : Error(msg), byte_offset_(byte_offset) {}
  std::optional<std::uint64_t> byte_offset() const { return byte_offset_; }

 private:
  std::optional<std::uint64_t> byte_offset_;
};

// Recognizable but unsupported file variant (ASCII PNM, wide maxval, ...).
class UnsupportedFormatError : public FormatError {
 public:
  using FormatError::FormatError;
};

// Rank-deficient least-squares subproblem inside the trilinear fit.
class SingularUpdateError : public Error {
 public:
  using Error::Error;
};

}  // namespace gridao
