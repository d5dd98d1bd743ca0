#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ivforge {

// Category drives the CLI exit code: Config -> 2, Identification -> 3, Io -> 4.
enum class ErrorCategory { Config, Identification, Io };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}
  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

struct RankDeficientError final : Error {
  explicit RankDeficientError(std::size_t column_index)
      : Error(ErrorCategory::Identification,
              "rank-deficient design: column " + std::to_string(column_index) +
                  " is linearly dependent"),
        column(column_index) {}
  std::size_t column;
};

struct LengthMismatchError final : Error {
  LengthMismatchError(std::size_t lhs, std::size_t rhs)
      : Error(ErrorCategory::Config, "length mismatch: " + std::to_string(lhs) +
                                         " vs " + std::to_string(rhs)) {}
};

struct UnidentifiedError final : Error {
  explicit UnidentifiedError(const std::string& why)
      : Error(ErrorCategory::Identification, "unidentified: " + why) {}
};

struct AllUnidentifiedError final : Error {
  AllUnidentifiedError()
      : Error(ErrorCategory::Identification,
              "every replication failed the relevance condition") {}
};

struct MissingExcludedError final : Error {
  MissingExcludedError()
      : Error(ErrorCategory::Identification,
              "instrument needs an excluded column but the dataset has no z") {}
};

struct IndexOutOfRangeError final : Error {
  IndexOutOfRangeError(const std::string& what, std::size_t index, std::size_t bound)
      : Error(ErrorCategory::Config, what + " index " + std::to_string(index) +
                                         " out of range (size " +
                                         std::to_string(bound) + ")") {}
};

struct MissingColumnError final : Error {
  explicit MissingColumnError(const std::string& column_name)
      : Error(ErrorCategory::Config, "column '" + column_name + "' not found in file"),
        name(column_name) {}
  std::string name;
};

struct NonNumericCellError final : Error {
  NonNumericCellError(std::size_t row_index, std::size_t col_index, const std::string& cell)
      : Error(ErrorCategory::Config,
              "non-numeric cell '" + cell + "' at row " + std::to_string(row_index) +
                  ", column " + std::to_string(col_index)),
        row(row_index),
        col(col_index) {}
  std::size_t row;
  std::size_t col;
};

struct EmptyFileError final : Error {
  explicit EmptyFileError(const std::string& path)
      : Error(ErrorCategory::Config, "empty file: " + path) {}
};

struct IoError final : Error {
  explicit IoError(const std::string& message) : Error(ErrorCategory::Io, message) {}
};

struct DomainError final : Error {
  DomainError(const std::string& transform, std::size_t row_index, std::size_t col_index)
      : Error(ErrorCategory::Config,
              transform + " undefined at row " + std::to_string(row_index) +
                  ", column " + std::to_string(col_index)),
        row(row_index),
        col(col_index) {}
  std::size_t row;
  std::size_t col;
};

struct InvalidSpecError final : Error {
  explicit InvalidSpecError(const std::string& why)
      : Error(ErrorCategory::Config, "invalid spec: " + why) {}
};

struct NonPositiveDefiniteError final : Error {
  explicit NonPositiveDefiniteError(const std::string& what)
      : Error(ErrorCategory::Config, what + " is not positive definite") {}
};

struct NoRootError final : Error {
  NoRootError(double lo, double hi)
      : Error(ErrorCategory::Config,
              "calibration residual has no sign change on bracket (" +
                  std::to_string(lo) + ", " + std::to_string(hi) +
                  "); the target average partial effect is unattainable for this "
                  "model/variance combination"),
        bracket_lo(lo),
        bracket_hi(hi) {}
  double bracket_lo;
  double bracket_hi;
};

struct TooFewPerBinError final : Error {
  TooFewPerBinError(std::size_t bin_count, std::size_t min_size)
      : Error(ErrorCategory::Config,
              "saturation test bin with fewer than " + std::to_string(min_size) +
                  " rows (bins=" + std::to_string(bin_count) + ")") {}
};

}  // namespace ivforge
