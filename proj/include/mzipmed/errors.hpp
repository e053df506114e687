#ifndef MZIPMED_ERRORS_HPP
#define MZIPMED_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mzipmed {

struct NonFiniteError : std::runtime_error {
  explicit NonFiniteError(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionError : std::invalid_argument {
  explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

struct RankDeficientError : std::runtime_error {
  explicit RankDeficientError(const std::string& what) : std::runtime_error(what) {}
};

struct SingularMatrixError : std::runtime_error {
  explicit SingularMatrixError(const std::string& what) : std::runtime_error(what) {}
};

struct DegenerateOutcomeError : std::runtime_error {
  explicit DegenerateOutcomeError(const std::string& what) : std::runtime_error(what) {}
};

struct NotConvergedError : std::runtime_error {
  explicit NotConvergedError(const std::string& what) : std::runtime_error(what) {}
};

struct SpecMismatchError : std::invalid_argument {
  explicit SpecMismatchError(const std::string& what) : std::invalid_argument(what) {}
};

struct TooManyFailuresError : std::runtime_error {
  explicit TooManyFailuresError(const std::string& what) : std::runtime_error(what) {}
};

struct NullTotalEffectError : std::runtime_error {
  explicit NullTotalEffectError(const std::string& what) : std::runtime_error(what) {}
};

struct NonPositiveEstimateError : std::runtime_error {
  explicit NonPositiveEstimateError(const std::string& what) : std::runtime_error(what) {}
};

// CSV / dataset validation failures; carries enough context for a one-line
// machine-readable message (row/column are 1-based, 0 when not applicable).
struct ParseError : std::runtime_error {
  long row;
  std::string column;
  ParseError(const std::string& what, long row_ = 0, std::string column_ = "")
      : std::runtime_error(what), row(row_), column(std::move(column_)) {}
};

}  // namespace mzipmed

#endif
