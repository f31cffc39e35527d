#pragma once

#include <stdexcept>
#include <string>

namespace carmm {

// Base classes map onto CLI exit codes: DataError -> 3, NumericError -> 4.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : Error {
  using Error::Error;
};

struct NumericError : Error {
  using Error::Error;
};

// graph
struct IsolatedAreaError : DataError {
  int area;
  explicit IsolatedAreaError(int i)
      : DataError("area " + std::to_string(i) + " has no neighbours"), area(i) {}
};
struct InvalidIdError : DataError {
  using DataError::DataError;
};
struct SelfLoopError : DataError {
  using DataError::DataError;
};
struct NotPositiveDefiniteError : NumericError {
  using NumericError::NumericError;
};

// membership
struct EmptyRowError : DataError {
  int row;
  explicit EmptyRowError(int j)
      : DataError("membership " + std::to_string(j) + " has no weights"), row(j) {}
};
struct NegativeWeightError : DataError {
  using DataError::DataError;
};
struct RowSumViolationError : DataError {
  int row;
  explicit RowSumViolationError(int j, double sum)
      : DataError("membership " + std::to_string(j) + " weights sum to " +
                  std::to_string(sum) + ", expected 1"),
        row(j) {}
};

// model / data
struct DimensionMismatchError : DataError {
  using DataError::DataError;
};
struct InvalidParameterError : NumericError {
  using NumericError::NumericError;
};
struct ZeroOffsetError : DataError {
  using DataError::DataError;
};
struct ConstantColumnError : DataError {
  int column;
  explicit ConstantColumnError(int j)
      : DataError("covariate column " + std::to_string(j) + " is constant"), column(j) {}
};

// sampler
struct OutOfDomainError : NumericError {
  using NumericError::NumericError;
};
struct NonFiniteDensityError : NumericError {
  using NumericError::NumericError;
};

// compare
struct LengthMismatchError : DataError {
  using DataError::DataError;
};

}  // namespace carmm
