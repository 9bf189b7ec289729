#pragma once

#include <stdexcept>
#include <string>

namespace dentreg {

// Root of the library's exception hierarchy. DataError covers malformed or
// inconsistent inputs (exit code 2 in the CLI); NumericError covers
// configurations where an operation is mathematically undefined or failed to
// produce a result (exit code 3).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : Error {
  using Error::Error;
};

struct NumericError : Error {
  using Error::Error;
};

// geometry
struct DegenerateNeighborhood final : NumericError {
  using NumericError::NumericError;
};
struct DegenerateConfiguration final : NumericError {
  using NumericError::NumericError;
};
struct EmptySurface final : NumericError {
  using NumericError::NumericError;
};

// descriptors
struct CoincidentPoints final : NumericError {
  using NumericError::NumericError;
};

// registration
struct TooFewCorrespondences final : NumericError {
  using NumericError::NumericError;
};
struct NoSurvivingPairs final : NumericError {
  using NumericError::NumericError;
};
struct NoSharedCodes final : NumericError {
  using NumericError::NumericError;
};

// arch model
struct MissingTargetCode final : DataError {
  using DataError::DataError;
};
struct InvalidArch final : DataError {
  using DataError::DataError;
};

// projection / identification
struct EmptyProjection final : NumericError {
  using NumericError::NumericError;
};
struct HullFailure final : NumericError {
  using NumericError::NumericError;
};
struct InconsistentClasses final : NumericError {
  using NumericError::NumericError;
};

// metrics
struct LengthMismatch final : DataError {
  using DataError::DataError;
};

// file formats
struct MalformedStl final : DataError {
  using DataError::DataError;
};
struct SchemaVersionMismatch final : DataError {
  using DataError::DataError;
};
struct MalformedField final : DataError {
  using DataError::DataError;
};
struct FileIoError final : DataError {
  using DataError::DataError;
};

}  // namespace dentreg
