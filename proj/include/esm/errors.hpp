#pragma once

#include <stdexcept>
#include <string>

namespace esm {

// Base for everything thrown by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --- numeric layer ---
struct InvalidMatrix : Error {
  using Error::Error;
};
struct SingularMatrix : Error {
  using Error::Error;
};
struct DimensionMismatch : Error {
  using Error::Error;
};

// --- geometry / model layer ---
struct EmptyEllipsoid : Error {
  using Error::Error;
};
struct DegenerateModel : Error {
  using Error::Error;
};

// --- data layer (CLI exit code 2) ---
struct DataError : Error {
  using Error::Error;
};
struct EmptyClass : DataError {
  using DataError::DataError;
};
struct MalformedLine : DataError {
  using DataError::DataError;
};
struct NonMonotoneIndex : DataError {
  using DataError::DataError;
};
struct UnknownLabel : DataError {
  using DataError::DataError;
};
struct SchemaMismatch : DataError {
  using DataError::DataError;
};
struct CorruptFile : DataError {
  using DataError::DataError;
};
struct ClassTooSmall : DataError {
  using DataError::DataError;
};
struct TooManyClusters : DataError {
  using DataError::DataError;
};

}  // namespace esm
