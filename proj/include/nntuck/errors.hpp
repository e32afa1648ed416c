#pragma once

#include <stdexcept>

namespace nntuck {

/// Malformed or inconsistent input data (files, records, label sets).
class DataError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure: non-finite objective, singular reference submatrix.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace nntuck
