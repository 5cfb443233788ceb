#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace gridport {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid configuration, schema violation, or inconsistent model setup.  CLI exit code 2.
struct ConfigError : Error {
  using Error::Error;
};

/// Numerical failure: divergence, singular system, non-convergence.  CLI exit code 3.
struct NumericalError : Error {
  using Error::Error;
};

/// A stability index was requested where its preconditions do not hold.  CLI exit code 4.
struct IndexInapplicableError : Error {
  using Error::Error;
};

/// Evaluation point too close to a system pole; carries the offending pole.
struct NearPoleError : NumericalError {
  NearPoleError(const std::string& msg, std::complex<double> pole_)
      : NumericalError(msg), pole(pole_) {}
  std::complex<double> pole;
};

}  // namespace gridport
