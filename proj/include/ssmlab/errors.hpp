#pragma once

#include <stdexcept>
#include <string>

namespace ssmlab {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad user-supplied parameter or config value.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Shape / grid mismatch between operands.
class DimensionError : public Error {
public:
    using Error::Error;
};

// Nonlinear fit failed (degenerate input or no convergence).
class FitError : public Error {
public:
    using Error::Error;
};

// Imposed phase is not resolvable on the sampling grid.
class AliasingError : public Error {
public:
    using Error::Error;
};

// Fourier-side window is invalid (touches DC, leaves the grid, ...).
class WindowError : public Error {
public:
    using Error::Error;
};

} // namespace ssmlab
