#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tdelay {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad input: the caller asked for something outside an operation's domain.
class InputError : public Error {
public:
    using Error::Error;
};

// A valid input hit a numerical obstruction (singularity, failed fit, ...).
class NumericalError : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public InputError {
public:
    using InputError::InputError;
};

class ZeroWavenumber : public InputError {
public:
    ZeroWavenumber() : InputError("wavenumber alpha0 must be non-zero") {}
};

class EmptyGrid : public InputError {
public:
    using InputError::InputError;
};

class NonHermitian : public InputError {
public:
    NonHermitian(std::size_t i, std::size_t j, double mismatch)
        : InputError("cluster matrix is not Hermitian: entry (" + std::to_string(i) + "," +
                     std::to_string(j) + ") differs from conj of (" + std::to_string(j) + "," +
                     std::to_string(i) + ") by " + std::to_string(mismatch)),
          row(i),
          col(j) {}

    std::size_t row;
    std::size_t col;
};

class SingularResolvent : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DegeneratePhase : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class StepTooLarge : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DegenerateMatch : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NoPeakInBracket : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class BoundaryContamination : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NoLinearRegime : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NormDrift : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace tdelay
