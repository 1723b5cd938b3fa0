#pragma once

#include <stdexcept>
#include <string>

namespace eqbayes {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ShapeMismatch : Error {
    using Error::Error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct NotPositiveDefinite : Error {
    using Error::Error;
};

struct NotFinite : Error {
    using Error::Error;
};

struct EmptySet : Error {
    using Error::Error;
};

struct EmptyInput : Error {
    using Error::Error;
};

struct OptimizationDiverged : Error {
    using Error::Error;
};

struct NonFiniteState : Error {
    using Error::Error;
};

struct InvalidSplit : Error {
    using Error::Error;
};

struct EnsembleTooSmall : Error {
    using Error::Error;
};

struct DegenerateSpan : Error {
    using Error::Error;
};

struct DomainError : Error {
    using Error::Error;
};

struct ZeroTruthNorm : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

struct FormatVersionMismatch : Error {
    using Error::Error;
};

}  // namespace eqbayes
