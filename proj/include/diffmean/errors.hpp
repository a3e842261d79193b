#pragma once

#include <stdexcept>
#include <string>

namespace diffmean {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument: mismatched manifolds, out-of-range parameters, bad sizes.
class DomainError : public Error {
public:
    using Error::Error;
};

/// The logarithm map was requested for a point on (or numerically at) the cut locus.
class CutLocusError : public Error {
public:
    using Error::Error;
};

/// A series or quadrature could not reach its requested accuracy.
class AccuracyError : public Error {
public:
    using Error::Error;
};

/// All samples coincide, so a variance ratio has a zero denominator.
class DegenerateSampleError : public Error {
public:
    using Error::Error;
};

/// A flatness probe found a non-positive increment of the objective.
class FlatnessError : public Error {
public:
    FlatnessError(const std::string& what, double radius) : Error(what), radius_(radius) {}
    double radius() const noexcept { return radius_; }

private:
    double radius_;
};

}  // namespace diffmean
