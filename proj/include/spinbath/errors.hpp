// errors.hpp: exception types thrown by the spinbath library

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spinbath {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Parameters outside the physical or mathematical domain of an operation.
struct DomainError : Error {
    using Error::Error;
};

// System too large for a dense/exact path.
struct SizeError : Error {
    using Error::Error;
};

// Density matrix that is not Hermitian, not unit trace or not positive.
struct StateError : Error {
    using Error::Error;
};

struct SingularError : Error {
    using Error::Error;
};

struct PoleError : Error {
    PoleError(const std::string& what, std::size_t pole_index)
        : Error(what), index(pole_index) {}
    std::size_t index;
};

struct BracketError : Error {
    BracketError(const std::string& what, double lo, double hi)
        : Error(what), lower(lo), upper(hi) {}
    double lower;
    double upper;
};

struct QuadratureError : Error {
    using Error::Error;
};

} // namespace spinbath
