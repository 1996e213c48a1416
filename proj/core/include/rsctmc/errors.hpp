#pragma once

#include <stdexcept>
#include <string>

namespace rsctmc {

/// Malformed or inconsistent input: bad model documents, invalid policies,
/// parameters outside their admissible range. Maps to CLI exit code 1.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// A solver left its guaranteed regime: stability guard violated, iteration
/// cap exceeded, non-finite value produced. Maps to CLI exit code 2.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rsctmc
