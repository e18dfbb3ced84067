#pragma once

#include <stdexcept>
#include <string>

namespace cholgauss {

// Distributional parameters outside their admissible domain.
class invalid_parameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A linear-algebra or likelihood evaluation that cannot be completed.
class numerical_failure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The fitter hit its step-halving limit with a non-finite objective.
class convergence_failure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input tables or specification documents that do not match expectations.
class schema_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace cholgauss
