// Copyright 2026 The sapaug Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace sapaug {

/// Bad caller input: out-of-range arguments, malformed files, unknown ids.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of a special function.
class DomainError : public InputError {
public:
    using InputError::InputError;
};

/// Numerical failure, e.g. a covariance matrix that will not factorize.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operation not valid in the current state (e.g. best() with no results).
class StateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace sapaug
