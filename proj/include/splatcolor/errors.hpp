// Copyright Contributors to the Splatcolor Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace splatcolor {

/// Malformed files, inconsistent dimensions, or violated preconditions on
/// caller-supplied data. The CLI maps these to exit code 1.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Failures inside the numerical pipeline (non-SPD systems, all-invisible
/// scenes). The CLI maps these to exit code 2.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace splatcolor
