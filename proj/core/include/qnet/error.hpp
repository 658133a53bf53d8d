// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace qnet {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent model manifest / blob.
class ManifestError : public Error {
public:
    using Error::Error;
};

/// Graph or tensor shapes violate an operator contract.
class ShapeError : public Error {
public:
    using Error::Error;
};

class QuantError : public Error {
public:
    using Error::Error;
};

/// Dataflow failures: stream underrun, deadlock, capacity violations.
class StreamError : public Error {
public:
    using Error::Error;
};

class PlanError : public Error {
public:
    using Error::Error;
};

class MemoryError : public Error {
public:
    using Error::Error;
};

} // namespace qnet
