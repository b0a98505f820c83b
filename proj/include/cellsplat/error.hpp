// Copyright Contributors to the CellSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace cellsplat {

// File or stream trouble: missing files, short reads, unwritable paths.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Structurally broken input: malformed records, missing attributes,
// unsupported camera models, manifests referencing unknown ids.
class SchemaError : public std::runtime_error {
public:
    explicit SchemaError(const std::string& msg) : std::runtime_error(msg) {}
};

// Degenerate or inconsistent geometry (collinear cameras, inverted boxes,
// empty cells).
class GeometryError : public std::runtime_error {
public:
    explicit GeometryError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad user-supplied configuration values.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Trainer launch/monitoring failures that are not per-cell exit codes.
class OrchestrationError : public std::runtime_error {
public:
    explicit OrchestrationError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace cellsplat
