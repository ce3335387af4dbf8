// Copyright 2026 The Tulip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace tulip {

/// Violated precondition on a public operation (bad index, length mismatch, ...).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A schedule cannot be generated within the PE resources (register capacity,
/// operand width, unrepresentable threshold).
class ScheduleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed network description, tensor, or config file.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tulip
