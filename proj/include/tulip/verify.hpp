// Copyright 2026 The Tulip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tulip {

inline constexpr std::uint64_t kDefaultSeed = 1;

struct VerifyReport {
  std::string suite;
  std::int64_t cases = 0;
  std::int64_t mismatches = 0;
  std::vector<std::string> lines;  // details, one per line
  bool ok() const { return cases > 0 && mismatches == 0; }
};

/// adders, comparators, storage, endtoend, tables
const std::vector<std::string>& verifySuites();

/// Throws ContractError for an unknown suite name.
VerifyReport runVerifySuite(const std::string& suite, std::uint64_t seed = kDefaultSeed);

}  // namespace tulip
