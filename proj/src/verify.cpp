// Copyright 2026 The Tulip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#include "tulip/verify.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "tulip/arch.hpp"
#include "tulip/errors.hpp"
#include "tulip/scheduler.hpp"

namespace tulip {

namespace {

std::uint64_t operandBits(const std::vector<std::uint64_t>& v, int op, int bit) {
  return (v[static_cast<std::size_t>(op)] >> bit) & 1U;
}

std::uint64_t runAdd(const Schedule& s, std::uint64_t x, std::uint64_t y) {
  PeState st;
  loadBits(st, s.operands[0], x);
  loadBits(st, s.operands[1], y);
  return readResult(run(s, st, [](int, int) { return false; }), s.result);
}

bool runCompare(const Schedule& s, std::uint64_t x) {
  const std::vector<std::uint64_t> ops{x};
  return readResult(run(s, PeState{}, [&](int op, int bit) { return operandBits(ops, op, bit) != 0; }), s.result) != 0;
}

void check(VerifyReport& r, bool ok, const std::string& what) {
  ++r.cases;
  if (!ok) {
    ++r.mismatches;
    if (r.mismatches <= 20) r.lines.push_back("mismatch: " + what);
  }
}

VerifyReport adders(std::uint64_t seed) {
  VerifyReport r{"adders", 0, 0, {}};
  for (int parity = 0; parity < 2; ++parity) {
    for (int wx = 1; wx <= 4; ++wx) {
      for (int wy = 1; wy <= 4; ++wy) {
        const Schedule s = scheduleAdd(wx, wy, parity);
        for (std::uint64_t x = 0; x < (1U << wx); ++x) {
          for (std::uint64_t y = 0; y < (1U << wy); ++y) {
            check(r, runAdd(s, x, y) == x + y, std::to_string(x) + "+" + std::to_string(y));
          }
        }
      }
    }
  }
  const std::int64_t exhaustive = r.cases;
  std::mt19937_64 rng(seed);
  for (int i = 0; i < 2000; ++i) {
    const int wx = 5 + static_cast<int>(rng() % 6);
    const int wy = 5 + static_cast<int>(rng() % 6);
    const Schedule s = scheduleAdd(wx, wy, static_cast<int>(rng() & 1U));
    const std::uint64_t x = rng() % (1U << wx);
    const std::uint64_t y = rng() % (1U << wy);
    check(r, runAdd(s, x, y) == x + y, std::to_string(x) + "+" + std::to_string(y));
  }
  r.lines.push_back("exhaustive=" + std::to_string(exhaustive) + " random=" + std::to_string(r.cases - exhaustive));
  return r;
}

VerifyReport comparators(std::uint64_t seed) {
  VerifyReport r{"comparators", 0, 0, {}};
  // x > y is x >= y + 1
  for (std::uint64_t y = 0; y < 16; ++y) {
    const Schedule s = scheduleCompare(4, static_cast<std::int64_t>(y) + 1);
    for (std::uint64_t x = 0; x < 16; ++x) {
      check(r, runCompare(s, x) == (x > y), std::to_string(x) + ">" + std::to_string(y));
    }
  }
  std::mt19937_64 rng(seed);
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t x = rng() & 0xffff;
    const std::uint64_t y = i % 10 == 0 ? x : rng() & 0xffff;
    const Schedule s = scheduleCompare(16, static_cast<std::int64_t>(y) + 1);
    check(r, runCompare(s, x) == (x > y), std::to_string(x) + ">" + std::to_string(y));
  }
  r.lines.push_back("exhaustive=256 random=1000");
  return r;
}

VerifyReport storage(std::uint64_t) {
  VerifyReport r{"storage", 0, 0, {}};
  for (int n : {4, 7, 16, 100, 288, 511, 1023}) {
    const Schedule s = scheduleNode(n);
    const int bound = storageBound(n);
    const int measured = measurePeakLiveBits(s.program);
    std::ostringstream line;
    line << "n=" << n << " peak_bits=" << measured << " bound_bits=" << bound << " cycles=" << s.cycleCount;
    r.lines.push_back(line.str());
    check(r, measured <= bound, "n=" + std::to_string(n) + " exceeds the bound");
  }
  const int tight = measurePeakLiveBits(scheduleNode(1023).program);
  check(r, tight >= storageBound(1023) - 2, "n=1023 is more than 2 bits under the bound");
  return r;
}

VerifyReport endToEnd(std::uint64_t seed) {
  VerifyReport r{"endtoend", 0, 0, {}};
  const ArchConfig cfg;
  for (std::uint64_t i = 0; i < 50; ++i) {
    const auto g = generateRandomNetwork(seed * 1000 + i, 1 + static_cast<int>(i % 4));
    const Tensor expect = goldenEval(g.net, g.input);
    for (Machine m : {Machine::Tulip, Machine::Yodann}) {
      const auto got = simulateNetwork(g.net, g.input, m, cfg).output;
      check(r, got == expect, "network seed " + std::to_string(seed * 1000 + i) + " on " + machineName(m));
    }
  }
  return r;
}

LayerDescriptor alexnetConv(Precision p, int x1, int z1, int z2, int k, int stride, int pad) {
  LayerDescriptor l;
  l.name = "conv";
  l.precision = p;
  l.k = k;
  l.stride = stride;
  l.pad = pad;
  l.in = {x1, x1, z1};
  const int x2 = (x1 + 2 * pad - k) / stride + 1;
  l.out = {x2, x2, z2};
  return l;
}

VerifyReport tables(std::uint64_t) {
  VerifyReport r{"tables", 0, 0, {}};
  const ArchConfig cfg;
  const LayerDescriptor layers[] = {
      alexnetConv(Precision::Integer, 227, 3, 96, 11, 4, 0), alexnetConv(Precision::Integer, 27, 96, 256, 5, 1, 2),
      alexnetConv(Precision::Binary, 13, 256, 384, 3, 1, 1), alexnetConv(Precision::Binary, 13, 384, 384, 3, 1, 1),
      alexnetConv(Precision::Binary, 13, 384, 256, 3, 1, 1)};
  // published P, Z for Yodann then Tulip
  const std::int64_t expected[5][4] = {{1, 3, 1, 3}, {2, 8, 2, 8}, {4, 12, 8, 2}, {6, 12, 12, 2}, {6, 8, 12, 1}};
  for (int i = 0; i < 5; ++i) {
    const auto y = fetchCounts(layers[i], Machine::Yodann, cfg);
    const auto t = fetchCounts(layers[i], Machine::Tulip, cfg);
    std::ostringstream line;
    line << "layer " << i + 1 << " yodann P=" << y.P << " Z=" << y.Z << " PxZ=" << y.PxZ() << " tulip P=" << t.P
         << " Z=" << t.Z << " PxZ=" << t.PxZ();
    r.lines.push_back(line.str());
    check(r, y.P == expected[i][0] && y.Z == expected[i][1], "yodann layer " + std::to_string(i + 1));
    check(r, t.P == expected[i][2] && t.Z == expected[i][3], "tulip layer " + std::to_string(i + 1));
  }
  const std::int64_t mac = nodeCycles(288, Machine::Yodann, cfg);
  const std::int64_t pe = nodeCycles(288, Machine::Tulip, cfg);
  const double delta = (static_cast<double>(pe) - 441.0) / 441.0;
  std::ostringstream node;
  node << "288-input node: mac_cycles=" << mac << " pe_cycles=" << pe << " reference=441 delta=" << std::showpos
       << std::lround(delta * 1000) / 10.0 << "%";
  r.lines.push_back(node.str());
  check(r, mac == 17, "MAC cycles for 288 products");
  check(r, std::abs(delta) <= 0.15, "PE cycles for 288 inputs");
  check(r, std::abs(timeFromCycles(17, cfg) - 39) <= 0.5, "17 cycles in ns");
  check(r, std::abs(timeFromCycles(441, cfg) - 1014) <= 0.5, "441 cycles in ns");
  return r;
}

}  // namespace

const std::vector<std::string>& verifySuites() {
  static const std::vector<std::string> names{"adders", "comparators", "storage", "endtoend", "tables"};
  return names;
}

VerifyReport runVerifySuite(const std::string& suite, std::uint64_t seed) {
  if (suite == "adders") return adders(seed);
  if (suite == "comparators") return comparators(seed);
  if (suite == "storage") return storage(seed);
  if (suite == "endtoend") return endToEnd(seed);
  if (suite == "tables") return tables(seed);
  throw ContractError("unknown suite '" + suite + "'");
}

}  // namespace tulip
