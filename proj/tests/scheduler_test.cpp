// Copyright 2026 The Tulip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <bit>
#include <map>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "tulip/errors.hpp"
#include "tulip/scheduler.hpp"

using namespace tulip;

namespace {

PeState dirtyState(std::mt19937_64& rng) {
  PeState st;
  for (auto& r : st.registers) r = static_cast<std::uint16_t>(rng());
  for (auto& b : st.neuronOut) b = rng() & 1U;
  return st;
}

// Runs a schedule with register operands preloaded and streamed operands
// given as integers.
std::uint64_t runValues(const Schedule& s, const std::vector<std::uint64_t>& preload,
                        const std::vector<std::uint64_t>& streamed, PeState initial = {}) {
  for (std::size_t i = 0; i < s.operands.size(); ++i) loadBits(initial, s.operands[i], preload.at(i));
  const PeState end = run(s, initial, [&](int op, int bit) {
    return ((streamed.at(static_cast<std::size_t>(op)) >> bit) & 1U) != 0;
  });
  return readResult(end, s.result);
}

std::uint64_t runInputs(const Schedule& s, const std::vector<bool>& x, PeState initial = {}) {
  const PeState end = run(s, initial, [&](int op, int bit) {
    REQUIRE(op == 0);
    return static_cast<bool>(x.at(static_cast<std::size_t>(bit)));
  });
  return readResult(end, s.result);
}

}  // namespace

TEST_CASE("add: 0101 + 0011 lands 01000 in R2") {
  const Schedule s = scheduleAdd(4, 4, 0);
  PeState st;
  loadBits(st, s.operands[0], 0b0101);
  loadBits(st, s.operands[1], 0b0011);
  const PeState end = run(s, st, [](int, int) { return false; });
  CHECK(readResult(end, s.result) == 8);
  CHECK(end.registers[1] == 0b01000);
  for (const auto& b : s.result.bits) CHECK(b.reg == 1);
  CHECK(s.cycleCount == 6);  // carry, four sums, final carry
}

TEST_CASE("add: operand placement for both parities") {
  const Schedule even = scheduleAdd(3, 3, 0);
  const Schedule odd = scheduleAdd(3, 3, 1);
  CHECK(even.operands[0][0].reg == 0);
  CHECK(even.operands[1][0].reg == 3);
  CHECK(odd.operands[0][0].reg == 1);
  CHECK(odd.operands[1][0].reg == 2);
  CHECK(odd.result.bits[0].reg == 0);
}

TEST_CASE("add: exhaustive up to 4 bits") {
  for (int parity = 0; parity < 2; ++parity) {
    for (int wx = 1; wx <= 4; ++wx) {
      for (int wy = 1; wy <= 4; ++wy) {
        const Schedule s = scheduleAdd(wx, wy, parity);
        CHECK(s.result.width() == std::max(wx, wy) + 1);
        for (std::uint64_t x = 0; x < (1U << wx); ++x) {
          for (std::uint64_t y = 0; y < (1U << wy); ++y) {
            if (runValues(s, {x, y}, {}) != x + y) {
              FAIL("parity " << parity << " " << x << "+" << y);
            }
          }
        }
      }
    }
  }
}

TEST_CASE("add: random widths up to 10 with dirty registers") {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 400; ++i) {
    const int wx = static_cast<int>(oracle::uniform(rng, 5, 10));
    const int wy = static_cast<int>(oracle::uniform(rng, 5, 10));
    const Schedule s = scheduleAdd(wx, wy, static_cast<int>(rng() & 1U));
    const std::uint64_t x = rng() % (1U << wx), y = rng() % (1U << wy);
    CHECK(runValues(s, {x, y}, {}, dirtyState(rng)) == x + y);
  }
}

TEST_CASE("add: width refusals") {
  CHECK_THROWS_AS(scheduleAdd(11, 3), ScheduleError);
  CHECK_THROWS_AS(scheduleAdd(3, 0), ScheduleError);
  CHECK_THROWS_AS(scheduleAdd(3, 3, 2), ContractError);
}

TEST_CASE("node: popcount over random inputs") {
  std::mt19937_64 rng(32);
  for (int n : {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 16, 17, 31, 64, 100, 288, 511, 1023}) {
    CAPTURE(n);
    const Schedule s = scheduleNode(n);
    CHECK(s.result.width() >= std::bit_width(static_cast<unsigned>(n)));
    const int trials = n <= 10 ? (1 << n) : 30;
    for (int t = 0; t < trials; ++t) {
      std::vector<bool> x(static_cast<std::size_t>(n));
      if (n <= 10) {
        for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = (t >> i) & 1;
      } else {
        x = oracle::randomBits(rng, static_cast<std::size_t>(n));
      }
      CHECK(runInputs(s, x) == static_cast<std::uint64_t>(oracle::popcount(x)));
    }
    std::vector<bool> ones(static_cast<std::size_t>(n), true);
    CHECK(runInputs(s, ones) == static_cast<std::uint64_t>(n));
  }
}

TEST_CASE("node: freed bits are reused soundly") {
  // Intermediates must never depend on what was in a register before.
  std::mt19937_64 rng(33);
  for (int n : {7, 48, 288, 1023}) {
    const Schedule s = scheduleNode(n);
    for (int t = 0; t < 10; ++t) {
      const auto x = oracle::randomBits(rng, static_cast<std::size_t>(n));
      CHECK(runInputs(s, x, dirtyState(rng)) == static_cast<std::uint64_t>(oracle::popcount(x)));
    }
  }
}

TEST_CASE("node: peak storage within the bound") {
  for (int n = 2; n <= 1023; n += (n < 64 ? 1 : 37)) {
    const Schedule s = scheduleNode(n);
    CAPTURE(n);
    CHECK(s.peakLiveBits <= storageBound(n));
    CHECK(s.peakLiveBits == measurePeakLiveBits(s.program));
  }
  CHECK(scheduleNode(1023).peakLiveBits <= 46);
}

TEST_CASE("node: RPO order and pending levels") {
  const AdderTree t = buildAdderTree(1023);
  const Schedule s = scheduleNode(t);
  CHECK(s.rpoOrder == rpoSchedule(t));
  // Before each step, completed subtrees waiting for a parent never share a level.
  std::vector<int> pending;
  for (int id : s.rpoOrder) {
    const auto& node = t.node(id);
    if (!node.isLeaf()) {
      pending.erase(std::remove(pending.begin(), pending.end(), node.left), pending.end());
      pending.erase(std::remove(pending.begin(), pending.end(), node.right), pending.end());
    }
    std::set<int> levels;
    for (int p : pending) levels.insert(t.node(p).level);
    CHECK(levels.size() == pending.size());
    pending.push_back(id);
    CHECK(pending.size() <= static_cast<std::size_t>(t.node(t.root).level) + 1);
  }
}

TEST_CASE("node: every cycle obeys the PE contract") {
  for (int n : {5, 288}) {
    const Schedule s = scheduleNode(n);
    CHECK(s.program.size() == s.cycleCount);
    CHECK(s.taps.size() == s.cycleCount);
    for (const auto& mi : s.program) CHECK_NOTHROW(validate(mi));
  }
}

TEST_CASE("accumulate") {
  const Schedule s = scheduleAccumulate(5, 20);
  CHECK(runValues(s, {}, std::vector<std::uint64_t>(20, 7)) == 140);
  std::mt19937_64 rng(34);
  for (int t = 0; t < 100; ++t) {
    const int w = static_cast<int>(oracle::uniform(rng, 1, 10));
    const int k = static_cast<int>(oracle::uniform(rng, 1, 40));
    if ((std::uint64_t{1} << w) * static_cast<std::uint64_t>(k) > (1U << 16)) continue;
    const Schedule acc = scheduleAccumulate(w, k);
    std::vector<std::uint64_t> addends(static_cast<std::size_t>(k));
    std::uint64_t total = 0;
    for (auto& a : addends) total += (a = rng() % (1U << w));
    CHECK(runValues(acc, {}, addends, dirtyState(rng)) == total);
  }
}

TEST_CASE("accumulate alternates R2 and R4") {
  for (int k : {1, 2, 3, 6}) {
    const Schedule s = scheduleAccumulate(4, k);
    std::set<int> regs;
    for (const auto& b : s.result.bits) regs.insert(b.reg);
    CHECK(regs == std::set<int>{k % 2 == 1 ? 1 : 3});
  }
  CHECK_THROWS_AS(scheduleAccumulate(10, 200), ScheduleError);
}

TEST_CASE("compare: exhaustive 4-bit") {
  for (std::int64_t t = 1; t <= 16; ++t) {
    const Schedule s = scheduleCompare(4, t);
    CHECK(s.result.inNeuron());
    CHECK(s.result.neuron == 3);
    for (std::uint64_t x = 0; x < 16; ++x) {
      CHECK(runValues(s, {}, {x}) == (static_cast<std::int64_t>(x) >= t ? 1U : 0U));
    }
  }
}

TEST_CASE("compare: 5 against 4 and bias folding") {
  CHECK(runValues(scheduleCompare(4, 4), {}, {5}) == 1);
  const Schedule a = scheduleCompare(5, 10, 3);
  const Schedule b = scheduleCompare(5, 7, 0);
  for (std::uint64_t x = 0; x < 32; ++x) CHECK(runValues(a, {}, {x}) == runValues(b, {}, {x}));
  CHECK_THROWS_AS(scheduleCompare(4, 0), ScheduleError);
  CHECK_THROWS_AS(scheduleCompare(4, 17), ScheduleError);
}

TEST_CASE("maxpool") {
  const Schedule four = scheduleMaxpool(4);
  CHECK(four.cycleCount == 1);
  for (std::uint64_t x = 0; x < 16; ++x) CHECK(runValues(four, {}, {x}) == (x != 0 ? 1U : 0U));
  const Schedule sixteen = scheduleMaxpool(16);
  CHECK(sixteen.cycleCount == 2);
  CHECK(runValues(sixteen, {}, {0}) == 0);
  for (int bit = 0; bit < 16; ++bit) CHECK(runValues(sixteen, {}, {1U << bit}) == 1);
  std::mt19937_64 rng(35);
  for (int w : {9, 25, 100, 256}) {
    const Schedule s = scheduleMaxpool(w);
    for (int t = 0; t < 20; ++t) {
      auto x = oracle::randomBits(rng, static_cast<std::size_t>(w));
      if (t % 2 == 0) std::fill(x.begin(), x.end(), false);
      if (t % 4 == 2) x[rng() % x.size()] = true;
      CHECK(runInputs(s, x, dirtyState(rng)) == (oracle::popcount(x) > 0 ? 1U : 0U));
    }
  }
  CHECK_THROWS(scheduleMaxpool(257));
}

TEST_CASE("relu") {
  const Schedule s = scheduleRelu(4, 5);
  CHECK(runValues(s, {9}, {}) == 9);
  CHECK(runValues(s, {3}, {}) == 0);
  CHECK(runValues(s, {0}, {}) == 0);
  std::mt19937_64 rng(36);
  for (std::int64_t t = 1; t <= 16; ++t) {
    const Schedule r = scheduleRelu(4, t);
    for (std::uint64_t x = 0; x < 16; ++x) {
      CHECK(runValues(r, {x}, {}, dirtyState(rng)) == (static_cast<std::int64_t>(x) >= t ? x : 0U));
    }
  }
}

TEST_CASE("activated node") {
  std::mt19937_64 rng(37);
  for (int n : {3, 9, 64, 288}) {
    for (std::int64_t t : {std::int64_t{-2}, std::int64_t{0}, std::int64_t{1}, std::int64_t{n / 2},
                           std::int64_t{n}, std::int64_t{n + 1}}) {
      const Schedule thr = scheduleActivatedNode(n, t, Activation::Threshold);
      const Schedule relu = scheduleActivatedNode(n, t, Activation::Relu);
      for (int k = 0; k < 8; ++k) {
        const auto x = oracle::randomBits(rng, static_cast<std::size_t>(n));
        const auto pc = static_cast<std::int64_t>(oracle::popcount(x));
        CHECK(runInputs(thr, x) == (pc >= t ? 1U : 0U));
        CHECK(runInputs(relu, x, dirtyState(rng)) == static_cast<std::uint64_t>(pc >= t ? pc : 0));
      }
    }
  }
}

TEST_CASE("activated accumulate") {
  std::mt19937_64 rng(38);
  for (int t = 0; t < 60; ++t) {
    const int w = static_cast<int>(oracle::uniform(rng, 2, 8));
    const int k = static_cast<int>(oracle::uniform(rng, 1, 6));
    std::vector<std::uint64_t> addends(static_cast<std::size_t>(k));
    std::int64_t total = 0;
    for (auto& a : addends) total += static_cast<std::int64_t>(a = rng() % (1U << w));
    const auto theta = static_cast<std::int64_t>(oracle::uniform(rng, 0, static_cast<std::uint64_t>(k) << w));
    const Schedule thr = scheduleActivatedAccumulate(w, k, theta, Activation::Threshold);
    const Schedule relu = scheduleActivatedAccumulate(w, k, theta, Activation::Relu);
    CHECK(runValues(thr, {}, addends) == (total >= theta ? 1U : 0U));
    CHECK(runValues(relu, {}, addends) == static_cast<std::uint64_t>(total >= theta ? total : 0));
  }
}
