// Copyright 2026 The Tulip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: one PASS/FAIL line per criterion. Expected values are
// either published figures (typed in below) or computed here by oracles
// that do not call the code under test.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "tulip/arch.hpp"
#include "tulip/neuron.hpp"
#include "tulip/scheduler.hpp"

using namespace tulip;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& body) {
  const auto start = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  if (!o.pass) ++failures;
  std::printf("criterion %d %s  %s: %s (%.2f s)\n", id, o.pass ? "PASS" : "FAIL", title.c_str(), o.detail.c_str(),
              secs);
  std::fflush(stdout);
}

// ---- oracles ----

int floorLog2(int n) {
  int l = 0;
  while ((n >> (l + 1)) > 0) ++l;
  return l;
}

int boundOracle(int n) {
  const int l = floorLog2(n);
  return (l * l + l) / 2 + 1;
}

// Peak number of register bits holding a value that is still needed,
// counted after every cycle straight from the microprogram. A value is
// needed until its last read; the final result is needed until the end.
// Operands present before cycle 0 count from the start.
int liveBitsOracle(const Schedule& s) {
  const int cycles = static_cast<int>(s.program.size());
  std::vector<int> live(static_cast<std::size_t>(cycles) + 1, 0);  // index b + 1 is "after cycle b"
  std::map<std::pair<int, int>, std::pair<int, int>> value;         // bit -> (written at, last read)
  auto retire = [&](const std::pair<int, int>& v) {
    for (int b = v.first; b < v.second; ++b) ++live[static_cast<std::size_t>(b + 1)];
  };
  for (int t = 0; t < cycles; ++t) {
    const auto& mi = s.program[static_cast<std::size_t>(t)];
    for (const auto& slot : mi.neurons) {
      if (!slot.cfg.enabled) continue;
      for (const auto& src : slot.src) {
        if (src.kind != SourceSelect::Kind::Register) continue;
        auto [it, fresh] = value.try_emplace({src.index, src.bit}, -1, t);
        it->second.second = std::max(it->second.second, t);
      }
    }
    for (const auto& w : mi.writes) {
      const std::pair<int, int> key{w.reg, w.bit};
      if (auto it = value.find(key); it != value.end()) retire(it->second);
      value[key] = {t, t};
    }
  }
  for (const auto& b : s.result.bits) {
    if (auto it = value.find({b.reg, b.bit}); it != value.end()) it->second.second = cycles;
  }
  for (const auto& [bit, v] : value) retire(v);
  return *std::max_element(live.begin(), live.end());
}

std::uint64_t addOnPe(const Schedule& s, std::uint64_t x, std::uint64_t y) {
  PeState st;
  loadBits(st, s.operands[0], x);
  loadBits(st, s.operands[1], y);
  return readResult(run(s, st, [](int, int) { return false; }), s.result);
}

bool compareOnPe(const Schedule& s, std::uint64_t x) {
  return readResult(run(s, PeState{}, [&](int, int bit) { return ((x >> bit) & 1U) != 0; }), s.result) != 0;
}

std::string fmt(double v, int digits) {
  std::ostringstream o;
  o.setf(std::ios::fixed);
  o.precision(digits);
  o << v;
  return o.str();
}

// ---- criteria ----

Outcome arithmetic() {
  const auto start = Clock::now();
  std::mt19937_64 rng(2026);
  long adds = 0, compares = 0, bad = 0;
  for (int parity = 0; parity < 2; ++parity) {
    for (int wx = 1; wx <= 4; ++wx) {
      for (int wy = 1; wy <= 4; ++wy) {
        const Schedule s = scheduleAdd(wx, wy, parity);
        for (std::uint64_t x = 0; x < (1U << wx); ++x) {
          for (std::uint64_t y = 0; y < (1U << wy); ++y, ++adds) bad += addOnPe(s, x, y) != x + y;
        }
      }
    }
  }
  const long exhaustiveAdds = adds;
  for (int i = 0; i < 1500; ++i, ++adds) {
    const int wx = 5 + static_cast<int>(rng() % 6), wy = 5 + static_cast<int>(rng() % 6);
    const std::uint64_t x = rng() % (1U << wx), y = rng() % (1U << wy);
    bad += addOnPe(scheduleAdd(wx, wy, static_cast<int>(rng() & 1U)), x, y) != x + y;
  }
  for (std::uint64_t y = 0; y < 16; ++y) {
    const Schedule s = scheduleCompare(4, static_cast<std::int64_t>(y) + 1);
    for (std::uint64_t x = 0; x < 16; ++x, ++compares) bad += compareOnPe(s, x) != (x > y);
  }
  for (int i = 0; i < 1000; ++i, ++compares) {
    const std::uint64_t x = rng() & 0xffff, y = i % 8 == 0 ? x : rng() & 0xffff;
    bad += compareOnPe(scheduleCompare(16, static_cast<std::int64_t>(y) + 1), x) != (x > y);
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  return {bad == 0 && secs < 60.0,
          "adds=" + std::to_string(adds) + " (exhaustive " + std::to_string(exhaustiveAdds) + ") compares=" +
              std::to_string(compares) + " (exhaustive 256) mismatches=" + std::to_string(bad)};
}

Outcome storage() {
  bool ok = true;
  std::string detail;
  for (int n : {4, 7, 16, 100, 288, 511, 1023}) {
    const Schedule s = scheduleNode(n);
    const int peak = liveBitsOracle(s);
    const int bound = boundOracle(n);
    ok = ok && peak <= bound;
    if (n == 1023) ok = ok && bound == 46 && bound - peak <= 2;
    detail += " n=" + std::to_string(n) + ":" + std::to_string(peak) + "/" + std::to_string(bound);
  }
  return {ok, "peak/bound" + detail};
}

Outcome fetchTable() {
  // published rows: Yodann P, Z, PxZ then Tulip P, Z, PxZ
  const std::int64_t published[5][6] = {
      {1, 3, 3, 1, 3, 3}, {2, 8, 16, 2, 8, 16}, {4, 12, 48, 8, 2, 16}, {6, 12, 72, 12, 2, 24}, {6, 8, 48, 12, 1, 12}};
  const Network net = loadNetwork(std::filesystem::path(TULIP_SOURCE_DIR) / "configs/alexnet.net");
  const ArchConfig cfg;
  int row = 0, matched = 0;
  std::string ratios;
  for (const auto& l : net.layers) {
    if (l.op != LayerOp::Conv) continue;
    if (row >= 5) return {false, "more than five convolution layers"};
    const auto y = fetchCounts(l, Machine::Yodann, cfg);
    const auto t = fetchCounts(l, Machine::Tulip, cfg);
    const std::int64_t got[6] = {y.P, y.Z, y.PxZ(), t.P, t.Z, t.PxZ()};
    for (int i = 0; i < 6; ++i) matched += got[i] == published[row][i];
    if (row >= 2) ratios += " " + std::to_string(y.PxZ()) + "/" + std::to_string(t.PxZ());
    ++row;
  }
  return {row == 5 && matched == 30, "matched " + std::to_string(matched) + "/30 values, binary ratios" + ratios};
}

Outcome nodeCalibration() {
  const ArchConfig cfg;
  const auto pe = static_cast<double>(scheduleNode(288).cycleCount);
  const auto mac = nodeCycles(288, Machine::Yodann, cfg);
  const double delta = (pe - 441.0) / 441.0;
  const double macNs = timeFromCycles(17, cfg), peNs = timeFromCycles(441, cfg);
  const bool ok = std::abs(delta) <= 0.15 && mac == 17 && std::abs(macNs - 39.0) <= 0.5 &&
                  std::abs(peNs - 1014.0) <= 0.5 && nodeCycles(288, Machine::Tulip, cfg) == static_cast<std::int64_t>(pe);
  return {ok, "pe_cycles=" + fmt(pe, 0) + " vs 441 (delta " + (delta >= 0 ? "+" : "") + fmt(100 * delta, 1) +
                  "%) mac_cycles=" + std::to_string(mac) + " times " + fmt(macNs, 1) + " ns / " + fmt(peNs, 1) +
                  " ns"};
}

Outcome endToEnd() {
  const ArchConfig cfg;
  int equal = 0;
  std::set<std::string> kinds;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto g = generateRandomNetwork(seed, 1 + static_cast<int>(seed % 3) + (seed % 5 == 0 ? 1 : 0));
    int convs = 0;
    bool small = true;
    for (const auto& l : g.net.layers) {
      convs += l.op == LayerOp::Conv;
      small = small && l.in.x <= 16 && l.in.y <= 16 && l.out.x <= 16 && l.out.z <= 16;
      if (l.op == LayerOp::Maxpool) kinds.insert("maxpool");
      if (l.op == LayerOp::FullyConnected) kinds.insert("fc");
      if (l.isCompute()) kinds.insert(l.precision == Precision::Binary ? "binary" : "integer");
      if (l.act == LayerActivation::Relu) kinds.insert("relu");
    }
    if (convs > 3 || !small) return {false, "generated network " + std::to_string(seed) + " is out of range"};
    equal += simulateNetwork(g.net, g.input, Machine::Tulip, cfg).output == goldenEval(g.net, g.input);
  }
  std::string covered;
  for (const auto& k : kinds) covered += " " + k;
  return {equal == 50 && kinds.size() == 5, std::to_string(equal) + "/50 bit-identical, layer kinds:" + covered};
}

Outcome thresholdGates() {
  int bad = 0;
  const ThresholdFunction example({2, 1, 1, 1}, 3);
  NeuronConfig hw{3, {}, true};
  for (unsigned k = 0; k < 16; ++k) {
    const bool a = k & 1, b = k & 2, c = k & 4, d = k & 8;
    const bool f = (a && b) || (a && c) || (a && d) || (b && c && d);
    bad += evalThreshold(example, {a, b, c, d}) != f;
    bad += evalNeuron(hw, a, b, c, d, !f) != f;
  }
  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 1 + rng() % 10;
    std::vector<std::int64_t> w(n);
    std::vector<bool> x(n);
    std::int64_t sum = 0;
    for (std::size_t j = 0; j < n; ++j) {
      w[j] = static_cast<std::int64_t>(rng() % 17) - 8;
      x[j] = rng() & 1U;
      if (x[j]) sum += w[j];
    }
    const auto t = static_cast<std::int64_t>(rng() % 41) - 20;
    bad += evalThreshold(ThresholdFunction(w, t), x) != (sum >= t);
  }
  return {bad == 0, "16 worked-example rows, 1000 random functions, mismatches=" + std::to_string(bad)};
}

}  // namespace

int main() {
  report(1, "exhaustive arithmetic equivalence", arithmetic);
  report(2, "storage bound reproduction", storage);
  report(3, "fetch count table reproduction", fetchTable);
  report(4, "node cycle calibration", nodeCalibration);
  report(5, "end-to-end golden equivalence", endToEnd);
  report(6, "threshold-gate semantics", thresholdGates);
  std::printf("criterion 7 EXCLUDED  energy, area and dataset accuracy are outside a desk-scale simulator\n");
  std::printf("%s: %d of 6 criteria failed\n", failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL", failures);
  return failures == 0 ? 0 : 1;
}
