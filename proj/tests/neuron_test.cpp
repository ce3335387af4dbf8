// Copyright 2026 The Tulip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"
#include "oracles.hpp"
#include "tulip/errors.hpp"
#include "tulip/neuron.hpp"

using namespace tulip;

TEST_CASE("evalThreshold on the [2,1,1,1;3] example") {
  const ThresholdFunction tf({2, 1, 1, 1}, 3);
  CHECK(evalThreshold(tf, {true, true, false, false}));
  CHECK(evalThreshold(tf, {false, true, true, true}));
  CHECK_FALSE(evalThreshold(tf, {true, false, false, false}));
  for (unsigned k = 0; k < 16; ++k) {
    const bool a = k & 1, b = k & 2, c = k & 4, d = k & 8;
    CHECK(evalThreshold(tf, {a, b, c, d}) == oracle::workedExample(a, b, c, d));
  }
}

TEST_CASE("evalThreshold edge cases") {
  CHECK_FALSE(evalThreshold(ThresholdFunction({1}, 1), {false}));
  CHECK_THROWS_AS(evalThreshold(ThresholdFunction({1, 1}, 1), {true}), ContractError);
  CHECK_THROWS_AS(ThresholdFunction({}, 0), ContractError);
}

TEST_CASE("evalThreshold agrees with sum-and-compare on random functions") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const auto n = static_cast<std::size_t>(oracle::uniform(rng, 1, 10));
    std::vector<std::int64_t> w(n);
    for (auto& x : w) x = static_cast<std::int64_t>(oracle::uniform(rng, 0, 14)) - 7;
    const auto t = static_cast<std::int64_t>(oracle::uniform(rng, 0, 20)) - 10;
    const auto x = oracle::randomBits(rng, n);
    CHECK(evalThreshold(ThresholdFunction(w, t), x) == oracle::sumCompare(w, t, x));
  }
}

TEST_CASE("positive weights are monotone") {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 200; ++i) {
    const auto n = static_cast<std::size_t>(oracle::uniform(rng, 1, 10));
    std::vector<std::int64_t> w(n);
    for (auto& x : w) x = static_cast<std::int64_t>(oracle::uniform(rng, 0, 5));
    const ThresholdFunction tf(w, static_cast<std::int64_t>(oracle::uniform(rng, 0, 15)));
    const auto table = truthTable(tf);
    for (std::uint64_t k = 0; k < table.size(); ++k) {
      for (std::size_t bit = 0; bit < n; ++bit) {
        if (table[k] && !table[k | (std::uint64_t{1} << bit)]) FAIL("monotonicity violated");
      }
    }
  }
}

TEST_CASE("truthTable") {
  CHECK(truthTable(ThresholdFunction({1, 1}, 2)) == std::vector<bool>{false, false, false, true});
  const auto orTable = truthTable(ThresholdFunction({1, 1, 1, 1}, 1));
  CHECK_FALSE(orTable[0]);
  for (std::size_t k = 1; k < 16; ++k) CHECK(orTable[k]);
  // 3-input majority, enumerated by hand
  CHECK(truthTable(ThresholdFunction({1, 1, 1}, 2)) ==
        std::vector<bool>{false, false, false, true, false, true, true, true});
  CHECK_THROWS_AS(truthTable(ThresholdFunction(std::vector<std::int64_t>(21, 1), 1)), ContractError);
}

TEST_CASE("evalNeuron") {
  NeuronConfig cfg;
  cfg.enabled = true;
  cfg.threshold = 2;
  CHECK(evalNeuron(cfg, false, true, true, false, false));

  cfg.threshold = 3;
  cfg.complement = {true, false, false, false};
  CHECK(evalNeuron(cfg, false, true, true, true, false));

  NeuronConfig gated;
  gated.threshold = 2;
  gated.enabled = false;
  CHECK(evalNeuron(gated, false, false, false, false, true));
  CHECK_FALSE(evalNeuron(gated, true, true, true, true, false));

  NeuronConfig bad;
  bad.threshold = 7;
  CHECK_THROWS_AS(validate(bad), ContractError);
}

TEST_CASE("T=0 and T=6 are constants") {
  NeuronConfig on{0, {}, true};
  NeuronConfig off{6, {}, true};
  for (unsigned k = 0; k < 16; ++k) {
    CHECK(evalNeuron(on, k & 1, k & 2, k & 4, k & 8, false));
    CHECK_FALSE(evalNeuron(off, k & 1, k & 2, k & 4, k & 8, true));
  }
}

TEST_CASE("complementing an input equals moving its weight to the threshold side") {
  // w*(not x) = w - w*x: complementing input i of [w;T] gives weight -w_i and
  // threshold T - w_i.
  const std::array<std::int64_t, 4> w{2, 1, 1, 1};
  for (int t = 0; t <= 6; ++t) {
    for (unsigned mask = 0; mask < 16; ++mask) {
      NeuronConfig cfg;
      cfg.enabled = true;
      cfg.threshold = t;
      std::vector<std::int64_t> weights(w.begin(), w.end());
      std::int64_t thr = t;
      for (int i = 0; i < 4; ++i) {
        cfg.complement[i] = (mask >> i) & 1U;
        if (cfg.complement[i]) {
          weights[i] = -w[i];
          thr -= w[i];
        }
      }
      const ThresholdFunction equivalent(weights, thr);
      for (unsigned k = 0; k < 16; ++k) {
        const bool a = k & 1, b = k & 2, c = k & 4, d = k & 8;
        CHECK(evalNeuron(cfg, a, b, c, d, false) == evalThreshold(equivalent, {a, b, c, d}));
      }
    }
  }
}

TEST_CASE("full-adder neuron configurations match the full-adder truth table") {
  NeuronConfig carry{2, {}, true};
  NeuronConfig sum{3, {true, false, false, false}, true};
  for (unsigned k = 0; k < 8; ++k) {
    const bool x = k & 1, y = k & 2, cin = k & 4;
    const int total = int(x) + int(y) + int(cin);
    const bool cout = evalNeuron(carry, false, x, y, cin, false);
    CHECK(cout == (total >= 2));
    CHECK(evalNeuron(sum, cout, x, y, cin, false) == (total % 2 == 1));
  }
}

TEST_CASE("comparator cell keeps, sets, or clears") {
  NeuronConfig cell{2, {false, false, true, false}, true};
  for (unsigned k = 0; k < 8; ++k) {
    const bool xi = k & 1, yi = k & 2, prev = k & 4;
    const bool expected = xi == yi ? prev : xi;
    CHECK(evalNeuron(cell, false, xi, yi, prev, false) == expected);
  }
}
