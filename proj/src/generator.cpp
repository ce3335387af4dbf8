// Copyright 2026 The Tulip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <random>
#include <string>

#include "tulip/errors.hpp"
#include "tulip/network.hpp"

namespace tulip {

namespace {

// std::uniform_int_distribution differs between standard libraries; plain
// modulo keeps networks identical everywhere for a given seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  int range(int lo, int hi) { return lo + static_cast<int>(gen_() % static_cast<std::uint64_t>(hi - lo + 1)); }
  bool chance(int percent) { return range(0, 99) < percent; }
  std::uint8_t bit() { return static_cast<std::uint8_t>(gen_() & 1U); }

 private:
  std::mt19937_64 gen_;
};

struct Cursor {
  Dims dims;
  bool binary = true;
  std::int64_t maxValue = 1;
  int convs = 0;
  bool lastWasPool = false;
};

void fillParameters(LayerDescriptor& l, Rng& rng, std::int64_t maxInput) {
  l.weights.resize(static_cast<std::size_t>(l.weightCount()));
  for (auto& w : l.weights) w = rng.bit();
  const auto n = static_cast<int>(l.fanIn());
  // signed sums span [-n, n] for binary layers and [-n*max, n*max] otherwise
  const int span = l.precision == Precision::Binary
                       ? n
                       : static_cast<int>(std::min<std::int64_t>(std::int64_t{n} * maxInput, 1 << 20));
  l.thresholds.resize(static_cast<std::size_t>(l.out.z));
  l.biases.resize(static_cast<std::size_t>(l.out.z));
  for (auto& t : l.thresholds) t = rng.range(-span / 3 - 1, span / 3 + 1);
  for (auto& b : l.biases) b = rng.chance(50) ? 0 : rng.range(-3, 3);
}

LayerDescriptor makeConv(Cursor& cur, Rng& rng, const RandomNetworkLimits& lim, bool forceInt) {
  LayerDescriptor l;
  l.op = LayerOp::Conv;
  l.precision = (forceInt || !cur.binary || rng.chance(30)) ? Precision::Integer : Precision::Binary;
  l.in = cur.dims;
  const int small = std::min(cur.dims.x, cur.dims.y);
  l.k = std::min(rng.range(1, 3), small + 2);
  // only odd kernels are padded, so a map never grows
  l.pad = l.k == 3 && rng.chance(50) ? 1 : 0;
  if (small + 2 * l.pad < l.k) l.k = small + 2 * l.pad;
  l.stride = small >= 6 && rng.chance(25) ? 2 : 1;
  l.out = {(l.in.x + 2 * l.pad - l.k) / l.stride + 1, (l.in.y + 2 * l.pad - l.k) / l.stride + 1,
           rng.range(1, lim.maxChannels)};
  if (l.precision == Precision::Binary && rng.chance(30)) l.act = LayerActivation::Relu;
  return l;
}

}  // namespace

GeneratedNetwork generateRandomNetwork(std::uint64_t seed, int depth, const RandomNetworkLimits& lim) {
  if (depth < 0) throw ContractError("depth must be non-negative");
  if (lim.maxSpatial < 2 || lim.maxChannels < 1) throw ContractError("limits too small");
  Rng rng(seed);
  GeneratedNetwork g;
  g.net.padding = rng.chance(25) ? Padding::Skip : Padding::Zero;

  Cursor cur;
  cur.dims = {rng.range(2, lim.maxSpatial), rng.range(2, lim.maxSpatial), rng.range(1, lim.maxChannels)};
  cur.binary = rng.chance(60);
  cur.maxValue = cur.binary ? 1 : 7;
  g.input = Tensor(cur.dims, cur.binary);
  for (auto& v : g.input.values) v = rng.range(0, static_cast<int>(cur.maxValue));

  int computeCount = 0;
  int poolCount = 0;
  for (int i = 0; i < depth; ++i) {
    const bool last = i + 1 == depth;
    const bool canPool = cur.binary && !cur.lastWasPool && std::min(cur.dims.x, cur.dims.y) >= 2;
    const bool canConv = cur.convs < lim.maxConvLayers;
    const int roll = rng.range(0, 99);

    LayerDescriptor l;
    if (canPool && (roll < 25 || !canConv)) {
      l.op = LayerOp::Maxpool;
      l.name = "pool" + std::to_string(++poolCount);
      l.in = cur.dims;
      l.k = std::min({rng.range(2, 3), cur.dims.x, cur.dims.y});
      l.stride = rng.chance(50) ? l.k : std::max(1, l.k - 1);
      l.out = {(l.in.x - l.k) / l.stride + 1, (l.in.y - l.k) / l.stride + 1, l.in.z};
    } else if (canConv && (roll < 85 || !last)) {
      l = makeConv(cur, rng, lim, false);
      l.name = "L" + std::to_string(++computeCount);
      ++cur.convs;
    } else {
      l.op = LayerOp::FullyConnected;
      l.name = "L" + std::to_string(++computeCount);
      l.precision = cur.binary && rng.chance(60) ? Precision::Binary : Precision::Integer;
      l.in = {1, 1, static_cast<int>(cur.dims.size())};
      l.out = {1, 1, rng.range(1, lim.maxChannels)};
      if (l.precision == Precision::Binary && rng.chance(30)) l.act = LayerActivation::Relu;
    }
    if (l.isCompute()) fillParameters(l, rng, cur.maxValue);

    cur.lastWasPool = l.op == LayerOp::Maxpool;
    cur.dims = l.out;
    cur.binary = l.outputsBinary();
    cur.maxValue = cur.binary ? 1 : l.fanIn();
    g.net.layers.push_back(std::move(l));
  }
  validateNetwork(g.net);
  return g;
}

}  // namespace tulip
