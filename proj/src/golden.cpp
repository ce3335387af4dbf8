// Copyright 2026 The Tulip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

// Reference forward pass. Binary layers are evaluated in the signed domain
// (+1/-1 activations and weights against a signed threshold), so this file
// never uses the popcount folding that the simulator relies on.

#include <string>

#include "tulip/errors.hpp"
#include "tulip/network.hpp"

namespace tulip {

namespace {

std::int64_t sign(std::int64_t bit) { return bit ? 1 : -1; }

Tensor evalCompute(const LayerDescriptor& l, const Tensor& in, Padding padding) {
  if (!l.hasWeights()) throw ContractError("layer '" + l.name + "' has no weights to evaluate");
  const bool bin = l.precision == Precision::Binary;
  if (bin && !in.binary) throw ContractError("layer '" + l.name + "' needs a binary input");
  // a fully connected layer sees the input flattened into channels
  Tensor src = in;
  if (l.op == LayerOp::FullyConnected) src.dims = {1, 1, static_cast<int>(in.dims.size())};

  Tensor out(l.out, l.outputsBinary());
  for (int o = 0; o < l.out.z; ++o) {
    for (int r = 0; r < l.out.y; ++r) {
      for (int c = 0; c < l.out.x; ++c) {
        std::int64_t acc = 0;
        std::int64_t n = 0;
        for (int i = 0; i < l.in.z; ++i) {
          for (int kr = 0; kr < l.k; ++kr) {
            for (int kc = 0; kc < l.k; ++kc) {
              const int y = r * l.stride - l.pad + kr;
              const int x = c * l.stride - l.pad + kc;
              const bool inside = y >= 0 && y < l.in.y && x >= 0 && x < l.in.x;
              if (!inside && padding == Padding::Skip) continue;
              const std::int64_t v = inside ? src.at(i, y, x) : 0;
              const std::int64_t w = sign(l.weight(o, i, kr, kc));
              acc += bin ? sign(v) * w : v * w;
              ++n;
            }
          }
        }
        const bool fires = acc + l.bias(o) >= l.threshold(o);
        if (bin && l.act == LayerActivation::Relu) {
          // number of agreeing products
          out.at(o, r, c) = fires ? (acc + n) / 2 : 0;
        } else {
          out.at(o, r, c) = fires ? 1 : 0;
        }
      }
    }
  }
  return out;
}

Tensor evalMaxpool(const LayerDescriptor& l, const Tensor& in) {
  if (!in.binary) throw ContractError("maxpool '" + l.name + "' needs a binary input");
  Tensor out(l.out, true);
  for (int z = 0; z < l.out.z; ++z) {
    for (int r = 0; r < l.out.y; ++r) {
      for (int c = 0; c < l.out.x; ++c) {
        std::int64_t any = 0;
        for (int kr = 0; kr < l.k; ++kr) {
          for (int kc = 0; kc < l.k; ++kc) any |= in.at(z, r * l.stride + kr, c * l.stride + kc);
        }
        out.at(z, r, c) = any;
      }
    }
  }
  return out;
}

}  // namespace

std::vector<Tensor> goldenEvalTrace(const Network& net, const Tensor& input) {
  std::vector<Tensor> outs;
  outs.reserve(net.layers.size());
  const Tensor* cur = &input;
  for (const auto& l : net.layers) {
    const bool fits = l.op == LayerOp::FullyConnected ? cur->dims.size() == l.in.z : cur->dims == l.in;
    if (!fits) {
      throw ContractError("layer '" + l.name + "' expects " + formatDims(l.in) + ", got " +
                          formatDims(cur->dims));
    }
    outs.push_back(l.op == LayerOp::Maxpool ? evalMaxpool(l, *cur) : evalCompute(l, *cur, net.padding));
    cur = &outs.back();
  }
  return outs;
}

Tensor goldenEval(const Network& net, const Tensor& input) {
  if (net.layers.empty()) return input;
  return goldenEvalTrace(net, input).back();
}

}  // namespace tulip
