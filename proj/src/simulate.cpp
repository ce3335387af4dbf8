// Copyright 2026 The Tulip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <bit>
#include <map>
#include <memory>
#include <tuple>

#include "tulip/arch.hpp"
#include "tulip/errors.hpp"
#include "tulip/scheduler.hpp"

namespace tulip {

namespace {

// Schedules are reused across every output neuron with the same shape.
class ScheduleCache {
 public:
  const Schedule& tree(int n) {
    auto& s = trees_[n];
    if (!s) s = std::make_unique<Schedule>(scheduleNode(n));
    return *s;
  }
  const Schedule& node(int n, std::int64_t theta, Activation act) {
    theta = std::clamp<std::int64_t>(theta, 0, n + 1);
    auto& s = nodes_[{n, theta, static_cast<int>(act)}];
    if (!s) s = std::make_unique<Schedule>(scheduleActivatedNode(n, theta, act));
    return *s;
  }
  const Schedule& accumulate(int width, int count, std::int64_t theta, Activation act) {
    theta = std::clamp<std::int64_t>(theta, 0, (std::int64_t{1} << width) * count);
    auto& s = accs_[{width, count, theta, static_cast<int>(act)}];
    if (!s) s = std::make_unique<Schedule>(scheduleActivatedAccumulate(width, count, theta, act));
    return *s;
  }
  const Schedule& maxpool(int window) {
    auto& s = pools_[window];
    if (!s) s = std::make_unique<Schedule>(scheduleMaxpool(window));
    return *s;
  }

 private:
  std::map<int, std::unique_ptr<Schedule>> trees_;
  std::map<std::tuple<int, std::int64_t, int>, std::unique_ptr<Schedule>> nodes_;
  std::map<std::tuple<int, int, std::int64_t, int>, std::unique_ptr<Schedule>> accs_;
  std::map<int, std::unique_ptr<Schedule>> pools_;
};

struct Pe {
  ScheduleCache cache;
  std::int64_t cycles = 0;

  std::uint64_t runBits(const Schedule& s, const std::vector<bool>& bits) {
    const PeState end = run(s, PeState{}, [&](int, int i) { return static_cast<bool>(bits[static_cast<std::size_t>(i)]); });
    cycles += static_cast<std::int64_t>(s.cycleCount);
    return readResult(end, s.result);
  }
  std::uint64_t runAddends(const Schedule& s, const std::vector<std::uint64_t>& addends) {
    const PeState end = run(s, PeState{}, [&](int op, int bit) {
      return ((addends[static_cast<std::size_t>(op)] >> bit) & 1U) != 0;
    });
    cycles += static_cast<std::int64_t>(s.cycleCount);
    return readResult(end, s.result);
  }
};

// Product bits of one output neuron, grouped into adder-tree chunks.
struct PendingNode {
  std::vector<std::vector<bool>> chunks;
  std::int64_t n = 0;
};

// Running sum of one output neuron on the MAC path.
struct PendingMac {
  std::int64_t acc = 0;  // signed for binary layers, plain dot product otherwise
  std::int64_t n = 0;
};

Activation activationOf(const LayerDescriptor& l) {
  return l.act == LayerActivation::Relu ? Activation::Relu : Activation::Threshold;
}

Tensor runCompute(const LayerDescriptor& l, const Tensor& input, Padding padding, Machine m,
                  const ArchConfig& cfg, Pe& pe, LayerCost& cost) {
  Tensor src = input;
  if (l.op == LayerOp::FullyConnected) src.dims = {1, 1, static_cast<int>(input.dims.size())};
  const bool bin = l.precision == Precision::Binary;
  const bool onPe = !runsOnMac(l, m);
  const FetchCounts fc = fetchCounts(l, m, cfg);
  const int ifmPerPass = effectiveIfm(l, m, cfg);
  const int batch = effectiveOfmBatch(l, m, cfg);
  const int pixels = l.out.x * l.out.y;

  Tensor out(l.out, l.outputsBinary());
  ImageBuffer buf(src);
  for (std::int64_t zb = 0; zb < fc.Z; ++zb) {
    const int o0 = static_cast<int>(zb) * batch;
    const int o1 = std::min(l.out.z, o0 + batch);
    std::vector<PendingNode> nodes(onPe ? static_cast<std::size_t>((o1 - o0) * pixels) : 0);
    std::vector<PendingMac> macs(onPe ? 0 : static_cast<std::size_t>((o1 - o0) * pixels));

    for (std::int64_t p = 0; p < fc.P; ++p) {
      const int c0 = static_cast<int>(p) * ifmPerPass;
      const int c1 = std::min(l.in.z, c0 + ifmPerPass);
      buf.loadPass(c0, c1 - c0);
      for (int r = 0; r < l.out.y; ++r) {
        for (int c = 0; c < l.out.x; ++c) {
          const int row0 = r * l.stride - l.pad;
          const int col0 = c * l.stride - l.pad;
          buf.loadWindow(row0, col0, l.k);
          for (int o = o0; o < o1; ++o) {
            const std::size_t slot = static_cast<std::size_t>((o - o0) * pixels + r * l.out.x + c);
            std::vector<bool> products;
            for (int i = c0; i < c1; ++i) {
              for (int kr = 0; kr < l.k; ++kr) {
                for (int kc = 0; kc < l.k; ++kc) {
                  const int y = row0 + kr;
                  const int x = col0 + kc;
                  const bool inside = y >= 0 && y < l.in.y && x >= 0 && x < l.in.x;
                  if (!inside && padding == Padding::Skip) continue;
                  const std::int64_t v = inside ? buf.read(i, y, x) : 0;
                  const std::uint8_t w = l.weight(o, i, kr, kc);
                  if (onPe) {
                    products.push_back((v != 0) == (w != 0));  // XNOR
                  } else if (bin) {
                    macs[slot].acc += (v != 0) == (w != 0) ? 1 : -1;
                    ++macs[slot].n;
                  } else {
                    macs[slot].acc += w ? v : -v;
                  }
                }
              }
            }
            if (onPe) {
              auto& node = nodes[slot];
              node.n += static_cast<std::int64_t>(products.size());
              // split a pass above the largest tree into near-equal chunks
              const std::size_t pieces = (products.size() + kMaxTreeInputs - 1) / kMaxTreeInputs;
              std::size_t at = 0;
              for (std::size_t k = 0; k < pieces; ++k) {
                const std::size_t take = (products.size() - at + (pieces - k) - 1) / (pieces - k);
                node.chunks.emplace_back(products.begin() + static_cast<std::ptrdiff_t>(at),
                                         products.begin() + static_cast<std::ptrdiff_t>(at + take));
                at += take;
              }
            }
          }
        }
      }
    }

    for (int o = o0; o < o1; ++o) {
      for (int px = 0; px < pixels; ++px) {
        const std::size_t slot = static_cast<std::size_t>((o - o0) * pixels + px);
        std::int64_t value = 0;
        if (onPe) {
          auto& node = nodes[slot];
          const std::int64_t theta = foldThreshold(l.threshold(o), l.bias(o), node.n);
          const Activation act = activationOf(l);
          std::erase_if(node.chunks, [](const auto& ch) { return ch.empty(); });
          if (node.chunks.empty()) {
            // every product was padding
            value = 0 >= theta && act == Activation::Threshold ? 1 : 0;
          } else if (node.chunks.size() == 1) {
            const auto& bits = node.chunks[0];
            value = static_cast<std::int64_t>(pe.runBits(pe.cache.node(static_cast<int>(bits.size()), theta, act), bits));
          } else {
            std::vector<std::uint64_t> partial;
            std::size_t widest = 0;
            for (const auto& bits : node.chunks) {
              partial.push_back(pe.runBits(pe.cache.tree(static_cast<int>(bits.size())), bits));
              widest = std::max(widest, bits.size());
            }
            const int width = std::bit_width(widest);
            value = static_cast<std::int64_t>(
                pe.runAddends(pe.cache.accumulate(width, static_cast<int>(partial.size()), theta, act), partial));
          }
        } else if (bin) {
          const auto& mac = macs[slot];
          const std::int64_t pc = (mac.acc + mac.n) / 2;
          const bool fires = pc >= foldThreshold(l.threshold(o), l.bias(o), mac.n);
          value = l.act == LayerActivation::Relu ? (fires ? pc : 0) : (fires ? 1 : 0);
        } else {
          value = macs[slot].acc + l.bias(o) >= l.threshold(o) ? 1 : 0;
        }
        out.values[static_cast<std::size_t>(o) * pixels + px] = value;
      }
    }
  }
  cost.l2Loads = buf.l2Loads();
  return out;
}

Tensor runMaxpool(const LayerDescriptor& l, const Tensor& in, Machine m, Pe& pe) {
  if (!in.binary) throw ContractError("maxpool '" + l.name + "' needs a binary input");
  Tensor out(l.out, true);
  const Schedule* s = m == Machine::Tulip ? &pe.cache.maxpool(l.k * l.k) : nullptr;
  std::vector<bool> window(static_cast<std::size_t>(l.k * l.k));
  for (int z = 0; z < l.out.z; ++z) {
    for (int r = 0; r < l.out.y; ++r) {
      for (int c = 0; c < l.out.x; ++c) {
        for (int kr = 0; kr < l.k; ++kr) {
          for (int kc = 0; kc < l.k; ++kc) {
            window[static_cast<std::size_t>(kr * l.k + kc)] = in.at(z, r * l.stride + kr, c * l.stride + kc) != 0;
          }
        }
        out.at(z, r, c) = s ? static_cast<std::int64_t>(pe.runBits(*s, window))
                            : std::any_of(window.begin(), window.end(), [](bool b) { return b; });
      }
    }
  }
  return out;
}

}  // namespace

SimulationResult simulateNetwork(const Network& net, const Tensor& input, Machine m, const ArchConfig& cfg) {
  validate(cfg);
  validateNetwork(net);
  if (!net.layers.empty()) {
    const auto& first = net.layers.front();
    const bool fits = first.op == LayerOp::FullyConnected ? input.dims.size() == first.in.z : input.dims == first.in;
    if (!fits) {
      throw ContractError("input " + formatDims(input.dims) + " does not fit layer '" + first.name + "' (" +
                          formatDims(first.in) + ")");
    }
    if (!input.binary && (first.op == LayerOp::Maxpool || first.precision == Precision::Binary)) {
      throw ContractError("layer '" + first.name + "' needs a binary input");
    }
  }
  for (const auto& l : net.layers) {
    if (l.isCompute() && !l.hasWeights()) throw ContractError("layer '" + l.name + "' has no weights");
  }

  SimulationResult result;
  Pe pe;
  Tensor cur = input;
  for (const auto& l : net.layers) {
    if (l.op == LayerOp::Maxpool) {
      cur = runMaxpool(l, cur, m, pe);
      continue;
    }
    LayerCost cost;
    cur = runCompute(l, cur, net.padding, m, cfg, pe, cost);
    const FetchCounts fc = fetchCounts(l, m, cfg);
    cost.layer = l.name;
    cost.machine = m;
    cost.P = fc.P;
    cost.Z = fc.Z;
    cost.ops = opCount(l);
    cost.cycles = layerCycles(l, m, cfg);
    cost.timeNs = timeFromCycles(cost.cycles, cfg);
    result.cost.add(cost);
  }
  result.output = std::move(cur);
  result.peCycles = pe.cycles;
  return result;
}

}  // namespace tulip
