// Copyright 2026 The Tulip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#include "tulip/scheduler.hpp"

#include <algorithm>
#include <bit>
#include <string>

#include "packer.hpp"
#include "tulip/errors.hpp"

namespace tulip {

namespace {

using detail::Fragment;
using detail::FragmentCycle;

constexpr int kCarryThreshold = 2;  // [1,1,1;2] majority on b, c, d
constexpr int kSumThreshold = 3;    // [2,1,1,1;3] with a = complement of carry-out
constexpr int kBufferThreshold = 2; // a alone reaches 2

// A value either resident in register bits or streamed on external channels.
// Streamed operands use `channelBase` when read by a carry/comparator neuron
// and `channelBase + 1` when read by a sum neuron one cycle later.
struct Operand {
  std::vector<BitLocation> regs;
  int stream = -1;
  int channelBase = 0;
  int width = 0;

  static Operand inRegisters(std::vector<BitLocation> bits) {
    Operand op;
    op.width = static_cast<int>(bits.size());
    op.regs = std::move(bits);
    return op;
  }
  static Operand streamed(int operand, int width, int channelBase) {
    Operand op;
    op.stream = operand;
    op.width = width;
    op.channelBase = channelBase;
    return op;
  }
};

SourceSelect bitSource(const Operand& op, int i, int port, FragmentCycle& cyc) {
  if (i < 0 || i >= op.width) return SourceSelect::zero();
  if (op.stream >= 0) {
    const int ch = op.channelBase + port;
    cyc.taps[ch] = {op.stream, i};
    return SourceSelect::external(ch);
  }
  const auto& b = op.regs[static_cast<std::size_t>(i)];
  return SourceSelect::reg(b.reg, b.bit);
}

NeuronSlot makeSlot(int threshold, std::array<SourceSelect, 4> src,
                    std::array<bool, 4> complement = {}) {
  NeuronSlot s;
  s.cfg.threshold = threshold;
  s.cfg.complement = complement;
  s.cfg.enabled = true;
  s.src = src;
  return s;
}

RegisterWrite writeOf(const BitLocation& b, int neuron) {
  return {static_cast<std::uint8_t>(b.reg), static_cast<std::uint8_t>(b.bit),
          static_cast<std::uint8_t>(neuron)};
}

struct AdderRoles {
  int carry;
  int sum;
  int delay;
};

// Bit k's carry-out is formed in cycle k; its sum bit in cycle k + 1 from the
// complemented carry-out, the operand bits, and the carry-in that the delay
// neuron copied from the carry neuron one cycle earlier.
Fragment adderFragment(const Operand& x, const Operand& y, const std::vector<BitLocation>& dst,
                       const AdderRoles& ro) {
  const int w = std::max(x.width, y.width);
  const int rw = static_cast<int>(dst.size());
  if (w < 1 || rw < w || rw > w + 1) throw ContractError("adder result width mismatch");
  const auto Z = SourceSelect::zero();
  Fragment f;
  for (int k = 0; k <= w; ++k) {
    auto& cyc = f.at(static_cast<std::size_t>(k));
    if (k < w) {
      const auto cin = k == 0 ? Z : SourceSelect::neuron(ro.carry);
      cyc.compute[ro.carry] =
          makeSlot(kCarryThreshold, {Z, bitSource(x, k, 0, cyc), bitSource(y, k, 0, cyc), cin});
    }
    if (k >= 1 && k <= w - 1) {
      cyc.compute[ro.delay] = makeSlot(kBufferThreshold, {SourceSelect::neuron(ro.carry), Z, Z, Z});
    }
    if (k >= 1) {
      const int bit = k - 1;
      const auto cin = bit == 0 ? Z : SourceSelect::neuron(ro.delay);
      cyc.compute[ro.sum] = makeSlot(
          kSumThreshold,
          {SourceSelect::neuron(ro.carry), bitSource(x, bit, 1, cyc), bitSource(y, bit, 1, cyc), cin},
          {true, false, false, false});
      cyc.writes.push_back(writeOf(dst[static_cast<std::size_t>(bit)], ro.sum));
    }
  }
  if (rw > w) f.at(static_cast<std::size_t>(w) + 1).writes.push_back(writeOf(dst.back(), ro.carry));
  return f;
}

// Three (or two) input bits: carry in cycle 0, sum in cycle 1. The inputs are
// presented on the same channels in both cycles.
Fragment leafFragment(const AdderNode& leaf, const std::vector<BitLocation>& dst, int carryN,
                      int sumN, int channelBase) {
  const auto Z = SourceSelect::zero();
  Fragment f;
  const auto& ins = leaf.leafInputs;
  if (ins.size() == 1) {
    auto& c0 = f.at(0);
    c0.taps[channelBase] = {0, ins[0]};
    c0.compute[sumN] = makeSlot(kBufferThreshold, {SourceSelect::external(channelBase), Z, Z, Z});
    c0.writes.push_back(writeOf(dst[0], sumN));
    return f;
  }
  std::array<SourceSelect, 3> in{Z, Z, Z};
  for (std::size_t i = 0; i < ins.size(); ++i) in[i] = SourceSelect::external(channelBase + static_cast<int>(i));
  for (std::size_t r = 0; r < 2; ++r) {
    auto& cyc = f.at(r);
    for (std::size_t i = 0; i < ins.size(); ++i) cyc.taps[channelBase + i] = {0, ins[i]};
  }
  f.at(0).compute[carryN] = makeSlot(kCarryThreshold, {Z, in[0], in[1], in[2]});
  f.at(0).writes.push_back(writeOf(dst[1], carryN));
  f.at(1).compute[sumN] =
      makeSlot(kSumThreshold, {SourceSelect::neuron(carryN), in[0], in[1], in[2]}, {true, false, false, false});
  f.at(1).writes.push_back(writeOf(dst[0], sumN));
  return f;
}

std::vector<AdderRoles> adderRoleOrder() {
  std::vector<AdderRoles> roles{{2, 1, 0}, {3, 0, 1}};
  for (int c = 0; c < kNeurons; ++c)
    for (int s = 0; s < kNeurons; ++s)
      for (int d = 0; d < kNeurons; ++d) {
        if (c == s || c == d || s == d) continue;
        if ((c == 2 && s == 1 && d == 0) || (c == 3 && s == 0 && d == 1)) continue;
        roles.push_back({c, s, d});
      }
  return roles;
}

const std::vector<AdderRoles>& adderRoles() {
  static const std::vector<AdderRoles> roles = adderRoleOrder();
  return roles;
}

constexpr std::array<int, 2> kLeafChannelBanks{0, 3};

// Threshold comparison against a compile-time constant: per bit the neuron
// computes maj(x_i, not y_i, previous) so that x_i > y_i sets, x_i < y_i
// clears, and equal bits keep the previous decision.
struct Comparand {
  bool constant = false;
  bool constantValue = false;
  std::uint64_t y = 0;
};

Comparand comparandFor(int width, std::int64_t effectiveThreshold) {
  Comparand c;
  const std::int64_t y = effectiveThreshold - 1;
  if (y < 0) {
    c.constant = true;
    c.constantValue = true;
  } else if (width < 63 && y >= (std::int64_t{1} << width)) {
    c.constant = true;
    c.constantValue = false;
  } else {
    c.y = static_cast<std::uint64_t>(y);
  }
  return c;
}

void emitComparator(Fragment& f, const Operand& x, const Comparand& cmp, int flagNeuron) {
  const auto Z = SourceSelect::zero();
  if (cmp.constant) {
    f.at(0).compute[flagNeuron] =
        makeSlot(cmp.constantValue ? kMinNeuronThreshold : kMaxNeuronThreshold, {Z, Z, Z, Z});
    return;
  }
  for (int i = 0; i < x.width; ++i) {
    auto& cyc = f.at(static_cast<std::size_t>(i));
    const bool yi = (cmp.y >> i) & 1U;
    const auto prev = i == 0 ? Z : SourceSelect::neuron(flagNeuron);
    cyc.compute[flagNeuron] = makeSlot(
        kCarryThreshold, {Z, bitSource(x, i, 0, cyc), SourceSelect::constant(yi), prev},
        {false, false, true, false});
  }
}

// AND of every stored bit with the comparator flag: [1,1;2] on (b, c).
void emitGate(Fragment& f, const Operand& x, int flagNeuron, int gateNeuron,
              const std::vector<BitLocation>& out) {
  const auto Z = SourceSelect::zero();
  const std::size_t base = f.cycles.size();
  for (int i = 0; i < x.width; ++i) {
    auto& cyc = f.at(base + static_cast<std::size_t>(i));
    cyc.compute[gateNeuron] =
        makeSlot(kCarryThreshold, {Z, bitSource(x, i, 0, cyc), SourceSelect::neuron(flagNeuron), Z});
    cyc.writes.push_back(writeOf(out[static_cast<std::size_t>(i)], gateNeuron));
  }
}

class Builder {
 public:
  detail::Packer packer;
  detail::RegisterAllocator alloc;

  Schedule finish(ResultLocation result, std::vector<int> rpo = {}) {
    Schedule s;
    s.program = packer.takeProgram();
    s.taps = packer.takeTaps();
    s.cycleCount = s.program.size();
    s.peakLiveBits = measurePeakLiveBits(s.program);
    s.result = std::move(result);
    s.rpoOrder = std::move(rpo);
    return s;
  }

  std::vector<BitLocation> emitAdd(const Operand& x, const Operand& y, std::vector<BitLocation> dst,
                                   bool preferredRolesOnly = false) {
    std::vector<Fragment> candidates;
    const auto& roles = adderRoles();
    const std::size_t count = preferredRolesOnly ? 2 : roles.size();
    for (std::size_t i = 0; i < count; ++i) candidates.push_back(adderFragment(x, y, dst, roles[i]));
    packer.place(candidates);
    return dst;
  }

  std::vector<BitLocation> emitTree(const AdderTree& tree, const std::vector<int>& order) {
    std::vector<std::vector<BitLocation>> loc(tree.nodes.size());
    std::vector<bool> rightChild(tree.nodes.size(), false);
    for (const auto& n : tree.nodes) {
      if (!n.isLeaf()) rightChild[static_cast<std::size_t>(n.right)] = true;
    }
    for (int id : order) {
      const AdderNode& node = tree.node(id);
      const int preferred = rightChild[static_cast<std::size_t>(id)] ? 2 : 1;  // R3 : R2
      auto& dst = loc[static_cast<std::size_t>(id)];
      if (node.isLeaf()) {
        dst = alloc.allocate(node.outputWidth, preferred);
        std::vector<Fragment> candidates;
        for (int bank : kLeafChannelBanks) {
          for (const auto& r : adderRoles()) {
            if (node.leafInputs.size() == 1 && r.carry != adderRoles()[0].carry) continue;
            candidates.push_back(leafFragment(node, dst, r.carry, r.sum, bank));
          }
        }
        packer.place(candidates);
        continue;
      }
      auto& lhs = loc[static_cast<std::size_t>(node.left)];
      auto& rhs = loc[static_cast<std::size_t>(node.right)];
      const int w = std::max(lhs.size(), rhs.size());
      if (node.outputWidth != w + 1) throw ContractError("adder tree width invariant broken");
      dst = alloc.allocate(node.outputWidth, preferred);
      emitAdd(Operand::inRegisters(lhs), Operand::inRegisters(rhs), dst);
      alloc.release(lhs);
      alloc.release(rhs);
      lhs.clear();
      rhs.clear();
    }
    return loc[static_cast<std::size_t>(tree.root)];
  }

  std::vector<BitLocation> emitAccumulate(int addendWidth, int count, int channelBase) {
    const std::uint64_t maxAddend = (std::uint64_t{1} << addendWidth) - 1;
    std::vector<BitLocation> acc;
    for (int k = 0; k < count; ++k) {
      const int needed = std::bit_width(static_cast<std::uint64_t>(k + 1) * maxAddend);
      if (needed > kRegisterBits) {
        throw ScheduleError("accumulator overflow: " + std::to_string(count) + " addends of " +
                            std::to_string(addendWidth) + " bits need more than 16 bits");
      }
      const int w = std::max(static_cast<int>(acc.size()), addendWidth);
      const int rw = std::min(w + 1, needed);
      auto dst = alloc.allocateIn(rw, k % 2 == 0 ? 1 : 3);  // R2 on even steps, R4 on odd
      emitAdd(Operand::inRegisters(acc), Operand::streamed(k, addendWidth, channelBase), dst);
      alloc.release(acc);
      acc = std::move(dst);
    }
    return acc;
  }

  // Activation on a register-resident value; returns where the result ends up.
  ResultLocation emitActivation(const std::vector<BitLocation>& value, std::int64_t threshold,
                                Activation act) {
    const Operand x = Operand::inRegisters(value);
    const Comparand cmp = comparandFor(x.width, threshold);
    constexpr int kFlag = 3;  // N4
    constexpr int kGate = 0;  // N1
    Fragment f;
    emitComparator(f, x, cmp, kFlag);
    ResultLocation res;
    if (act == Activation::Threshold) {
      res.neuron = kFlag;
    } else {
      res.bits = alloc.allocate(x.width, 3);
      emitGate(f, x, kFlag, kGate, res.bits);
    }
    packer.place({f});
    return res;
  }
};

void checkWidth(int width, int lo, int hi, const char* what) {
  if (width < lo || width > hi) {
    throw ScheduleError(std::string(what) + " width " + std::to_string(width) + " outside [" +
                        std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

void checkRepresentable(int width, std::int64_t effective) {
  const Comparand c = comparandFor(width, effective);
  if (c.constant) {
    throw ScheduleError("threshold " + std::to_string(effective) + " not representable as a " +
                        std::to_string(width) + "-bit comparand");
  }
}

}  // namespace

std::vector<ExternalWord> buildTrace(const Schedule& s,
                                     const std::function<bool(int operand, int bit)>& bitOf) {
  std::vector<ExternalWord> trace(s.program.size(), 0);
  for (std::size_t t = 0; t < s.taps.size() && t < trace.size(); ++t) {
    for (int c = 0; c < kExternalChannels; ++c) {
      const auto& tap = s.taps[t][c];
      if (tap.used() && bitOf(tap.operand, tap.bit)) trace[t] |= ExternalWord{1} << c;
    }
  }
  return trace;
}

PeState run(const Schedule& s, const PeState& initial,
            const std::function<bool(int operand, int bit)>& bitOf) {
  const auto trace = buildTrace(s, bitOf);
  return runProgram(initial, s.program, trace);
}

std::uint64_t readResult(const PeState& st, const ResultLocation& where) {
  if (where.inNeuron()) return st.neuronOut.at(static_cast<std::size_t>(where.neuron)) ? 1 : 0;
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < where.bits.size(); ++i) {
    if (st.registerBit(where.bits[i].reg, where.bits[i].bit)) v |= std::uint64_t{1} << i;
  }
  return v;
}

void loadBits(PeState& st, const std::vector<BitLocation>& where, std::uint64_t value) {
  for (std::size_t i = 0; i < where.size(); ++i) {
    const auto mask = static_cast<std::uint16_t>(1U << where[i].bit);
    auto& reg = st.registers.at(static_cast<std::size_t>(where[i].reg));
    if ((value >> i) & 1U) {
      reg |= mask;
    } else {
      reg &= static_cast<std::uint16_t>(~mask);
    }
  }
}

Schedule scheduleAdd(int widthX, int widthY, int parity) {
  checkWidth(widthX, 1, kMaxAddOperandWidth, "adder operand");
  checkWidth(widthY, 1, kMaxAddOperandWidth, "adder operand");
  if (parity != 0 && parity != 1) throw ContractError("adder parity must be 0 or 1");
  Builder b;
  const int xr = parity == 0 ? 0 : 1;
  const int yr = parity == 0 ? 3 : 2;
  const int dr = parity == 0 ? 1 : 0;
  auto xs = b.alloc.allocateIn(widthX, xr);
  auto ys = b.alloc.allocateIn(widthY, yr);
  auto dst = b.alloc.allocateIn(std::max(widthX, widthY) + 1, dr);
  const AdderRoles roles = parity == 0 ? AdderRoles{2, 1, 0} : AdderRoles{3, 0, 1};
  b.packer.place({adderFragment(Operand::inRegisters(xs), Operand::inRegisters(ys), dst, roles)});
  ResultLocation res;
  res.bits = dst;
  Schedule s = b.finish(res);
  s.operands = {xs, ys};
  return s;
}

Schedule scheduleNode(const AdderTree& tree) {
  Builder b;
  auto order = rpoSchedule(tree);
  ResultLocation res;
  res.bits = b.emitTree(tree, order);
  return b.finish(res, std::move(order));
}

Schedule scheduleNode(int n) { return scheduleNode(buildAdderTree(n)); }

Schedule scheduleAccumulate(int addendWidth, int count) {
  checkWidth(addendWidth, 1, kRegisterBits, "addend");
  if (count < 1) throw ContractError("accumulate needs at least one addend");
  Builder b;
  ResultLocation res;
  res.bits = b.emitAccumulate(addendWidth, count, 0);
  return b.finish(res);
}

Schedule scheduleCompare(int width, std::int64_t threshold, std::int64_t bias) {
  checkWidth(width, 1, kRegisterBits, "comparator");
  checkRepresentable(width, threshold - bias);
  Builder b;
  Fragment f;
  constexpr int kFlag = 3;
  emitComparator(f, Operand::streamed(0, width, 0), comparandFor(width, threshold - bias), kFlag);
  b.packer.place({f});
  ResultLocation res;
  res.neuron = kFlag;
  return b.finish(res);
}

Schedule scheduleRelu(int width, std::int64_t threshold) {
  checkWidth(width, 1, kRegisterBits, "relu");
  checkRepresentable(width, threshold);
  Builder b;
  auto xs = b.alloc.allocateIn(width, 0);
  const ResultLocation res = b.emitActivation(xs, threshold, Activation::Relu);
  Schedule s = b.finish(res);
  s.operands = {xs};
  return s;
}

Schedule scheduleMaxpool(int windowSize) {
  constexpr int kMaxWindow = kNeurons * kNeurons * kRegisterBits;
  if (windowSize < 1 || windowSize > kMaxWindow) {
    throw ScheduleError("maxpool window " + std::to_string(windowSize) + " outside [1, " +
                        std::to_string(kMaxWindow) + "]");
  }
  const auto Z = SourceSelect::zero();
  Fragment f;
  // Each round ORs groups of four values; a round that needs more than one
  // cycle parks its results in registers (neuron i writes register i).
  std::vector<SourceSelect> values;
  std::vector<ExternalTap> taps;
  for (int j = 0; j < windowSize; ++j) taps.push_back({0, j});
  std::size_t cycle = 0;
  bool firstRound = true;
  while (firstRound || values.size() > 1) {
    const std::size_t count = firstRound ? taps.size() : values.size();
    const std::size_t groups = (count + 3) / 4;
    const std::size_t cycles = (groups + kNeurons - 1) / kNeurons;
    std::vector<SourceSelect> next;
    for (std::size_t c = 0; c < cycles; ++c) {
      auto& cyc = f.at(cycle + c);
      for (int n = 0; n < kNeurons; ++n) {
        const std::size_t g = c * kNeurons + static_cast<std::size_t>(n);
        if (g >= groups) break;
        std::array<SourceSelect, 4> src{Z, Z, Z, Z};
        for (std::size_t i = 0; i < 4 && g * 4 + i < count; ++i) {
          const std::size_t v = g * 4 + i;
          if (firstRound) {
            const int ch = n * 4 + static_cast<int>(i);
            cyc.taps[ch] = taps[v];
            src[i] = SourceSelect::external(ch);
          } else {
            src[i] = values[v];
          }
        }
        cyc.compute[n] = makeSlot(1, src);  // [1,1,1,1;1] with a's weight 2 still >= 1
        if (cycles > 1) {
          cyc.writes.push_back(writeOf({n, static_cast<int>(c)}, n));
          next.push_back(SourceSelect::reg(n, static_cast<int>(c)));
        } else {
          next.push_back(SourceSelect::neuron(n));
        }
      }
    }
    cycle += cycles;
    values = std::move(next);
    firstRound = false;
  }
  Builder b;
  b.packer.place({f});
  ResultLocation res;
  res.neuron = values.front().index;
  return b.finish(res);
}

Schedule scheduleActivatedNode(int n, std::int64_t threshold, Activation act) {
  const AdderTree tree = buildAdderTree(n);
  Builder b;
  auto order = rpoSchedule(tree);
  const auto value = b.emitTree(tree, order);
  const ResultLocation res = b.emitActivation(value, threshold, act);
  return b.finish(res, std::move(order));
}

Schedule scheduleActivatedAccumulate(int addendWidth, int count, std::int64_t threshold,
                                     Activation act) {
  checkWidth(addendWidth, 1, kRegisterBits, "addend");
  if (count < 1) throw ContractError("accumulate needs at least one addend");
  Builder b;
  const auto value = b.emitAccumulate(addendWidth, count, 0);
  const ResultLocation res = b.emitActivation(value, threshold, act);
  return b.finish(res);
}

}  // namespace tulip
