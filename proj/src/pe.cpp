// Copyright 2026 The Tulip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#include "tulip/pe.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

#include "tulip/errors.hpp"

namespace tulip {

namespace {

void validateSource(const SourceSelect& s) {
  switch (s.kind) {
    case SourceSelect::Kind::Zero:
    case SourceSelect::Kind::One:
      return;
    case SourceSelect::Kind::Neuron:
      if (s.index >= kNeurons) throw ContractError("neuron source index out of range");
      return;
    case SourceSelect::Kind::Register:
      if (s.index >= kRegisters) throw ContractError("register source index out of range");
      if (s.bit >= kRegisterBits) throw ContractError("register source bit out of range");
      return;
    case SourceSelect::Kind::External:
      if (s.index >= kExternalChannels) throw ContractError("external channel out of range");
      return;
  }
  throw ContractError("unknown source kind");
}

bool resolve(const SourceSelect& s, const PeState& st, ExternalWord ext) {
  switch (s.kind) {
    case SourceSelect::Kind::Zero:
      return false;
    case SourceSelect::Kind::One:
      return true;
    case SourceSelect::Kind::Neuron:
      return st.neuronOut[s.index];
    case SourceSelect::Kind::Register:
      return st.registerBit(s.index, s.bit);
    case SourceSelect::Kind::External:
      return (ext >> s.index) & 1U;
  }
  return false;
}

}  // namespace

bool bcShared(const MicroInstruction& mi) {
  const NeuronSlot* first = nullptr;
  for (const auto& slot : mi.neurons) {
    if (!slot.cfg.enabled) continue;
    if (first == nullptr) {
      first = &slot;
    } else if (slot.src[1] != first->src[1] || slot.src[2] != first->src[2]) {
      return false;
    }
  }
  return true;
}

void validate(const MicroInstruction& mi) {
  for (const auto& slot : mi.neurons) {
    validate(slot.cfg);
    for (const auto& s : slot.src) validateSource(s);
  }
  std::array<bool, kRegisters> written{};
  for (const auto& w : mi.writes) {
    if (w.reg >= kRegisters || w.bit >= kRegisterBits || w.neuron >= kNeurons) {
      throw ContractError("register write index out of range");
    }
    if (written[w.reg]) {
      throw ContractError("two writes to R" + std::to_string(w.reg + 1) + " in one cycle");
    }
    written[w.reg] = true;
  }
  if (mi.sharedBC && !bcShared(mi)) {
    throw ContractError("sharedBC set but enabled neurons use different b/c sources");
  }
}

namespace detail {

PeState executeCycleInOrder(const PeState& state, const MicroInstruction& mi,
                            ExternalWord external, const std::array<int, kNeurons>& order) {
  validate(mi);
  PeState next = state;
  for (int n : order) {
    const auto& slot = mi.neurons.at(static_cast<std::size_t>(n));
    next.neuronOut[n] = evalNeuron(slot.cfg, resolve(slot.src[0], state, external),
                                   resolve(slot.src[1], state, external),
                                   resolve(slot.src[2], state, external),
                                   resolve(slot.src[3], state, external), state.neuronOut[n]);
  }
  for (const auto& w : mi.writes) {
    const auto mask = static_cast<std::uint16_t>(1U << w.bit);
    if (next.neuronOut[w.neuron]) {
      next.registers[w.reg] |= mask;
    } else {
      next.registers[w.reg] &= static_cast<std::uint16_t>(~mask);
    }
  }
  ++next.cycleCount;
  return next;
}

}  // namespace detail

PeState executeCycle(const PeState& state, const MicroInstruction& mi, ExternalWord external) {
  return detail::executeCycleInOrder(state, mi, external, {0, 1, 2, 3});
}

PeState runProgram(const PeState& initial, std::span<const MicroInstruction> program,
                   std::span<const ExternalWord> externalTrace) {
  if (externalTrace.size() != program.size()) {
    throw ContractError("external trace has " + std::to_string(externalTrace.size()) +
                        " entries for a " + std::to_string(program.size()) +
                        "-cycle program");
  }
  PeState st = initial;
  for (std::size_t i = 0; i < program.size(); ++i) st = executeCycle(st, program[i], externalTrace[i]);
  return st;
}

PeState runProgram(const PeState& initial, std::span<const MicroInstruction> program) {
  const std::vector<ExternalWord> zeros(program.size(), 0);
  return runProgram(initial, program, zeros);
}

int measurePeakLiveBits(std::span<const MicroInstruction> program) {
  // For every bit: the cycle of its most recent write (-1 = preloaded) and the
  // last cycle that reads that value. A value is live at boundary t (after
  // cycle t) when written at or before t and read after t.
  const auto cycles = static_cast<long>(program.size());
  std::vector<int> delta(program.size() + 2, 0);  // difference array over boundaries -1..n-1
  auto addInterval = [&](long from, long to) {   // boundaries [from, to)
    if (to <= from) return;
    delta[static_cast<std::size_t>(from + 1)] += 1;
    delta[static_cast<std::size_t>(to + 1)] -= 1;
  };
  for (int r = 0; r < kRegisters; ++r) {
    for (int b = 0; b < kRegisterBits; ++b) {
      long written = -1;
      long lastRead = -2;
      for (long t = 0; t < cycles; ++t) {
        const auto& mi = program[static_cast<std::size_t>(t)];
        bool reads = false;
        for (const auto& slot : mi.neurons) {
          if (!slot.cfg.enabled) continue;
          for (const auto& s : slot.src) {
            if (s.kind == SourceSelect::Kind::Register && s.index == r && s.bit == b) reads = true;
          }
        }
        if (reads) lastRead = t;
        bool writes = std::any_of(mi.writes.begin(), mi.writes.end(),
                                  [&](const RegisterWrite& w) { return w.reg == r && w.bit == b; });
        if (writes) {
          if (lastRead > written) addInterval(written, lastRead);
          written = t;
          lastRead = -2;
        }
      }
      if (lastRead > written) addInterval(written, lastRead);
    }
  }
  int peak = 0;
  int live = 0;
  for (int d : delta) {
    live += d;
    peak = std::max(peak, live);
  }
  return peak;
}

std::string formatSource(const SourceSelect& s) {
  switch (s.kind) {
    case SourceSelect::Kind::Zero:
      return "0";
    case SourceSelect::Kind::One:
      return "1";
    case SourceSelect::Kind::Neuron:
      return "N" + std::to_string(s.index + 1);
    case SourceSelect::Kind::Register:
      return "R" + std::to_string(s.index + 1) + "[" + std::to_string(s.bit) + "]";
    case SourceSelect::Kind::External:
      return "E" + std::to_string(s.index);
  }
  return "?";
}

std::string formatInstruction(std::size_t cycle, const MicroInstruction& mi) {
  std::ostringstream os;
  os << "cyc=" << cycle;
  for (int n = 0; n < kNeurons; ++n) {
    const auto& slot = mi.neurons[n];
    if (!slot.cfg.enabled) continue;
    os << " N" << n + 1 << ": T=" << slot.cfg.threshold << " cmp=";
    for (bool c : slot.cfg.complement) os << (c ? '1' : '0');
    os << " a=" << formatSource(slot.src[0]) << " b=" << formatSource(slot.src[1])
       << " c=" << formatSource(slot.src[2]) << " d=" << formatSource(slot.src[3]);
  }
  os << " ;";
  for (const auto& w : mi.writes) {
    os << " wr R" << w.reg + 1 << "[" << static_cast<int>(w.bit) << "]<-N" << w.neuron + 1;
  }
  return os.str();
}

void dumpProgram(std::ostream& os, std::span<const MicroInstruction> program) {
  for (std::size_t i = 0; i < program.size(); ++i) os << formatInstruction(i, program[i]) << '\n';
}

}  // namespace tulip
