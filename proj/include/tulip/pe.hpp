// Copyright 2026 The Tulip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tulip/neuron.hpp"

namespace tulip {

inline constexpr int kNeurons = 4;
inline constexpr int kRegisters = 4;
inline constexpr int kRegisterBits = 16;
inline constexpr int kPeStorageBits = kRegisters * kRegisterBits;
/// Width of the PE's external input port. Bit i of an ExternalWord is channel i.
inline constexpr int kExternalChannels = 16;

using ExternalWord = std::uint32_t;

/// Mux selection for one neuron input. Indices are 0-based; the text dump
/// prints neurons and registers 1-based (N1..N4, R1..R4).
struct SourceSelect {
  enum class Kind : std::uint8_t { Zero, One, Neuron, Register, External };

  Kind kind = Kind::Zero;
  std::uint8_t index = 0;
  std::uint8_t bit = 0;

  static constexpr SourceSelect zero() { return {}; }
  static constexpr SourceSelect one() { return {Kind::One, 0, 0}; }
  static constexpr SourceSelect neuron(int n) {
    return {Kind::Neuron, static_cast<std::uint8_t>(n), 0};
  }
  static constexpr SourceSelect reg(int r, int bit) {
    return {Kind::Register, static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(bit)};
  }
  static constexpr SourceSelect external(int channel) {
    return {Kind::External, static_cast<std::uint8_t>(channel), 0};
  }
  static constexpr SourceSelect constant(bool v) { return v ? one() : zero(); }

  friend bool operator==(const SourceSelect&, const SourceSelect&) = default;
};

struct NeuronSlot {
  NeuronConfig cfg;
  std::array<SourceSelect, 4> src{};  // a, b, c, d

  friend bool operator==(const NeuronSlot&, const NeuronSlot&) = default;
};

/// Stores the post-cycle output of `neuron` into register bit `reg[bit]`.
struct RegisterWrite {
  std::uint8_t reg = 0;
  std::uint8_t bit = 0;
  std::uint8_t neuron = 0;

  friend bool operator==(const RegisterWrite&, const RegisterWrite&) = default;
};

/// Configuration of the whole PE for one clock cycle.
struct MicroInstruction {
  std::array<NeuronSlot, kNeurons> neurons{};
  std::vector<RegisterWrite> writes;
  /// Asserted when every enabled neuron takes the same b and c sources.
  bool sharedBC = false;

  friend bool operator==(const MicroInstruction&, const MicroInstruction&) = default;
};

struct PeState {
  std::array<bool, kNeurons> neuronOut{};
  std::array<std::uint16_t, kRegisters> registers{};
  std::uint64_t cycleCount = 0;

  bool registerBit(int reg, int bit) const { return (registers[reg] >> bit) & 1U; }

  friend bool operator==(const PeState&, const PeState&) = default;
};

/// Throws ContractError on out-of-range sources, thresholds, or writes, on two
/// writes to one register, or on a sharedBC instruction whose enabled neurons
/// disagree on b/c.
void validate(const MicroInstruction& mi);

/// One clock edge: every input is resolved against `state`, all four neurons
/// update together, then writes commit the new neuron outputs.
PeState executeCycle(const PeState& state, const MicroInstruction& mi, ExternalWord external);

PeState runProgram(const PeState& initial, std::span<const MicroInstruction> program,
                   std::span<const ExternalWord> externalTrace);

/// Program with no external inputs (trace of zeros).
PeState runProgram(const PeState& initial, std::span<const MicroInstruction> program);

/// True when every enabled neuron of `mi` reads the same b and c sources.
bool bcShared(const MicroInstruction& mi);

/// Maximum, over cycle boundaries, of the number of register bits that were
/// written earlier and are still read later in `program` (bits never written by
/// the program are treated as preloaded operands and counted until last read).
int measurePeakLiveBits(std::span<const MicroInstruction> program);

std::string formatSource(const SourceSelect& s);
/// `cyc=<n> N<i>: T=<t> cmp=<abcd> a=<src> b=<src> c=<src> d=<src> ... ; wr R<r>[<bit>]<-N<i> ...`
std::string formatInstruction(std::size_t cycle, const MicroInstruction& mi);
void dumpProgram(std::ostream& os, std::span<const MicroInstruction> program);

namespace detail {
/// executeCycle with an explicit neuron evaluation order; used to check that
/// the order never matters.
PeState executeCycleInOrder(const PeState& state, const MicroInstruction& mi,
                            ExternalWord external, const std::array<int, kNeurons>& order);
}  // namespace detail

}  // namespace tulip
