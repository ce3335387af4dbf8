// Copyright 2026 The Tulip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

// Internal: cycle packing of schedule fragments onto one PE.

#pragma once

#include <array>
#include <optional>
#include <vector>

#include "tulip/pe.hpp"
#include "tulip/scheduler.hpp"

namespace tulip::detail {

struct FragmentCycle {
  std::array<std::optional<NeuronSlot>, kNeurons> compute{};
  std::vector<RegisterWrite> writes;
  TapRow taps{};
};

/// A self-contained piece of microcode (one adder, one leaf, one comparison).
/// Fragments pass no values to one another through neuron outputs, only
/// through register bits.
struct Fragment {
  std::vector<FragmentCycle> cycles;

  FragmentCycle& at(std::size_t r) {
    if (cycles.size() <= r) cycles.resize(r + 1);
    return cycles[r];
  }
};

/// Appends fragments to a program, each at the earliest start cycle (not
/// before the previous fragment's start) where neurons, register write ports,
/// external channels and register-bit dependencies allow it.
class Packer {
 public:
  /// Places the first candidate that fits earliest; returns its start cycle.
  std::size_t place(const std::vector<Fragment>& candidates);

  std::size_t length() const { return program_.size(); }
  std::vector<MicroInstruction> takeProgram();
  std::vector<TapRow> takeTaps() { return std::move(taps_); }

 private:
  struct Prepared {
    const Fragment* frag = nullptr;
    // Per relative cycle: neurons that must not be touched by other fragments.
    std::vector<std::array<bool, kNeurons>> occupied;
    struct Access {
      std::size_t cycle;
      int reg;
      int bit;
    };
    std::vector<Access> externalReads;  // reads of bits not written earlier in the fragment
    std::vector<Access> writes;
  };

  static Prepared prepare(const Fragment& f);
  bool fits(const Prepared& p, std::size_t start) const;
  void commit(const Prepared& p, std::size_t start);
  void grow(std::size_t n);

  std::vector<MicroInstruction> program_;
  std::vector<TapRow> taps_;
  std::vector<std::array<bool, kNeurons>> busy_;
  std::vector<std::array<bool, kRegisters>> writePort_;
  std::vector<ExternalWord> channelBusy_;
  std::array<std::array<long, kRegisterBits>, kRegisters> lastWrite_ = filled(-1);
  std::array<std::array<long, kRegisterBits>, kRegisters> lastRead_ = filled(-1);
  std::size_t minStart_ = 0;

  static std::array<std::array<long, kRegisterBits>, kRegisters> filled(long v) {
    std::array<std::array<long, kRegisterBits>, kRegisters> a{};
    for (auto& row : a) row.fill(v);
    return a;
  }
};

/// Tracks free bits of the four local registers.
class RegisterAllocator {
 public:
  /// Lowest free bits, all in one register when possible: `preferred` first,
  /// then the register with the most free bits. Splits across registers only
  /// when no single register has room. Throws ScheduleError when full.
  std::vector<BitLocation> allocate(int width, int preferred);
  /// Allocates exactly in register `reg`; throws ScheduleError if it lacks room.
  std::vector<BitLocation> allocateIn(int width, int reg);
  void release(const std::vector<BitLocation>& bits);
  int used() const;
  int peakUsed() const { return peak_; }

 private:
  int freeIn(int reg) const;
  std::array<std::uint16_t, kRegisters> used_{};
  int peak_ = 0;
};

}  // namespace tulip::detail
