// Copyright 2026 The Tulip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "tulip/adder_tree.hpp"
#include "tulip/pe.hpp"

namespace tulip {

struct BitLocation {
  int reg = 0;
  int bit = 0;

  friend bool operator==(const BitLocation&, const BitLocation&) = default;
};

/// Where a schedule leaves its result: register bits (LSB first) or, for
/// single-bit predicates, a neuron output.
struct ResultLocation {
  std::vector<BitLocation> bits;
  int neuron = -1;

  bool inNeuron() const { return neuron >= 0; }
  int width() const { return inNeuron() ? 1 : static_cast<int>(bits.size()); }
};

/// What an external channel must carry in a given cycle: bit `bit` of
/// streamed operand `operand`. For adder-tree nodes operand 0 is the input
/// vector and `bit` is the input index.
struct ExternalTap {
  int operand = -1;
  int bit = -1;

  bool used() const { return operand >= 0; }
  friend bool operator==(const ExternalTap&, const ExternalTap&) = default;
};

using TapRow = std::array<ExternalTap, kExternalChannels>;

struct Schedule {
  std::vector<MicroInstruction> program;
  std::vector<TapRow> taps;                         // one row per cycle
  std::vector<int> rpoOrder;                        // adder-tree schedules only
  std::size_t cycleCount = 0;
  int peakLiveBits = 0;
  ResultLocation result;
  /// Register-resident operands the caller must preload before running.
  std::vector<std::vector<BitLocation>> operands;
};

/// Builds the per-cycle external input words; `bitOf(operand, bit)` supplies
/// the data.
std::vector<ExternalWord> buildTrace(const Schedule& s,
                                     const std::function<bool(int operand, int bit)>& bitOf);

/// Runs `s` on `initial` with the trace from `bitOf`.
PeState run(const Schedule& s, const PeState& initial,
            const std::function<bool(int operand, int bit)>& bitOf);

std::uint64_t readResult(const PeState& st, const ResultLocation& where);
void loadBits(PeState& st, const std::vector<BitLocation>& where, std::uint64_t value);

inline constexpr int kMaxAddOperandWidth = 10;

/// Ripple-carry addition of two register operands, one result bit per cycle.
/// Parity 0: x in R1, y in R4, sum on N2 into R2, carry on N3.
/// Parity 1: x in R2, y in R3, sum on N1 into R1, carry on N4.
/// Throws ScheduleError for operand widths outside [1, 10].
Schedule scheduleAdd(int widthX, int widthY, int parity = 0);

/// Full reverse-post-order microprogram of an n-input adder tree whose inputs
/// arrive as operand 0 on the external channels. Throws ScheduleError when
/// the live intermediates exceed the 64 register bits.
Schedule scheduleNode(const AdderTree& tree);
Schedule scheduleNode(int n);

/// Sums `count` streamed addends (operand j = addend j) into an accumulator
/// that alternates between R2 (even steps) and R4 (odd steps).
Schedule scheduleAccumulate(int addendWidth, int count);

/// Streams x (operand 0, LSB first) against the constant y = T - bias - 1 so
/// the result neuron reads x >= T - bias. Throws ScheduleError unless
/// 0 <= T - bias - 1 < 2^width.
Schedule scheduleCompare(int width, std::int64_t threshold, std::int64_t bias = 0);

/// OR over a pooling window streamed as operand 0. Windows up to 4 bits take
/// one cycle; larger windows are reduced by an OR tree (at most 256 bits).
Schedule scheduleMaxpool(int windowSize);

/// value * [value >= T] for a `width`-bit value preloaded in R1 (operands[0]).
/// The result lands in R4.
Schedule scheduleRelu(int width, std::int64_t threshold);

enum class Activation { Threshold, Relu };

/// Adder tree over n inputs followed by the activation against a popcount
/// threshold. Thresholds outside [1, n] produce a constant predicate.
Schedule scheduleActivatedNode(int n, std::int64_t threshold, Activation act);

/// Accumulation of `count` streamed partial sums followed by the activation.
Schedule scheduleActivatedAccumulate(int addendWidth, int count, std::int64_t threshold,
                                     Activation act);

}  // namespace tulip
