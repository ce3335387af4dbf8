// Copyright 2026 The Tulip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace tulip {

/// A Boolean threshold function [w_1, ..., w_n; T]: true iff sum(w_i * x_i) >= T.
struct ThresholdFunction {
  std::vector<std::int64_t> weights;
  std::int64_t threshold = 0;

  ThresholdFunction() = default;
  /// Throws ContractError when `weights` is empty.
  ThresholdFunction(std::vector<std::int64_t> w, std::int64_t t);

  std::size_t arity() const { return weights.size(); }
};

bool evalThreshold(const ThresholdFunction& tf, const std::vector<bool>& inputs);

/// Same as evalThreshold with input i taken from bit i of `bits` (arity <= 64).
bool evalThresholdBits(const ThresholdFunction& tf, std::uint64_t bits);

inline constexpr std::size_t kMaxTruthTableArity = 20;

/// Entry k is the function value on the binary expansion of k (input i = bit i).
std::vector<bool> truthTable(const ThresholdFunction& tf);

/// Fixed input weights of the hardware neuron for inputs (a, b, c, d).
inline constexpr std::array<int, 4> kNeuronWeights{2, 1, 1, 1};
inline constexpr int kMinNeuronThreshold = 0;
inline constexpr int kMaxNeuronThreshold = 6;

/// Run-time configuration of one hardware neuron. Complementing an input of
/// weight w is equivalent to a weight of -w with the threshold lowered by w.
struct NeuronConfig {
  int threshold = kMaxNeuronThreshold;
  std::array<bool, 4> complement{};
  bool enabled = false;

  friend bool operator==(const NeuronConfig&, const NeuronConfig&) = default;
};

/// Throws ContractError when the threshold is outside [0, 6].
void validate(const NeuronConfig& cfg);

/// One clock edge of a neuron. A disabled (clock-gated) neuron holds `prevOutput`.
bool evalNeuron(const NeuronConfig& cfg, bool a, bool b, bool c, bool d, bool prevOutput);

}  // namespace tulip
