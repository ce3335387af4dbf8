// Copyright 2026 The Tulip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#include "tulip/neuron.hpp"

#include <string>

#include "tulip/errors.hpp"

namespace tulip {

ThresholdFunction::ThresholdFunction(std::vector<std::int64_t> w, std::int64_t t)
    : weights(std::move(w)), threshold(t) {
  if (weights.empty()) throw ContractError("threshold function needs at least one input");
}

bool evalThreshold(const ThresholdFunction& tf, const std::vector<bool>& inputs) {
  if (tf.weights.empty()) throw ContractError("threshold function has no inputs");
  if (inputs.size() != tf.weights.size()) {
    throw ContractError("evalThreshold: expected " + std::to_string(tf.weights.size()) +
                        " inputs, got " + std::to_string(inputs.size()));
  }
  std::int64_t sum = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i]) sum += tf.weights[i];
  }
  return sum >= tf.threshold;
}

bool evalThresholdBits(const ThresholdFunction& tf, std::uint64_t bits) {
  if (tf.weights.empty() || tf.weights.size() > 64) {
    throw ContractError("evalThresholdBits: arity must be in [1, 64]");
  }
  std::int64_t sum = 0;
  for (std::size_t i = 0; i < tf.weights.size(); ++i) {
    if ((bits >> i) & 1U) sum += tf.weights[i];
  }
  return sum >= tf.threshold;
}

std::vector<bool> truthTable(const ThresholdFunction& tf) {
  const std::size_t n = tf.arity();
  if (n == 0) throw ContractError("threshold function has no inputs");
  if (n > kMaxTruthTableArity) {
    throw ContractError("truthTable: arity " + std::to_string(n) + " exceeds " +
                        std::to_string(kMaxTruthTableArity));
  }
  std::vector<bool> table(std::size_t{1} << n);
  for (std::uint64_t k = 0; k < table.size(); ++k) table[k] = evalThresholdBits(tf, k);
  return table;
}

void validate(const NeuronConfig& cfg) {
  if (cfg.threshold < kMinNeuronThreshold || cfg.threshold > kMaxNeuronThreshold) {
    throw ContractError("neuron threshold " + std::to_string(cfg.threshold) +
                        " outside [0, 6]");
  }
}

bool evalNeuron(const NeuronConfig& cfg, bool a, bool b, bool c, bool d, bool prevOutput) {
  if (!cfg.enabled) return prevOutput;
  const std::array<bool, 4> in{a != cfg.complement[0], b != cfg.complement[1],
                               c != cfg.complement[2], d != cfg.complement[3]};
  int sum = 0;
  for (int i = 0; i < 4; ++i) {
    if (in[i]) sum += kNeuronWeights[i];
  }
  return sum >= cfg.threshold;
}

}  // namespace tulip
