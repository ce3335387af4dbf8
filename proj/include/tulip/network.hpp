// Copyright 2026 The Tulip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace tulip {

struct Dims {
  int x = 0;
  int y = 0;
  int z = 0;
  std::int64_t size() const { return std::int64_t{x} * y * z; }
  friend bool operator==(const Dims&, const Dims&) = default;
};

std::string formatDims(const Dims& d);

/// Feature map. Binary tensors hold 0/1, where 0 stands for -1.
/// Element (c, row, col) lives at (c * y + row) * x + col.
struct Tensor {
  Dims dims;
  bool binary = true;
  std::vector<std::int64_t> values;

  Tensor() = default;
  Tensor(Dims d, bool bin);
  std::int64_t& at(int c, int row, int col);
  std::int64_t at(int c, int row, int col) const;
  friend bool operator==(const Tensor&, const Tensor&) = default;
};

enum class LayerOp { Conv, FullyConnected, Maxpool };
enum class Precision { Integer, Binary };
enum class LayerActivation { Threshold, Relu };
enum class Padding { Zero, Skip };

struct LayerDescriptor {
  std::string name;
  LayerOp op = LayerOp::Conv;
  /// Integer layers take unsigned integer inputs; binary layers take bits.
  Precision precision = Precision::Binary;
  Dims in;
  Dims out;
  int k = 1;           // kernel or pooling window
  int stride = 1;
  int pad = 0;
  LayerActivation act = LayerActivation::Threshold;
  /// One entry per weight, 1 for +1 and 0 for -1, ordered z2, z1, k, k.
  /// Empty when the network was described for cost analysis only.
  std::vector<std::uint8_t> weights;
  std::vector<std::int32_t> thresholds;  // per OFM, signed domain; empty means 0
  std::vector<std::int32_t> biases;      // per OFM; empty means 0

  bool isCompute() const { return op != LayerOp::Maxpool; }
  /// Products per output neuron: z1 * k * k.
  std::int64_t fanIn() const;
  std::int64_t weightCount() const;
  std::int64_t threshold(int ofm) const;
  std::int64_t bias(int ofm) const;
  bool hasWeights() const { return !weights.empty(); }
  /// Output of this layer is binary unless it is a binary layer with RELU.
  bool outputsBinary() const;
  std::uint8_t weight(int ofm, int ifm, int kr, int kc) const;
};

struct Network {
  std::vector<LayerDescriptor> layers;
  Padding padding = Padding::Zero;
  Dims inputDims() const;
  Dims outputDims() const;
};

/// Popcount threshold equivalent to (2 * pc - n) + bias >= T over n XNOR
/// products: pc >= ceil((T - bias + n) / 2).
std::int64_t foldThreshold(std::int64_t signedThreshold, std::int64_t bias, std::int64_t n);

/// Reads the line-oriented network format. Relative weight and threshold
/// paths resolve against `baseDir`. Throws ParseError with the line number
/// on malformed input and names both layers on a shape mismatch.
Network parseNetwork(std::istream& in, const std::filesystem::path& baseDir = {});
Network loadNetwork(const std::filesystem::path& file);
/// Writes the network and its binary side files next to `file`.
void saveNetwork(const Network& net, const std::filesystem::path& file);
/// Checks shape chaining and per-layer consistency; throws ParseError.
void validateNetwork(const Network& net);

std::vector<std::uint8_t> readWeightBits(const std::filesystem::path& file, std::int64_t count);
void writeWeightBits(const std::filesystem::path& file, const std::vector<std::uint8_t>& bits);
std::vector<std::int32_t> readInt32s(const std::filesystem::path& file, std::int64_t count);
void writeInt32s(const std::filesystem::path& file, const std::vector<std::int32_t>& values);

/// Text form: a header `tensor <x>x<y>x<z> <bin|int>` then the values in
/// storage order, whitespace separated.
Tensor readTensor(std::istream& in);
Tensor loadTensor(const std::filesystem::path& file);
void writeTensor(std::ostream& out, const Tensor& t);

/// Reference forward pass with plain integer arithmetic.
Tensor goldenEval(const Network& net, const Tensor& input);
/// Output of every layer, in order.
std::vector<Tensor> goldenEvalTrace(const Network& net, const Tensor& input);

struct RandomNetworkLimits {
  int maxSpatial = 16;
  int maxChannels = 16;
  int maxConvLayers = 3;
};

struct GeneratedNetwork {
  Network net;
  Tensor input;
};

/// Reproducible toy network with `depth` layers (0 gives an empty network,
/// whose output is the input). Mixes integer and binary convolutions,
/// maxpool, fully connected layers, and RELU.
GeneratedNetwork generateRandomNetwork(std::uint64_t seed, int depth,
                                       const RandomNetworkLimits& limits = {});

}  // namespace tulip
