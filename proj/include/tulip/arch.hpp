// Copyright 2026 The Tulip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "tulip/network.hpp"

namespace tulip {

enum class Machine { Yodann, Tulip };

std::string machineName(Machine m);
/// Accepts "yodann" and "tulip"; throws ParseError otherwise.
Machine parseMachine(const std::string& name);

struct ArchConfig {
  int numProcessingUnits = 32;
  int pesPerUnit = 8;
  int ifmCapacity = 32;          // input channels held on chip
  int ofmBatchInteger = 32;
  int ofmBatchBinary = 256;      // numProcessingUnits * pesPerUnit
  double clockPeriodNs = 2.3;
  int macProductsPerCycle = 17;
};

/// Throws ContractError on non-positive fields or when ofmBatchBinary is not
/// numProcessingUnits * pesPerUnit.
void validate(const ArchConfig& cfg);
/// Same unit count scaled by `factor`, keeping the batch invariant.
ArchConfig scaleUnits(const ArchConfig& cfg, int factor);

/// `key = value` lines with the field names above; `#` starts a comment.
ArchConfig parseArchConfig(std::istream& in);
ArchConfig loadArchConfig(const std::filesystem::path& file);

struct FetchCounts {
  std::int64_t P = 0;  // partial-product passes over the input channels
  std::int64_t Z = 0;  // times the inputs are fetched
  std::int64_t PxZ() const { return P * Z; }
};

/// True when `layer` runs on the MAC units of `m` rather than on the PEs.
bool runsOnMac(const LayerDescriptor& layer, Machine m);
/// Input channels handled per pass.
int effectiveIfm(const LayerDescriptor& layer, Machine m, const ArchConfig& cfg);
/// Output maps handled per input fetch.
int effectiveOfmBatch(const LayerDescriptor& layer, Machine m, const ArchConfig& cfg);

/// Throws ContractError for maxpool layers.
FetchCounts fetchCounts(const LayerDescriptor& layer, Machine m, const ArchConfig& cfg);

/// 2 * z1 * k^2 * x2 * y2 * z2 multiply-accumulates plus x2 * y2 * z2 compares.
std::int64_t opCount(const LayerDescriptor& layer);

/// Cycles for one output neuron whose `fanIn` products arrive in one pass:
/// the adder-tree schedule on a PE or ceil(fanIn / macProductsPerCycle) on a MAC.
std::int64_t nodeCycles(int fanIn, Machine m, const ArchConfig& cfg);

/// Product counts of the chunks a PE reduces for one output neuron of a
/// binary layer: one chunk per pass, split further above 1023 inputs.
std::vector<int> peChunks(const LayerDescriptor& layer, const ArchConfig& cfg);

/// Z * x2 * y2 * (per-output-neuron cycles): each fetch keeps a batch of
/// output maps busy on parallel units, one output pixel at a time.
std::int64_t layerCycles(const LayerDescriptor& layer, Machine m, const ArchConfig& cfg);

double timeFromCycles(std::int64_t cycles, const ArchConfig& cfg);

struct LayerCost {
  std::string layer;
  Machine machine = Machine::Tulip;
  std::int64_t P = 0;
  std::int64_t Z = 0;
  std::int64_t ops = 0;
  std::int64_t cycles = 0;
  double timeNs = 0;
  std::int64_t l2Loads = 0;  // filled by simulateNetwork
  std::int64_t PxZ() const { return P * Z; }
};

struct CostReport {
  std::vector<LayerCost> perLayer;
  std::int64_t totalOps = 0;
  std::int64_t totalCycles = 0;
  double totalTimeNs = 0;
  void add(const LayerCost& c);
};

/// Cost of every convolution and fully connected layer; maxpool layers are
/// skipped.
CostReport analyzeNetwork(const Network& net, Machine m, const ArchConfig& cfg);

/// `layer,machine,P,Z,PxZ,ops,cycles,time_ns` with one row per layer.
void writeCostCsv(std::ostream& out, const CostReport& report);

/// Two-level image buffer. L2 holds the input channels of the current pass,
/// L1 one k x k window of them. Reads outside L1 throw ContractError.
class ImageBuffer {
 public:
  explicit ImageBuffer(const Tensor& ifm);
  /// Loads channels [first, first + count) of the whole map into L2.
  void loadPass(int first, int count);
  /// Copies the window at (row, col) of size k from L2 into L1; positions
  /// outside the map are padding and stay unloaded.
  void loadWindow(int row, int col, int k);
  std::int64_t read(int channel, int row, int col) const;
  std::int64_t l2Loads() const { return l2Loads_; }
  std::int64_t l1Loads() const { return l1Loads_; }

 private:
  const Tensor& ifm_;
  int passFirst_ = 0;
  int passCount_ = 0;
  int winRow_ = 0;
  int winCol_ = 0;
  int winK_ = 0;
  bool windowValid_ = false;
  std::int64_t l2Loads_ = 0;
  std::int64_t l1Loads_ = 0;
};

struct SimulationResult {
  Tensor output;
  CostReport cost;
  std::int64_t peCycles = 0;  // PE cycles actually executed
};

/// Runs the network on the machine model: binary convolutions (on Tulip)
/// and maxpool go through PE microcode, the rest through the MAC model.
/// Throws ContractError when `input` does not fit the first layer.
SimulationResult simulateNetwork(const Network& net, const Tensor& input, Machine m,
                                 const ArchConfig& cfg);

}  // namespace tulip
