// Copyright 2026 The Tulip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#include "tulip/arch.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <tuple>

#include "tulip/errors.hpp"
#include "tulip/scheduler.hpp"

namespace tulip {

std::string machineName(Machine m) { return m == Machine::Yodann ? "yodann" : "tulip"; }

Machine parseMachine(const std::string& name) {
  if (name == "yodann") return Machine::Yodann;
  if (name == "tulip") return Machine::Tulip;
  throw ParseError("unknown machine '" + name + "' (expected yodann or tulip)");
}

void validate(const ArchConfig& cfg) {
  if (cfg.numProcessingUnits <= 0 || cfg.pesPerUnit <= 0 || cfg.ifmCapacity <= 0 ||
      cfg.ofmBatchInteger <= 0 || cfg.ofmBatchBinary <= 0 || cfg.macProductsPerCycle <= 0 ||
      !(cfg.clockPeriodNs > 0)) {
    throw ContractError("architecture parameters must be positive");
  }
  if (cfg.ofmBatchBinary != cfg.numProcessingUnits * cfg.pesPerUnit) {
    throw ContractError("ofm_batch_binary must equal num_processing_units * pes_per_unit");
  }
}

ArchConfig scaleUnits(const ArchConfig& cfg, int factor) {
  ArchConfig c = cfg;
  c.numProcessingUnits *= factor;
  c.ofmBatchBinary = c.numProcessingUnits * c.pesPerUnit;
  return c;
}

ArchConfig parseArchConfig(std::istream& in) {
  ArchConfig cfg;
  const std::map<std::string, int*> ints{
      {"num_processing_units", &cfg.numProcessingUnits}, {"pes_per_unit", &cfg.pesPerUnit},
      {"ifm_capacity", &cfg.ifmCapacity},                {"ofm_batch_integer", &cfg.ofmBatchInteger},
      {"ofm_batch_binary", &cfg.ofmBatchBinary},         {"mac_products_per_cycle", &cfg.macProductsPerCycle}};
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    std::istringstream whole(line);
    std::string probe;
    if (!(whole >> probe)) continue;
    const auto where = "line " + std::to_string(lineNo) + ": ";
    if (eq == std::string::npos) throw ParseError(where + "expected key = value");
    std::string key, value, extra;
    std::istringstream(line.substr(0, eq)) >> key;
    std::istringstream rhs(line.substr(eq + 1));
    rhs >> value;
    if (key.empty() || value.empty() || (rhs >> extra)) throw ParseError(where + "expected key = value");
    try {
      std::size_t used = 0;
      if (key == "clock_period_ns") {
        cfg.clockPeriodNs = std::stod(value, &used);
      } else if (const auto it = ints.find(key); it != ints.end()) {
        *it->second = std::stoi(value, &used);
      } else {
        throw ParseError(where + "unknown key '" + key + "'");
      }
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::logic_error&) {
      throw ParseError(where + "bad value '" + value + "' for " + key);
    }
  }
  try {
    validate(cfg);
  } catch (const ContractError& e) {
    throw ParseError(e.what());
  }
  return cfg;
}

ArchConfig loadArchConfig(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ParseError("cannot open " + file.string());
  return parseArchConfig(in);
}

bool runsOnMac(const LayerDescriptor& layer, Machine m) {
  if (m == Machine::Yodann) return true;
  return !(layer.op == LayerOp::Conv && layer.precision == Precision::Binary);
}

int effectiveIfm(const LayerDescriptor& layer, Machine m, const ArchConfig& cfg) {
  // small kernels let the MAC units take twice the input maps
  return runsOnMac(layer, m) && layer.k <= 5 ? 2 * cfg.ifmCapacity : cfg.ifmCapacity;
}

int effectiveOfmBatch(const LayerDescriptor& layer, Machine m, const ArchConfig& cfg) {
  return runsOnMac(layer, m) ? cfg.ofmBatchInteger : cfg.ofmBatchBinary;
}

namespace {

std::int64_t ceilDiv(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

void requireCompute(const LayerDescriptor& layer) {
  if (!layer.isCompute()) throw ContractError("layer '" + layer.name + "' is not a convolution");
}

}  // namespace

FetchCounts fetchCounts(const LayerDescriptor& layer, Machine m, const ArchConfig& cfg) {
  requireCompute(layer);
  return {ceilDiv(layer.in.z, effectiveIfm(layer, m, cfg)), ceilDiv(layer.out.z, effectiveOfmBatch(layer, m, cfg))};
}

std::int64_t opCount(const LayerDescriptor& layer) {
  requireCompute(layer);
  const std::int64_t outputs = std::int64_t{layer.out.x} * layer.out.y * layer.out.z;
  return 2 * std::int64_t{layer.in.z} * layer.k * layer.k * outputs + outputs;
}

namespace {

std::mutex cacheMutex;
std::map<int, std::int64_t> treeCycles;
std::map<std::tuple<int, int, int>, std::int64_t> finishCycles;

std::int64_t cachedTree(int n) {
  {
    std::lock_guard lock(cacheMutex);
    if (auto it = treeCycles.find(n); it != treeCycles.end()) return it->second;
  }
  const auto c = static_cast<std::int64_t>(scheduleNode(n).cycleCount);
  std::lock_guard lock(cacheMutex);
  return treeCycles[n] = c;
}

// Adder tree plus activation for a single chunk (count == 1), or the
// accumulation of `count` partial sums plus activation.
std::int64_t cachedFinish(int n, int count, Activation act) {
  const auto key = std::make_tuple(n, count, static_cast<int>(act));
  {
    std::lock_guard lock(cacheMutex);
    if (auto it = finishCycles.find(key); it != finishCycles.end()) return it->second;
  }
  // a mid-range threshold keeps the comparator from folding to a constant
  const std::int64_t theta = (std::int64_t{n} * count + 1) / 2;
  const Schedule s = count == 1 ? scheduleActivatedNode(n, theta, act)
                                : scheduleActivatedAccumulate(std::bit_width(static_cast<unsigned>(n)),
                                                              count, theta, act);
  const auto c = static_cast<std::int64_t>(s.cycleCount);
  std::lock_guard lock(cacheMutex);
  return finishCycles[key] = c;
}

}  // namespace

std::int64_t nodeCycles(int fanIn, Machine m, const ArchConfig& cfg) {
  if (fanIn < 1) throw ContractError("node fan-in must be positive");
  if (m == Machine::Yodann) return ceilDiv(fanIn, cfg.macProductsPerCycle);
  return cachedTree(fanIn);
}

std::vector<int> peChunks(const LayerDescriptor& layer, const ArchConfig& cfg) {
  std::vector<int> chunks;
  const int perPass = cfg.ifmCapacity;
  for (int first = 0; first < layer.in.z; first += perPass) {
    int products = std::min(perPass, layer.in.z - first) * layer.k * layer.k;
    const int pieces = static_cast<int>(ceilDiv(products, kMaxTreeInputs));
    for (int i = 0; i < pieces; ++i) {
      const int take = static_cast<int>(ceilDiv(products, pieces - i));
      chunks.push_back(take);
      products -= take;
    }
  }
  return chunks;
}

std::int64_t layerCycles(const LayerDescriptor& layer, Machine m, const ArchConfig& cfg) {
  requireCompute(layer);
  const FetchCounts fc = fetchCounts(layer, m, cfg);
  const std::int64_t pixels = std::int64_t{layer.out.x} * layer.out.y;
  std::int64_t perPixel = 0;
  if (runsOnMac(layer, m)) {
    const int perPass = effectiveIfm(layer, m, cfg);
    for (int first = 0; first < layer.in.z; first += perPass) {
      const std::int64_t products = std::int64_t{std::min(perPass, layer.in.z - first)} * layer.k * layer.k;
      perPixel += ceilDiv(products, cfg.macProductsPerCycle);
    }
  } else {
    const Activation act = layer.act == LayerActivation::Relu ? Activation::Relu : Activation::Threshold;
    const auto chunks = peChunks(layer, cfg);
    if (chunks.size() == 1) {
      perPixel = cachedFinish(chunks[0], 1, act);
    } else {
      for (int c : chunks) perPixel += cachedTree(c);
      perPixel += cachedFinish(*std::max_element(chunks.begin(), chunks.end()),
                               static_cast<int>(chunks.size()), act);
    }
  }
  return fc.Z * pixels * perPixel;
}

double timeFromCycles(std::int64_t cycles, const ArchConfig& cfg) {
  return static_cast<double>(cycles) * cfg.clockPeriodNs;
}

void CostReport::add(const LayerCost& c) {
  perLayer.push_back(c);
  totalOps += c.ops;
  totalCycles += c.cycles;
  totalTimeNs += c.timeNs;
}

CostReport analyzeNetwork(const Network& net, Machine m, const ArchConfig& cfg) {
  validate(cfg);
  CostReport report;
  for (const auto& l : net.layers) {
    if (!l.isCompute()) continue;
    const FetchCounts fc = fetchCounts(l, m, cfg);
    LayerCost c;
    c.layer = l.name;
    c.machine = m;
    c.P = fc.P;
    c.Z = fc.Z;
    c.ops = opCount(l);
    c.cycles = layerCycles(l, m, cfg);
    c.timeNs = timeFromCycles(c.cycles, cfg);
    report.add(c);
  }
  return report;
}

void writeCostCsv(std::ostream& out, const CostReport& report) {
  out << "layer,machine,P,Z,PxZ,ops,cycles,time_ns\n";
  for (const auto& c : report.perLayer) {
    std::ostringstream t;
    t.setf(std::ios::fixed);
    t.precision(1);
    t << c.timeNs;
    out << c.layer << ',' << machineName(c.machine) << ',' << c.P << ',' << c.Z << ',' << c.PxZ() << ','
        << c.ops << ',' << c.cycles << ',' << t.str() << '\n';
  }
}

ImageBuffer::ImageBuffer(const Tensor& ifm) : ifm_(ifm) {}

void ImageBuffer::loadPass(int first, int count) {
  if (first < 0 || count < 1 || first + count > ifm_.dims.z) throw ContractError("pass outside the IFM");
  passFirst_ = first;
  passCount_ = count;
  windowValid_ = false;
  l2Loads_ += std::int64_t{ifm_.dims.x} * ifm_.dims.y * count;
}

void ImageBuffer::loadWindow(int row, int col, int k) {
  if (passCount_ == 0) throw ContractError("window load before any pass was loaded into L2");
  winRow_ = row;
  winCol_ = col;
  winK_ = k;
  windowValid_ = true;
  const int rows = std::max(0, std::min(row + k, ifm_.dims.y) - std::max(row, 0));
  const int cols = std::max(0, std::min(col + k, ifm_.dims.x) - std::max(col, 0));
  l1Loads_ += std::int64_t{rows} * cols * passCount_;
}

std::int64_t ImageBuffer::read(int channel, int row, int col) const {
  const bool inL1 = windowValid_ && channel >= passFirst_ && channel < passFirst_ + passCount_ &&
                    row >= winRow_ && row < winRow_ + winK_ && col >= winCol_ && col < winCol_ + winK_ &&
                    row >= 0 && row < ifm_.dims.y && col >= 0 && col < ifm_.dims.x;
  if (!inL1) {
    throw ContractError("phantom read of channel " + std::to_string(channel) + " at (" + std::to_string(row) +
                        ", " + std::to_string(col) + ")");
  }
  return ifm_.at(channel, row, col);
}

}  // namespace tulip
