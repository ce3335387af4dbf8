// Copyright 2026 The Tulip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "tulip/arch.hpp"
#include "tulip/errors.hpp"
#include "tulip/scheduler.hpp"
#include "tulip/verify.hpp"

using namespace tulip;

namespace {

constexpr int kExitMismatch = 1;
constexpr int kExitUsage = 2;
constexpr std::int64_t kReferenceNodeCycles = 441;  // published count for 288 inputs

std::string formatTaps(const TapRow& row) {
  std::string s;
  for (int c = 0; c < kExternalChannels; ++c) {
    const auto& t = row[static_cast<std::size_t>(c)];
    if (!t.used()) continue;
    s += " E" + std::to_string(c) + "=op" + std::to_string(t.operand) + "[" + std::to_string(t.bit) + "]";
  }
  return s;
}

int runSchedule(int n, const std::string& dumpPath) {
  const Schedule s = scheduleNode(n);
  std::cout << "inputs=" << n << " cycles=" << s.cycleCount << " peak_bits=" << s.peakLiveBits
            << " bound_bits=" << (n >= 2 ? std::to_string(storageBound(n)) : std::string("n/a"));
  if (n == 288) {
    const double delta = 100.0 * (static_cast<double>(s.cycleCount) - kReferenceNodeCycles) / kReferenceNodeCycles;
    std::cout << " reference_cycles=" << kReferenceNodeCycles << " delta=" << std::showpos << std::fixed
              << std::setprecision(1) << delta << "%" << std::noshowpos;
  }
  std::cout << "\n";
  if (!dumpPath.empty()) {
    std::ofstream out(dumpPath);
    if (!out) throw ParseError("cannot write " + dumpPath);
    out << "# inputs=" << n << " cycles=" << s.cycleCount << " peak_bits=" << s.peakLiveBits << "\n";
    out << "# result:";
    for (const auto& b : s.result.bits) out << " R" << b.reg + 1 << "[" << b.bit << "]";
    out << "\n";
    for (std::size_t c = 0; c < s.program.size(); ++c) {
      out << formatInstruction(c, s.program[c]);
      const std::string taps = formatTaps(s.taps[c]);
      if (!taps.empty()) out << " ; in" << taps;
      out << "\n";
    }
  }
  return 0;
}

ArchConfig configFrom(const std::string& path) { return path.empty() ? ArchConfig{} : loadArchConfig(path); }

int runSimulate(const std::string& netPath, const std::string& inputPath, const std::string& configPath,
                const std::string& machine, const std::string& reportPath, bool checkGolden) {
  const Network net = loadNetwork(netPath);
  const Tensor input = loadTensor(inputPath);
  const ArchConfig cfg = configFrom(configPath);
  const SimulationResult r = simulateNetwork(net, input, parseMachine(machine), cfg);
  writeTensor(std::cout, r.output);
  if (!reportPath.empty()) {
    std::ofstream out(reportPath);
    if (!out) throw ParseError("cannot write " + reportPath);
    writeCostCsv(out, r.cost);
  }
  std::cerr << "pe_cycles=" << r.peCycles << " model_cycles=" << r.cost.totalCycles << "\n";
  if (checkGolden) {
    const bool same = goldenEval(net, input) == r.output;
    std::cerr << "golden=" << (same ? "match" : "MISMATCH") << "\n";
    if (!same) return kExitMismatch;
  }
  return 0;
}

int runAnalyze(const std::string& netPath, const std::string& machine, const std::string& configPath,
               bool compare) {
  const Network net = loadNetwork(netPath);
  const ArchConfig cfg = configFrom(configPath);
  if (!compare) {
    writeCostCsv(std::cout, analyzeNetwork(net, parseMachine(machine), cfg));
    return 0;
  }
  const CostReport y = analyzeNetwork(net, Machine::Yodann, cfg);
  const CostReport t = analyzeNetwork(net, Machine::Tulip, cfg);
  std::cout << "layer,yodann_P,yodann_Z,yodann_PxZ,tulip_P,tulip_Z,tulip_PxZ,PxZ_ratio,yodann_cycles,tulip_cycles\n";
  for (std::size_t i = 0; i < y.perLayer.size(); ++i) {
    const auto& a = y.perLayer[i];
    const auto& b = t.perLayer[i];
    std::ostringstream ratio;
    ratio << std::fixed << std::setprecision(2) << static_cast<double>(a.PxZ()) / static_cast<double>(b.PxZ());
    std::cout << a.layer << ',' << a.P << ',' << a.Z << ',' << a.PxZ() << ',' << b.P << ',' << b.Z << ',' << b.PxZ()
              << ',' << ratio.str() << ',' << a.cycles << ',' << b.cycles << '\n';
  }
  return 0;
}

int runVerify(const std::string& suite, std::uint64_t seed) {
  const VerifyReport r = runVerifySuite(suite, seed);
  for (const auto& line : r.lines) std::cout << line << "\n";
  std::cout << "suite=" << r.suite << " seed=" << seed << " cases=" << r.cases << " mismatches=" << r.mismatches
            << " result=" << (r.ok() ? "PASS" : "FAIL") << "\n";
  return r.ok() ? 0 : kExitMismatch;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TULIP binary neural network accelerator simulator"};
  app.require_subcommand(1);

  auto* schedule = app.add_subcommand("schedule", "Build the adder-tree microprogram for an n-input node");
  int n = 0;
  std::string dumpPath;
  schedule->add_option("-n,--inputs", n, "Node fan-in")->required()->check(CLI::Range(1, kMaxTreeInputs));
  schedule->add_option("--dump-schedule", dumpPath, "Write the microprogram to this file");

  auto* simulate = app.add_subcommand("simulate", "Run a network on the machine model");
  std::string netPath, inputPath, configPath, reportPath, machine = "tulip";
  bool checkGolden = false;
  simulate->add_option("--network", netPath, "Network description")->required()->check(CLI::ExistingFile);
  simulate->add_option("--input", inputPath, "Input tensor")->required()->check(CLI::ExistingFile);
  simulate->add_option("--config", configPath, "Architecture config")->check(CLI::ExistingFile);
  simulate->add_option("--machine", machine, "tulip or yodann")->check(CLI::IsMember({"tulip", "yodann"}));
  simulate->add_option("--report", reportPath, "Write the per-layer cost CSV here");
  simulate->add_flag("--check-golden", checkGolden, "Compare against the reference evaluator");

  auto* analyze = app.add_subcommand("analyze", "Per-layer fetch counts, ops, cycles and time as CSV");
  bool compare = false;
  analyze->add_option("--network", netPath, "Network description")->required()->check(CLI::ExistingFile);
  analyze->add_option("--machine", machine, "tulip or yodann")->check(CLI::IsMember({"tulip", "yodann"}));
  analyze->add_option("--config", configPath, "Architecture config")->check(CLI::ExistingFile);
  analyze->add_flag("--compare", compare, "Both machines side by side");

  auto* verify = app.add_subcommand("verify", "Run an oracle suite");
  std::string suite;
  std::uint64_t seed = kDefaultSeed;
  verify->add_option("--suite", suite, "Suite name")->required()->check(CLI::IsMember(verifySuites()));
  verify->add_option("--seed", seed, "Seed for randomized cases");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*schedule) return runSchedule(n, dumpPath);
    if (*simulate) return runSimulate(netPath, inputPath, configPath, machine, reportPath, checkGolden);
    if (*analyze) return runAnalyze(netPath, machine, configPath, compare);
    if (*verify) return runVerify(suite, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
