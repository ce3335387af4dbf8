// Copyright 2026 The Tulip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#include "packer.hpp"

#include <algorithm>
#include <bit>
#include <string>

#include "tulip/errors.hpp"

namespace tulip::detail {

Packer::Prepared Packer::prepare(const Fragment& f) {
  Prepared p;
  p.frag = &f;
  const std::size_t len = f.cycles.size();
  p.occupied.assign(len, {});
  std::array<long, kNeurons> first;
  std::array<long, kNeurons> last;
  first.fill(-1);
  last.fill(-1);
  std::array<std::array<long, kRegisterBits>, kRegisters> writtenAt = filled(-1);

  for (std::size_t r = 0; r < len; ++r) {
    const auto& cyc = f.cycles[r];
    for (int n = 0; n < kNeurons; ++n) {
      const auto& slot = cyc.compute[n];
      if (!slot) continue;
      for (const auto& s : slot->src) {
        if (s.kind == SourceSelect::Kind::Neuron) {
          if (first[s.index] < 0 || first[s.index] >= static_cast<long>(r)) {
            throw ContractError("fragment reads a neuron it has not computed");
          }
          last[s.index] = std::max(last[s.index], static_cast<long>(r) - 1);
        } else if (s.kind == SourceSelect::Kind::Register) {
          if (writtenAt[s.index][s.bit] < 0) p.externalReads.push_back({r, s.index, s.bit});
        }
      }
    }
    for (int n = 0; n < kNeurons; ++n) {
      if (!cyc.compute[n]) continue;
      if (first[n] < 0) first[n] = static_cast<long>(r);
      last[n] = std::max(last[n], static_cast<long>(r));
    }
    for (const auto& w : cyc.writes) {
      if (first[w.neuron] < 0) throw ContractError("fragment writes from an idle neuron");
      last[w.neuron] = std::max(last[w.neuron], static_cast<long>(r));
      p.writes.push_back({r, w.reg, w.bit});
      if (writtenAt[w.reg][w.bit] < 0) writtenAt[w.reg][w.bit] = static_cast<long>(r);
    }
  }
  for (int n = 0; n < kNeurons; ++n) {
    if (first[n] < 0) continue;
    for (long r = first[n]; r <= last[n]; ++r) p.occupied[static_cast<std::size_t>(r)][n] = true;
  }
  return p;
}

bool Packer::fits(const Prepared& p, std::size_t start) const {
  const Fragment& f = *p.frag;
  for (std::size_t r = 0; r < f.cycles.size(); ++r) {
    const std::size_t t = start + r;
    if (t >= program_.size()) break;
    for (int n = 0; n < kNeurons; ++n) {
      if (p.occupied[r][n] && busy_[t][n]) return false;
    }
    ExternalWord mask = 0;
    for (int c = 0; c < kExternalChannels; ++c) {
      if (f.cycles[r].taps[c].used()) mask |= ExternalWord{1} << c;
    }
    if (mask & channelBusy_[t]) return false;
    for (const auto& w : f.cycles[r].writes) {
      if (writePort_[t][w.reg]) return false;
    }
  }
  for (const auto& a : p.externalReads) {
    if (static_cast<long>(start + a.cycle) <= lastWrite_[a.reg][a.bit]) return false;
  }
  for (const auto& a : p.writes) {
    const auto t = static_cast<long>(start + a.cycle);
    if (t <= lastWrite_[a.reg][a.bit] || t < lastRead_[a.reg][a.bit]) return false;
  }
  return true;
}

void Packer::grow(std::size_t n) {
  if (program_.size() >= n) return;
  program_.resize(n);
  taps_.resize(n);
  busy_.resize(n, {});
  writePort_.resize(n, {});
  channelBusy_.resize(n, 0);
}

void Packer::commit(const Prepared& p, std::size_t start) {
  const Fragment& f = *p.frag;
  grow(start + f.cycles.size());
  for (std::size_t r = 0; r < f.cycles.size(); ++r) {
    const std::size_t t = start + r;
    const auto& cyc = f.cycles[r];
    for (int n = 0; n < kNeurons; ++n) {
      if (p.occupied[r][n]) busy_[t][n] = true;
      if (cyc.compute[n]) program_[t].neurons[n] = *cyc.compute[n];
    }
    for (const auto& w : cyc.writes) {
      writePort_[t][w.reg] = true;
      program_[t].writes.push_back(w);
    }
    for (int c = 0; c < kExternalChannels; ++c) {
      if (!cyc.taps[c].used()) continue;
      taps_[t][c] = cyc.taps[c];
      channelBusy_[t] |= ExternalWord{1} << c;
    }
    for (const auto& slot : cyc.compute) {
      if (!slot) continue;
      for (const auto& s : slot->src) {
        if (s.kind == SourceSelect::Kind::Register) {
          lastRead_[s.index][s.bit] = std::max(lastRead_[s.index][s.bit], static_cast<long>(t));
        }
      }
    }
    for (const auto& w : cyc.writes) {
      lastWrite_[w.reg][w.bit] = std::max(lastWrite_[w.reg][w.bit], static_cast<long>(t));
    }
  }
  minStart_ = start;
}

std::size_t Packer::place(const std::vector<Fragment>& candidates) {
  if (candidates.empty()) throw ContractError("no fragment candidates");
  std::vector<Prepared> prepared;
  prepared.reserve(candidates.size());
  for (const auto& c : candidates) prepared.push_back(prepare(c));
  for (std::size_t s = minStart_;; ++s) {
    for (const auto& p : prepared) {
      if (fits(p, s)) {
        commit(p, s);
        return s;
      }
    }
  }
}

std::vector<MicroInstruction> Packer::takeProgram() {
  for (auto& mi : program_) mi.sharedBC = bcShared(mi);
  return std::move(program_);
}

int RegisterAllocator::freeIn(int reg) const {
  return kRegisterBits - std::popcount(used_[static_cast<std::size_t>(reg)]);
}

int RegisterAllocator::used() const {
  int n = 0;
  for (auto u : used_) n += std::popcount(u);
  return n;
}

std::vector<BitLocation> RegisterAllocator::allocateIn(int width, int reg) {
  if (freeIn(reg) < width) {
    throw ScheduleError("register R" + std::to_string(reg + 1) + " has no room for " +
                        std::to_string(width) + " bits");
  }
  std::vector<BitLocation> bits;
  for (int b = 0; b < kRegisterBits && static_cast<int>(bits.size()) < width; ++b) {
    if (!((used_[reg] >> b) & 1U)) {
      used_[reg] |= static_cast<std::uint16_t>(1U << b);
      bits.push_back({reg, b});
    }
  }
  peak_ = std::max(peak_, used());
  return bits;
}

std::vector<BitLocation> RegisterAllocator::allocate(int width, int preferred) {
  if (width <= 0) return {};
  if (kPeStorageBits - used() < width) {
    throw ScheduleError("schedule infeasible: needs more than " + std::to_string(kPeStorageBits) +
                        " bits of local storage");
  }
  if (freeIn(preferred) >= width) return allocateIn(width, preferred);
  std::array<int, kRegisters> order{0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return freeIn(a) > freeIn(b); });
  if (freeIn(order[0]) >= width) return allocateIn(width, order[0]);
  std::vector<BitLocation> bits;
  for (int reg : order) {
    const int take = std::min(width - static_cast<int>(bits.size()), freeIn(reg));
    auto part = allocateIn(take, reg);
    bits.insert(bits.end(), part.begin(), part.end());
    if (static_cast<int>(bits.size()) == width) break;
  }
  return bits;
}

void RegisterAllocator::release(const std::vector<BitLocation>& bits) {
  for (const auto& b : bits) used_[b.reg] &= static_cast<std::uint16_t>(~(1U << b.bit));
}

}  // namespace tulip::detail
