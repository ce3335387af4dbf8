// Copyright 2026 The Tulip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

namespace tulip {

inline constexpr int kMaxTreeInputs = 1023;

struct AdderNode {
  int id = 0;
  int level = 0;                    // leaves are level 0
  int left = -1;                    // child ids, -1 for leaves
  int right = -1;
  std::vector<int> leafInputs;      // input indices, leaves only (1..3)
  int outputWidth = 0;

  bool isLeaf() const { return left < 0; }
};

/// Binary adder tree over 3-input leaves. Leaf j sums inputs 3j..3j+2; the
/// last leaf may take 1 or 2 inputs. A full power-of-two subtree always sits
/// on the left, so right subtrees are never deeper than their left siblings.
struct AdderTree {
  int inputs = 0;
  int root = -1;
  std::vector<AdderNode> nodes;     // nodes[i].id == i

  const AdderNode& node(int id) const { return nodes.at(static_cast<std::size_t>(id)); }
  int leafCount() const;
};

/// Throws ContractError unless 1 <= n <= 1023.
AdderTree buildAdderTree(int n);

/// Post-order over the tree: left subtree, right subtree, node.
std::vector<int> rpoSchedule(const AdderTree& tree);

/// (L^2 + L) / 2 + 1 bits with L = floor(log2(n)); n >= 2.
int storageBound(int n);

/// m_0 = 2, m_i = i + 1 + m_{i-1}.
int storageRecurrence(int level);

}  // namespace tulip
