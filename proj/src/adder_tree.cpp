// Copyright 2026 The Tulip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#include "tulip/adder_tree.hpp"

#include <algorithm>
#include <bit>
#include <string>

#include "tulip/errors.hpp"

namespace tulip {

namespace {

int build(AdderTree& tree, int firstLeaf, int leafCount, int n) {
  const int id = static_cast<int>(tree.nodes.size());
  tree.nodes.push_back(AdderNode{});
  if (leafCount == 1) {
    AdderNode& leaf = tree.nodes[static_cast<std::size_t>(id)];
    leaf.id = id;
    for (int i = 3 * firstLeaf; i < std::min(3 * firstLeaf + 3, n); ++i) leaf.leafInputs.push_back(i);
    leaf.outputWidth = leaf.leafInputs.size() == 1 ? 1 : 2;
    return id;
  }
  const int leftCount = static_cast<int>(std::bit_ceil(static_cast<unsigned>(leafCount)) / 2);
  const int l = build(tree, firstLeaf, leftCount, n);
  const int r = build(tree, firstLeaf + leftCount, leafCount - leftCount, n);
  AdderNode& node = tree.nodes[static_cast<std::size_t>(id)];
  node.id = id;
  node.left = l;
  node.right = r;
  node.level = std::max(tree.nodes[static_cast<std::size_t>(l)].level,
                        tree.nodes[static_cast<std::size_t>(r)].level) + 1;
  node.outputWidth = node.level + 2;
  return id;
}

void postOrder(const AdderTree& tree, int id, std::vector<int>& out) {
  const AdderNode& n = tree.node(id);
  if (!n.isLeaf()) {
    postOrder(tree, n.left, out);
    postOrder(tree, n.right, out);
  }
  out.push_back(id);
}

}  // namespace

int AdderTree::leafCount() const {
  return static_cast<int>(std::count_if(nodes.begin(), nodes.end(),
                                        [](const AdderNode& n) { return n.isLeaf(); }));
}

AdderTree buildAdderTree(int n) {
  if (n < 1 || n > kMaxTreeInputs) {
    throw ContractError("adder tree input count " + std::to_string(n) +
                        " outside [1, 1023]; use accumulation for larger fan-in");
  }
  AdderTree tree;
  tree.inputs = n;
  const int leaves = (n + 2) / 3;
  tree.nodes.reserve(static_cast<std::size_t>(2 * leaves));
  tree.root = build(tree, 0, leaves, n);
  return tree;
}

std::vector<int> rpoSchedule(const AdderTree& tree) {
  std::vector<int> order;
  if (tree.root < 0) return order;
  order.reserve(tree.nodes.size());
  postOrder(tree, tree.root, order);
  return order;
}

int storageBound(int n) {
  if (n < 2) throw ContractError("storageBound needs n >= 2");
  const int l = std::bit_width(static_cast<unsigned>(n)) - 1;
  return (l * l + l) / 2 + 1;
}

int storageRecurrence(int level) {
  if (level < 0) throw ContractError("negative tree level");
  int m = 2;
  for (int i = 1; i <= level; ++i) m += i + 1;
  return m;
}

}  // namespace tulip
