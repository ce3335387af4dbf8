// Copyright 2026 The Tulip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

// Writes a seeded toy network and its input tensor for the CLI tests.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "tulip/network.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_toy <dir>\n";
    return 2;
  }
  const std::filesystem::path dir = argv[1];
  std::filesystem::create_directories(dir);
  const auto g = tulip::generateRandomNetwork(11, 3);
  tulip::saveNetwork(g.net, dir / "toy.net");
  std::ofstream in(dir / "toy.tensor");
  tulip::writeTensor(in, g.input);
  return 0;
}
