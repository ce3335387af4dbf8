// Copyright 2026 The Tulip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#include "tulip/network.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "tulip/errors.hpp"

namespace tulip {

std::string formatDims(const Dims& d) {
  return std::to_string(d.x) + "x" + std::to_string(d.y) + "x" + std::to_string(d.z);
}

Tensor::Tensor(Dims d, bool bin) : dims(d), binary(bin), values(static_cast<std::size_t>(d.size()), 0) {}

std::int64_t& Tensor::at(int c, int row, int col) {
  return values[(static_cast<std::size_t>(c) * dims.y + row) * dims.x + col];
}

std::int64_t Tensor::at(int c, int row, int col) const {
  return values[(static_cast<std::size_t>(c) * dims.y + row) * dims.x + col];
}

std::int64_t LayerDescriptor::fanIn() const { return std::int64_t{in.z} * k * k; }

std::int64_t LayerDescriptor::weightCount() const {
  return isCompute() ? std::int64_t{out.z} * fanIn() : 0;
}

std::int64_t LayerDescriptor::threshold(int ofm) const {
  return thresholds.empty() ? 0 : thresholds[static_cast<std::size_t>(ofm)];
}

std::int64_t LayerDescriptor::bias(int ofm) const {
  return biases.empty() ? 0 : biases[static_cast<std::size_t>(ofm)];
}

bool LayerDescriptor::outputsBinary() const {
  return !(op != LayerOp::Maxpool && precision == Precision::Binary && act == LayerActivation::Relu);
}

std::uint8_t LayerDescriptor::weight(int ofm, int ifm, int kr, int kc) const {
  return weights[((static_cast<std::size_t>(ofm) * in.z + ifm) * k + kr) * k + kc];
}

Dims Network::inputDims() const { return layers.empty() ? Dims{} : layers.front().in; }
Dims Network::outputDims() const { return layers.empty() ? Dims{} : layers.back().out; }

std::int64_t foldThreshold(std::int64_t signedThreshold, std::int64_t bias, std::int64_t n) {
  const std::int64_t num = signedThreshold - bias + n;
  // ceil(num / 2) for either sign
  return num >= 0 ? (num + 1) / 2 : -((-num) / 2);
}

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ParseError(where + ": " + what);
}

[[noreturn]] void fail(int line, const std::string& what) { fail("line " + std::to_string(line), what); }

int parseInt(int line, const std::string& key, const std::string& text) {
  int v = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || end != text.data() + text.size()) {
    fail(line, key + " expects an integer, got '" + text + "'");
  }
  return v;
}

Dims parseDims(int line, const std::string& key, const std::string& text) {
  std::vector<int> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t x = text.find('x', start);
    parts.push_back(parseInt(line, key, text.substr(start, x - start)));
    if (x == std::string::npos) break;
    start = x + 1;
  }
  if (parts.size() == 1) return {1, 1, parts[0]};
  if (parts.size() != 3) fail(line, key + " expects XxYxZ, got '" + text + "'");
  return {parts[0], parts[1], parts[2]};
}

int convOut(int in, int k, int stride, int pad) { return (in + 2 * pad - k) / stride + 1; }

void checkLayer(const LayerDescriptor& l, const std::string& where) {
  auto bad = [&](const std::string& msg) { fail(where, "layer '" + l.name + "': " + msg); };
  if (l.in.x <= 0 || l.in.y <= 0 || l.in.z <= 0) bad("input dims must be positive");
  if (l.out.x <= 0 || l.out.y <= 0 || l.out.z <= 0) bad("output dims must be positive");
  if (l.k <= 0 || l.stride <= 0 || l.pad < 0) bad("k and stride must be positive, pad non-negative");
  if (l.op == LayerOp::FullyConnected) {
    if (l.in.x != 1 || l.in.y != 1 || l.out.x != 1 || l.out.y != 1 || l.k != 1) {
      bad("fully connected layers are 1x1xN to 1x1xM");
    }
  } else {
    if (l.in.x + 2 * l.pad < l.k || l.in.y + 2 * l.pad < l.k) bad("window larger than input");
    const int ox = convOut(l.in.x, l.k, l.stride, l.pad);
    const int oy = convOut(l.in.y, l.k, l.stride, l.pad);
    if (ox != l.out.x || oy != l.out.y) {
      bad("output " + formatDims(l.out) + " does not match k=" + std::to_string(l.k) +
          " stride=" + std::to_string(l.stride) + " pad=" + std::to_string(l.pad) + " (expected " +
          std::to_string(ox) + "x" + std::to_string(oy) + ")");
    }
  }
  if (l.op == LayerOp::Maxpool) {
    if (l.in.z != l.out.z) bad("maxpool keeps the channel count");
    if (l.pad != 0) bad("maxpool takes no padding");
  }
  if (l.act == LayerActivation::Relu && l.precision != Precision::Binary) {
    bad("act=relu is only supported on binary layers");
  }
  if (l.hasWeights() && static_cast<std::int64_t>(l.weights.size()) != l.weightCount()) {
    bad("expected " + std::to_string(l.weightCount()) + " weights");
  }
  if (!l.thresholds.empty() && static_cast<int>(l.thresholds.size()) != l.out.z) bad("threshold count");
  if (!l.biases.empty() && static_cast<int>(l.biases.size()) != l.out.z) bad("bias count");
}

void checkChain(const LayerDescriptor& prev, const LayerDescriptor& next, const std::string& where) {
  const bool flat = next.op == LayerOp::FullyConnected;
  const bool ok = flat ? prev.out.size() == next.in.z : prev.out == next.in;
  if (!ok) {
    fail(where, "layer '" + next.name + "' input " + formatDims(next.in) + " does not match layer '" +
                   prev.name + "' output " + formatDims(prev.out));
  }
  if (!prev.outputsBinary() && (next.op == LayerOp::Maxpool || next.precision == Precision::Binary)) {
    fail(where, "layer '" + next.name + "' needs binary inputs but layer '" + prev.name +
                   "' produces integers");
  }
}

}  // namespace

void validateNetwork(const Network& net) {
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const std::string where = "layer " + std::to_string(i + 1);
    checkLayer(net.layers[i], where);
    if (i > 0) checkChain(net.layers[i - 1], net.layers[i], where);
  }
}

Network parseNetwork(std::istream& in, const std::filesystem::path& baseDir) {
  Network net;
  std::string text;
  int lineNo = 0;
  int computeCount = 0;
  int poolCount = 0;
  while (std::getline(in, text)) {
    ++lineNo;
    if (const auto hash = text.find('#'); hash != std::string::npos) text.erase(hash);
    std::istringstream words(text);
    std::string op;
    if (!(words >> op)) continue;

    std::map<std::string, std::string> kv;
    std::string word;
    while (words >> word) {
      const auto eq = word.find('=');
      if (eq == std::string::npos || eq == 0) fail(lineNo, "expected key=value, got '" + word + "'");
      if (!kv.emplace(word.substr(0, eq), word.substr(eq + 1)).second) {
        fail(lineNo, "duplicate key '" + word.substr(0, eq) + "'");
      }
    }
    auto take = [&](const std::string& key) -> std::optional<std::string> {
      const auto it = kv.find(key);
      if (it == kv.end()) return std::nullopt;
      std::string v = it->second;
      kv.erase(it);
      return v;
    };
    auto require = [&](const std::string& key) {
      auto v = take(key);
      if (!v) fail(lineNo, op + " needs " + key + "=");
      return *v;
    };

    if (op == "option") {
      if (auto p = take("padding")) {
        if (*p == "zero") {
          net.padding = Padding::Zero;
        } else if (*p == "skip") {
          net.padding = Padding::Skip;
        } else {
          fail(lineNo, "padding must be zero or skip");
        }
      }
      if (!kv.empty()) fail(lineNo, "unknown option '" + kv.begin()->first + "'");
      continue;
    }

    LayerDescriptor l;
    if (op == "conv" || op == "fc") {
      l.op = op == "conv" ? LayerOp::Conv : LayerOp::FullyConnected;
      l.name = take("name").value_or("L" + std::to_string(++computeCount));
      const std::string kind = require("kind");
      if (kind == "int") {
        l.precision = Precision::Integer;
      } else if (kind == "bin") {
        l.precision = Precision::Binary;
      } else {
        fail(lineNo, "kind must be int or bin");
      }
      l.in = parseDims(lineNo, "in", require("in"));
      l.out = parseDims(lineNo, "out", require("out"));
      if (l.op == LayerOp::Conv) {
        l.k = parseInt(lineNo, "k", require("k"));
        l.stride = parseInt(lineNo, "stride", take("stride").value_or("1"));
        l.pad = parseInt(lineNo, "pad", take("pad").value_or("0"));
      } else {
        l.in = {1, 1, static_cast<int>(l.in.size())};
        l.out = {1, 1, static_cast<int>(l.out.size())};
      }
      if (auto a = take("act")) {
        if (*a == "relu") {
          l.act = LayerActivation::Relu;
        } else if (*a != "threshold") {
          fail(lineNo, "act must be relu or threshold");
        }
      }
      checkLayer(l, "line " + std::to_string(lineNo));
      try {
        if (auto p = take("weights")) l.weights = readWeightBits(baseDir / *p, l.weightCount());
        if (auto p = take("thresh")) l.thresholds = readInt32s(baseDir / *p, l.out.z);
        if (auto p = take("bias")) l.biases = readInt32s(baseDir / *p, l.out.z);
      } catch (const ParseError& e) {
        fail(lineNo, e.what());
      }
    } else if (op == "maxpool") {
      l.op = LayerOp::Maxpool;
      l.name = take("name").value_or("pool" + std::to_string(++poolCount));
      l.k = parseInt(lineNo, "win", require("win"));
      l.stride = parseInt(lineNo, "stride", take("stride").value_or(std::to_string(l.k)));
      if (auto d = take("in")) {
        l.in = parseDims(lineNo, "in", *d);
      } else if (!net.layers.empty()) {
        l.in = net.layers.back().out;
      } else {
        fail(lineNo, "a leading maxpool needs in=");
      }
      if (l.k <= 0 || l.stride <= 0) fail(lineNo, "win and stride must be positive");
      l.out = {convOut(l.in.x, l.k, l.stride, 0), convOut(l.in.y, l.k, l.stride, 0), l.in.z};
      if (auto d = take("out"); d && parseDims(lineNo, "out", *d) != l.out) {
        fail(lineNo, "maxpool output should be " + formatDims(l.out));
      }
      checkLayer(l, "line " + std::to_string(lineNo));
    } else {
      fail(lineNo, "unknown layer type '" + op + "'");
    }
    if (!kv.empty()) fail(lineNo, "unknown key '" + kv.begin()->first + "'");
    if (!net.layers.empty()) checkChain(net.layers.back(), l, "line " + std::to_string(lineNo));
    net.layers.push_back(std::move(l));
  }
  if (net.layers.empty()) throw ParseError("network description has no layers");
  return net;
}

Network loadNetwork(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ParseError("cannot open " + file.string());
  return parseNetwork(in, file.parent_path());
}

void saveNetwork(const Network& net, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw ParseError("cannot write " + file.string());
  if (net.padding == Padding::Skip) out << "option padding=skip\n";
  const std::string stem = file.stem().string();
  for (const auto& l : net.layers) {
    if (l.op == LayerOp::Maxpool) {
      out << "maxpool name=" << l.name << " in=" << formatDims(l.in) << " win=" << l.k
          << " stride=" << l.stride << "\n";
      continue;
    }
    out << (l.op == LayerOp::Conv ? "conv" : "fc") << " name=" << l.name
        << " kind=" << (l.precision == Precision::Binary ? "bin" : "int");
    if (l.op == LayerOp::Conv) {
      out << " in=" << formatDims(l.in) << " out=" << formatDims(l.out) << " k=" << l.k
          << " stride=" << l.stride << " pad=" << l.pad;
    } else {
      out << " in=" << l.in.z << " out=" << l.out.z;
    }
    if (l.act == LayerActivation::Relu) out << " act=relu";
    const std::string base = stem + "." + l.name;
    if (l.hasWeights()) {
      writeWeightBits(file.parent_path() / (base + ".w"), l.weights);
      out << " weights=" << base << ".w";
    }
    if (!l.thresholds.empty()) {
      writeInt32s(file.parent_path() / (base + ".t"), l.thresholds);
      out << " thresh=" << base << ".t";
    }
    if (!l.biases.empty()) {
      writeInt32s(file.parent_path() / (base + ".b"), l.biases);
      out << " bias=" << base << ".b";
    }
    out << "\n";
  }
}

std::vector<std::uint8_t> readWeightBits(const std::filesystem::path& file, std::int64_t count) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ParseError("cannot open " + file.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (static_cast<std::int64_t>(bytes.size()) != (count + 7) / 8) {
    throw ParseError(file.string() + ": expected " + std::to_string((count + 7) / 8) + " bytes, found " +
                     std::to_string(bytes.size()));
  }
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(count));
  for (std::size_t i = 0; i < bits.size(); ++i) {
    bits[i] = (static_cast<unsigned char>(bytes[i / 8]) >> (i % 8)) & 1U;
  }
  return bits;
}

void writeWeightBits(const std::filesystem::path& file, const std::vector<std::uint8_t>& bits) {
  std::vector<char> bytes((bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) bytes[i / 8] = static_cast<char>(bytes[i / 8] | (1 << (i % 8)));
  }
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ParseError("cannot write " + file.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::vector<std::int32_t> readInt32s(const std::filesystem::path& file, std::int64_t count) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ParseError("cannot open " + file.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (static_cast<std::int64_t>(bytes.size()) != 4 * count) {
    throw ParseError(file.string() + ": expected " + std::to_string(4 * count) + " bytes, found " +
                     std::to_string(bytes.size()));
  }
  std::vector<std::int32_t> v(static_cast<std::size_t>(count));
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::uint32_t u = bytes[4 * i] | (std::uint32_t{bytes[4 * i + 1]} << 8) |
                            (std::uint32_t{bytes[4 * i + 2]} << 16) | (std::uint32_t{bytes[4 * i + 3]} << 24);
    v[i] = static_cast<std::int32_t>(u);
  }
  return v;
}

void writeInt32s(const std::filesystem::path& file, const std::vector<std::int32_t>& values) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ParseError("cannot write " + file.string());
  for (std::int32_t s : values) {
    const auto u = static_cast<std::uint32_t>(s);
    const char b[4] = {static_cast<char>(u & 0xff), static_cast<char>((u >> 8) & 0xff),
                       static_cast<char>((u >> 16) & 0xff), static_cast<char>((u >> 24) & 0xff)};
    out.write(b, 4);
  }
}

Tensor readTensor(std::istream& in) {
  std::string tag, dims, kind;
  if (!(in >> tag >> dims >> kind) || tag != "tensor") {
    throw ParseError("tensor file must start with 'tensor <x>x<y>x<z> <bin|int>'");
  }
  if (kind != "bin" && kind != "int") throw ParseError("tensor kind must be bin or int");
  const Dims d = parseDims(1, "tensor", dims);
  if (d.x <= 0 || d.y <= 0 || d.z <= 0) throw ParseError("tensor dims must be positive");
  Tensor t(d, kind == "bin");
  for (auto& v : t.values) {
    if (!(in >> v)) throw ParseError("tensor has fewer than " + std::to_string(d.size()) + " values");
    if (v < 0 || (t.binary && v > 1)) throw ParseError("tensor value out of range: " + std::to_string(v));
  }
  std::string extra;
  if (in >> extra) throw ParseError("tensor has more than " + std::to_string(d.size()) + " values");
  return t;
}

Tensor loadTensor(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ParseError("cannot open " + file.string());
  return readTensor(in);
}

void writeTensor(std::ostream& out, const Tensor& t) {
  out << "tensor " << formatDims(t.dims) << (t.binary ? " bin" : " int") << "\n";
  for (int c = 0; c < t.dims.z; ++c) {
    for (int r = 0; r < t.dims.y; ++r) {
      for (int x = 0; x < t.dims.x; ++x) out << (x ? " " : "") << t.at(c, r, x);
      out << "\n";
    }
  }
}

}  // namespace tulip
