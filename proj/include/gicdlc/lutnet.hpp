#pragma once

// Hardened lookup-table networks: each node reads 6 bits from the previous
// layer (or from the binarized input for layer 0) and looks its output up in
// a 64-entry truth table. Network outputs are per-group averages of the last
// layer's bits.
//
// Model file ("GLC1", all integers little-endian):
//
//   "GLC1"  u16 version
//   u8 role  u8 kernel  u8 channels  u8 levels  u32 input_width
//   u32 layer_count  { u32 layer_size } * layer_count
//   u32 group_count  { u32 start  u32 size } * group_count
//   per layer, per node: { u32 input } * 6  u64 truth_table
//   32-byte SHA-256 of every preceding byte (the model's content hash)

#include <array>
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "gicdlc/binarize.hpp"
#include "gicdlc/bytes.hpp"
#include "gicdlc/errors.hpp"

namespace gicdlc {

inline constexpr int kFanIn = 6;
inline constexpr std::uint16_t kModelVersion = 1;
inline constexpr char kModelMagic[] = "GLC1";

struct HardNode {
  std::array<std::uint32_t, kFanIn> inputs{};
  // Bit t is the output for input combination t, where bit k of t is input k.
  std::uint64_t truth_table = 0;

  bool lookup(unsigned combo) const { return (truth_table >> combo) & 1u; }

  friend bool operator==(const HardNode&, const HardNode&) = default;
};

struct OutputGroup {
  std::uint32_t start = 0;
  std::uint32_t size = 0;

  friend bool operator==(const OutputGroup&, const OutputGroup&) = default;
};

struct HardLutNetwork {
  NetRole role = NetRole::arm;
  int kernel = 5;
  int channels = 1;
  int levels = 2;
  std::uint32_t input_width = 0;
  std::vector<std::vector<HardNode>> layers;
  std::vector<OutputGroup> groups;

  ContextSpec context_spec() const { return {kernel, channels, role}; }

  /// Expected group count for the role: 4 block pixels (UPS) or mu/sigma (ARM) per channel.
  int expected_groups() const { return (role == NetRole::ups ? 4 : 2) * channels; }

  friend bool operator==(const HardLutNetwork&, const HardLutNetwork&) = default;
};

/// Splits `last_layer_size` nodes into `count` equal contiguous groups.
inline std::vector<OutputGroup> contiguous_groups(std::uint32_t last_layer_size, std::uint32_t count) {
  if (count == 0 || last_layer_size % count != 0)
    fail(ErrorKind::invalid_argument, "last layer size must be a multiple of the group count");
  std::vector<OutputGroup> g(count);
  const std::uint32_t s = last_layer_size / count;
  for (std::uint32_t i = 0; i < count; ++i) g[i] = {i * s, s};
  return g;
}

inline std::vector<std::string> validate(const HardLutNetwork& net) {
  std::vector<std::string> issues;
  auto add = [&](std::string s) { issues.push_back(std::move(s)); };

  if (net.kernel < 1 || net.kernel % 2 == 0) add("kernel must be odd and positive");
  if (net.channels < 1 || net.channels > 4) add("channels must be in 1..4");
  if (net.levels < 0) add("levels must be >= 0");
  if (net.kernel >= 1 && net.channels >= 1 && net.input_width != net.context_spec().input_width())
    add("input_width " + std::to_string(net.input_width) + " != K*K*C*255 = " +
        std::to_string(net.context_spec().input_width()));
  if (net.layers.empty()) add("network has no layers");

  std::uint64_t feeding = net.input_width;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    if (net.layers[l].empty()) add("layer " + std::to_string(l) + " is empty");
    for (std::size_t n = 0; n < net.layers[l].size(); ++n) {
      for (int k = 0; k < kFanIn; ++k) {
        if (net.layers[l][n].inputs[static_cast<std::size_t>(k)] >= feeding)
          add("layer " + std::to_string(l) + " node " + std::to_string(n) + " input " + std::to_string(k) +
              ": index out of range (" + std::to_string(net.layers[l][n].inputs[static_cast<std::size_t>(k)]) +
              " >= " + std::to_string(feeding) + ")");
      }
    }
    feeding = net.layers[l].size();
  }

  if (net.groups.empty()) {
    add("no output groups");
  } else if (!net.layers.empty()) {
    const std::uint64_t last = net.layers.back().size();
    std::uint64_t expect_start = 0;
    for (std::size_t g = 0; g < net.groups.size(); ++g) {
      const auto& grp = net.groups[g];
      if (grp.size == 0) add("group " + std::to_string(g) + " is empty");
      if (grp.start < expect_start) add("group " + std::to_string(g) + " overlaps the previous group");
      else if (grp.start > expect_start) add("group " + std::to_string(g) + " leaves a gap before it");
      expect_start = std::uint64_t{grp.start} + grp.size;
    }
    if (expect_start != last)
      add("groups cover " + std::to_string(expect_start) + " nodes but the last layer has " + std::to_string(last));
    if (static_cast<int>(net.groups.size()) != net.expected_groups())
      add("group count " + std::to_string(net.groups.size()) + " != expected " +
          std::to_string(net.expected_groups()) + " for " + to_string(net.role));
  }
  return issues;
}

/// Per-group count of 1-bits in the last layer.
template <BitSource Input>
std::vector<std::uint32_t> infer_counts(const HardLutNetwork& net, const Input& input) {
  if (input.size() != net.input_width)
    fail(ErrorKind::invalid_argument, "input width " + std::to_string(input.size()) + " != network width " +
                                          std::to_string(net.input_width));
  std::vector<std::uint8_t> prev, cur;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    cur.resize(layer.size());
    for (std::size_t n = 0; n < layer.size(); ++n) {
      const HardNode& node = layer[n];
      unsigned combo = 0;
      for (int k = 0; k < kFanIn; ++k) {
        const std::uint32_t src = node.inputs[static_cast<std::size_t>(k)];
        const bool b = l == 0 ? static_cast<bool>(input.bit(src)) : prev[src] != 0;
        combo |= static_cast<unsigned>(b) << k;
      }
      cur[n] = node.lookup(combo) ? 1 : 0;
    }
    std::swap(prev, cur);
  }
  std::vector<std::uint32_t> counts(net.groups.size(), 0);
  for (std::size_t g = 0; g < net.groups.size(); ++g)
    for (std::uint32_t i = 0; i < net.groups[g].size; ++i) counts[g] += prev[net.groups[g].start + i];
  return counts;
}

template <BitSource Input>
std::vector<double> infer(const HardLutNetwork& net, const Input& input) {
  const auto counts = infer_counts(net, input);
  std::vector<double> avg(counts.size());
  for (std::size_t g = 0; g < counts.size(); ++g) avg[g] = static_cast<double>(counts[g]) / net.groups[g].size;
  return avg;
}

// ---- serialization ----

namespace detail {

inline Bytes serialize_body(const HardLutNetwork& net) {
  ByteWriter w;
  w.tag(std::string_view(kModelMagic, 4));
  w.u16(kModelVersion);
  w.u8(static_cast<std::uint8_t>(net.role));
  w.u8(static_cast<std::uint8_t>(net.kernel));
  w.u8(static_cast<std::uint8_t>(net.channels));
  w.u8(static_cast<std::uint8_t>(net.levels));
  w.u32(net.input_width);
  w.u32(static_cast<std::uint32_t>(net.layers.size()));
  for (const auto& layer : net.layers) w.u32(static_cast<std::uint32_t>(layer.size()));
  w.u32(static_cast<std::uint32_t>(net.groups.size()));
  for (const auto& g : net.groups) {
    w.u32(g.start);
    w.u32(g.size);
  }
  for (const auto& layer : net.layers)
    for (const auto& node : layer) {
      for (auto in : node.inputs) w.u32(in);
      w.u64(node.truth_table);
    }
  return w.take();
}

}  // namespace detail

inline Bytes save_model(const HardLutNetwork& net) {
  if (auto issues = validate(net); !issues.empty())
    fail(ErrorKind::invalid_argument, "refusing to save invalid network: " + issues.front());
  Bytes body = detail::serialize_body(net);
  const Digest h = sha256(body);
  body.insert(body.end(), h.begin(), h.end());
  return body;
}

/// The 32-byte hash stored at the end of the model file.
inline Digest content_hash(const HardLutNetwork& net) { return sha256(detail::serialize_body(net)); }

inline HardLutNetwork load_model(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const auto magic = r.raw(4);
  if (!std::equal(magic.begin(), magic.end(), kModelMagic)) fail(ErrorKind::bad_magic, "not a GLC1 model file");
  const std::uint16_t version = r.u16();
  if (version != kModelVersion) fail(ErrorKind::unsupported_version, "model version " + std::to_string(version));

  HardLutNetwork net;
  const std::uint8_t role = r.u8();
  if (role > 1) fail(ErrorKind::format, "unknown network role " + std::to_string(role));
  net.role = static_cast<NetRole>(role);
  net.kernel = r.u8();
  net.channels = r.u8();
  net.levels = r.u8();
  net.input_width = r.u32();

  constexpr std::size_t kNodeBytes = kFanIn * 4 + 8;
  const std::uint32_t layer_count = r.u32();
  if (layer_count > r.remaining() / 4) fail(ErrorKind::format, "truncated input: layer table");
  std::vector<std::uint32_t> sizes(layer_count);
  std::uint64_t total_nodes = 0;
  for (auto& s : sizes) {
    s = r.u32();
    total_nodes += s;
  }
  const std::uint32_t group_count = r.u32();
  if (group_count > r.remaining() / 8) fail(ErrorKind::format, "truncated input: group table");
  net.groups.resize(group_count);
  for (auto& g : net.groups) {
    g.start = r.u32();
    g.size = r.u32();
  }
  if (total_nodes > r.remaining() / kNodeBytes) fail(ErrorKind::format, "truncated input: node records");
  net.layers.resize(layer_count);
  for (std::uint32_t l = 0; l < layer_count; ++l) {
    net.layers[l].resize(sizes[l]);
    for (auto& node : net.layers[l]) {
      for (auto& in : node.inputs) in = r.u32();
      node.truth_table = r.u64();
    }
  }
  const std::size_t body_len = r.position();
  const auto stored = r.raw(32);
  if (r.remaining() != 0) fail(ErrorKind::format, "trailing bytes after model hash");
  const Digest actual = sha256(bytes.first(body_len));
  if (!std::equal(actual.begin(), actual.end(), stored.begin()))
    fail(ErrorKind::hash_mismatch, "model content hash does not match");

  if (auto issues = validate(net); !issues.empty()) fail(ErrorKind::format, "invalid network: " + issues.front());
  return net;
}

inline HardLutNetwork load_model_file(const std::string& path) { return load_model(read_file(path)); }

/// Human-readable listing, one node per line.
inline std::string dump_text(const HardLutNetwork& net) {
  std::string s;
  char line[160];
  std::snprintf(line, sizeof line, "# role=%s kernel=%d channels=%d levels=%d input_width=%u layers=%zu\n",
                to_string(net.role), net.kernel, net.channels, net.levels, net.input_width, net.layers.size());
  s += line;
  for (std::size_t g = 0; g < net.groups.size(); ++g) {
    std::snprintf(line, sizeof line, "# group %zu start=%u size=%u\n", g, net.groups[g].start, net.groups[g].size);
    s += line;
  }
  for (std::size_t l = 0; l < net.layers.size(); ++l)
    for (std::size_t n = 0; n < net.layers[l].size(); ++n) {
      const auto& nd = net.layers[l][n];
      std::snprintf(line, sizeof line, "%zu %zu %u %u %u %u %u %u %016llx\n", l, n, nd.inputs[0], nd.inputs[1],
                    nd.inputs[2], nd.inputs[3], nd.inputs[4], nd.inputs[5],
                    static_cast<unsigned long long>(nd.truth_table));
      s += line;
    }
  return s;
}

}  // namespace gicdlc
