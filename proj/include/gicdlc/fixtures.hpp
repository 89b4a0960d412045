#pragma once

// Hand-built networks for tests and golden files. They are tiny (K = 3,
// 2 layers x 32 nodes by default) and not meant to compress well.

#include <cstdint>

#include "gicdlc/lutnet.hpp"

namespace gicdlc::fixtures {

inline constexpr std::uint64_t kAllOnes = ~0ull;
inline constexpr std::uint64_t kAllZeros = 0ull;
inline constexpr std::uint64_t kPassInput0 = 0xAAAAAAAAAAAAAAAAull;  // output = input 0

struct FixtureShape {
  int kernel = 3;
  int channels = 1;
  int levels = 2;
  std::uint32_t nodes_per_layer = 32;
};

namespace detail {

inline HardLutNetwork empty_net(NetRole role, const FixtureShape& shape) {
  HardLutNetwork net;
  net.role = role;
  net.kernel = shape.kernel;
  net.channels = shape.channels;
  net.levels = shape.levels;
  net.input_width = static_cast<std::uint32_t>(net.context_spec().input_width());
  net.layers.assign(2, std::vector<HardNode>(shape.nodes_per_layer));
  net.groups = contiguous_groups(shape.nodes_per_layer, static_cast<std::uint32_t>(net.expected_groups()));
  return net;
}

inline HardNode wire_all(std::uint32_t src, std::uint64_t table) {
  HardNode n;
  n.inputs.fill(src);
  n.truth_table = table;
  return n;
}

/// Thresholds spreading `s` nodes over the 255 thermometer levels; for s = 255 this is 0..254.
inline std::uint32_t spread_threshold(std::uint32_t k, std::uint32_t s) { return (2 * k + 1) * 255 / (2 * s); }

/// Wires last-layer group `g` so that its average tracks the center pixel of `channel`.
inline void wire_center_passthrough(HardLutNetwork& net, const OutputGroup& g, int channel) {
  const std::uint32_t center = static_cast<std::uint32_t>(net.kernel * net.kernel / 2);
  for (std::uint32_t k = 0; k < g.size; ++k) {
    const std::uint32_t bit = (center * static_cast<std::uint32_t>(net.channels) + static_cast<std::uint32_t>(channel)) *
                                  kThermometerLevels +
                              spread_threshold(k, g.size);
    net.layers[0][g.start + k] = wire_all(bit, kPassInput0);
    net.layers[1][g.start + k] = wire_all(g.start + k, kPassInput0);
  }
}

/// Last-layer group with the first `ones` nodes constant 1, the rest constant 0.
inline void wire_constant(HardLutNetwork& net, const OutputGroup& g, std::uint32_t ones) {
  for (std::uint32_t k = 0; k < g.size; ++k) net.layers[1][g.start + k] = wire_all(0, k < ones ? kAllOnes : kAllZeros);
}

}  // namespace detail

/// ARM whose groups always average 0.5: mu = 127.5, b = 1 everywhere.
inline HardLutNetwork make_uniform_arm(const FixtureShape& shape = {}) {
  HardLutNetwork net = detail::empty_net(NetRole::arm, shape);
  for (const auto& g : net.groups) detail::wire_constant(net, g, g.size / 2);
  return net;
}

/// UPS that copies the center low-res pixel into all four block outputs
/// (nearest-neighbor upsampling, quantized to the group size).
inline HardLutNetwork make_passthrough_ups(const FixtureShape& shape = {}) {
  HardLutNetwork net = detail::empty_net(NetRole::ups, shape);
  for (int c = 0; c < shape.channels; ++c)
    for (int b = 0; b < 4; ++b) detail::wire_center_passthrough(net, net.groups[static_cast<std::size_t>(4 * c + b)], c);
  return net;
}

/// ARM predicting mu = center context value (the UPS prior at finer levels)
/// with a fixed scale b = sigma_ones / (group size - sigma_ones).
inline HardLutNetwork make_prior_arm(const FixtureShape& shape = {}, std::uint32_t sigma_ones = 12) {
  HardLutNetwork net = detail::empty_net(NetRole::arm, shape);
  for (int c = 0; c < shape.channels; ++c) {
    detail::wire_center_passthrough(net, net.groups[static_cast<std::size_t>(2 * c)], c);
    const auto& sg = net.groups[static_cast<std::size_t>(2 * c + 1)];
    detail::wire_constant(net, sg, std::min(sigma_ones, sg.size));
  }
  return net;
}

}  // namespace gicdlc::fixtures
