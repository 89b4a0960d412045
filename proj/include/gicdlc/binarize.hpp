#pragma once

// Thermometer binarization and the context windows fed to the UPS and ARM
// networks. The bit layout is part of the model file contract:
//
//   bit index = ((window_pos * channels) + channel) * 255 + threshold
//
// with window_pos row-major over the K x K window centered on the target
// pixel, and bit = (value > threshold). Positions outside the image take the
// value of the nearest in-image position (edge replication).

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "gicdlc/errors.hpp"
#include "gicdlc/image.hpp"

namespace gicdlc {

inline constexpr int kThermometerLevels = 255;

enum class NetRole : std::uint8_t { ups = 0, arm = 1 };

inline const char* to_string(NetRole r) { return r == NetRole::ups ? "UPS" : "ARM"; }

struct ContextSpec {
  int kernel = 5;
  int channels = 1;
  NetRole mode = NetRole::arm;

  std::size_t window_values() const { return static_cast<std::size_t>(kernel) * kernel * channels; }
  std::size_t input_width() const { return window_values() * kThermometerLevels; }
  bool valid() const { return kernel >= 1 && kernel % 2 == 1 && channels >= 1; }
};

/// Anything an LUT network can read input bits from.
template <typename T>
concept BitSource = requires(const T& s, std::size_t i) {
  { s.bit(i) } -> std::convertible_to<bool>;
  { s.size() } -> std::convertible_to<std::size_t>;
};

class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t n, bool v = false) : bits_(n, v ? 1 : 0) {}

  bool bit(std::size_t i) const { return bits_[i] != 0; }
  void set(std::size_t i, bool v) { bits_[i] = v ? 1 : 0; }
  std::size_t size() const { return bits_.size(); }
  std::size_t popcount() const { return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1)); }

  friend bool operator==(const BitVector&, const BitVector&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

inline void check_intensity(int v) {
  if (v < 0 || v > 255) fail(ErrorKind::invalid_argument, "intensity out of range: " + std::to_string(v));
}

inline BitVector thermometer(int v) {
  check_intensity(v);
  BitVector bv(kThermometerLevels);
  for (int i = 0; i < v && i < kThermometerLevels; ++i) bv.set(static_cast<std::size_t>(i), true);
  return bv;
}

/// K x K x C intensities around one pixel; its thermometer expansion is the
/// network input. Exposes bits lazily so inference never materializes the
/// full K*K*C*255 vector.
struct ContextWindow {
  std::vector<std::uint8_t> values;  // (window_pos * channels + channel)

  bool bit(std::size_t i) const { return values[i / kThermometerLevels] > i % kThermometerLevels; }
  std::size_t size() const { return values.size() * kThermometerLevels; }

  BitVector to_bits() const {
    BitVector bv(size());
    for (std::size_t i = 0; i < bv.size(); ++i) bv.set(i, bit(i));
    return bv;
  }

  friend bool operator==(const ContextWindow&, const ContextWindow&) = default;
};

/// Real-valued UPS output rounded half up and clamped to a valid intensity.
inline std::uint8_t round_estimate(double v) {
  const double r = std::floor(v + 0.5);
  return static_cast<std::uint8_t>(std::clamp(r, 0.0, 255.0));
}

inline Image round_estimates(const RealImage& est) {
  Image out(est.height, est.width, est.channels);
  for (std::size_t i = 0; i < est.data.size(); ++i) out.data[i] = round_estimate(est.data[i]);
  return out;
}

namespace detail {

template <typename ValueAt>
void fill_window(ContextWindow& w, int height, int width, int channels, int row, int col, int kernel,
                 ValueAt&& value_at) {
  const int half = kernel / 2;
  w.values.resize(static_cast<std::size_t>(kernel) * kernel * channels);
  std::size_t k = 0;
  for (int dr = -half; dr <= half; ++dr) {
    const int r = std::clamp(row + dr, 0, height - 1);
    for (int dc = -half; dc <= half; ++dc) {
      const int c = std::clamp(col + dc, 0, width - 1);
      for (int ch = 0; ch < channels; ++ch) w.values[k++] = value_at(r, c, ch);
    }
  }
}

}  // namespace detail

inline void gather_ups_window(ContextWindow& out, const Image& lowres, int row, int col, int kernel) {
  detail::fill_window(out, lowres.height, lowres.width, lowres.channels, row, col, kernel,
                      [&](int r, int c, int ch) { return lowres.at(r, c, ch); });
}

/// `partial` holds decoded pixels for every raster position before (row, col);
/// later positions come from `prior` (rounded UPS estimates) or 0 when there
/// is no prior (coarsest level).
inline void gather_arm_window(ContextWindow& out, const Image& partial, const Image* prior, int row, int col,
                              int kernel) {
  const long long limit = static_cast<long long>(row) * partial.width + col;
  detail::fill_window(out, partial.height, partial.width, partial.channels, row, col, kernel,
                      [&](int r, int c, int ch) -> std::uint8_t {
                        if (static_cast<long long>(r) * partial.width + c < limit) return partial.at(r, c, ch);
                        return prior ? prior->at(r, c, ch) : std::uint8_t{0};
                      });
}

inline void check_spec(const ContextSpec& spec, NetRole role, int channels) {
  if (!spec.valid()) fail(ErrorKind::invalid_argument, "kernel must be odd and positive");
  if (spec.mode != role) fail(ErrorKind::invalid_argument, "context spec has the wrong role");
  if (spec.channels != channels) fail(ErrorKind::invalid_argument, "context spec channel count mismatch");
}

inline BitVector assemble_ups_context(const Image& lowres, int row, int col, const ContextSpec& spec) {
  check_spec(spec, NetRole::ups, lowres.channels);
  ContextWindow w;
  gather_ups_window(w, lowres, row, col, spec.kernel);
  return w.to_bits();
}

inline BitVector assemble_arm_context(const Image& partial, const std::optional<RealImage>& ups_estimate, int row,
                                      int col, const ContextSpec& spec) {
  check_spec(spec, NetRole::arm, partial.channels);
  std::optional<Image> prior;
  if (ups_estimate) {
    if (ups_estimate->height != partial.height || ups_estimate->width != partial.width ||
        ups_estimate->channels != partial.channels)
      fail(ErrorKind::invalid_argument, "UPS estimate dims differ from level dims");
    prior = round_estimates(*ups_estimate);
  }
  ContextWindow w;
  gather_arm_window(w, partial, prior ? &*prior : nullptr, row, col, spec.kernel);
  return w.to_bits();
}

}  // namespace gicdlc
