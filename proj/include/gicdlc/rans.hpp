#pragma once

// Byte-renormalized rANS with a 64-bit state.
//
// State invariant between symbols: x in [kRansLow, 256 * kRansLow).
// The encoder emits bytes in encode order; the payload stores them reversed
// (the final 8 state bytes first, low byte first) so the decoder reads it
// front to back.

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "gicdlc/bytes.hpp"
#include "gicdlc/errors.hpp"
#include "gicdlc/prob.hpp"

namespace gicdlc {

inline constexpr std::uint64_t kRansLow = 1ull << 31;

/// One raw encode step: q = x / freq, r = x mod freq, x' = q*F + cum + r.
constexpr std::uint64_t rans_step_encode(std::uint64_t x, std::uint32_t freq, std::uint32_t cum, std::uint32_t total) {
  return (x / freq) * total + cum + (x % freq);
}

/// Slot m = x' mod F identifies the symbol; returns the previous state given that symbol's freq/cum.
constexpr std::uint64_t rans_step_decode(std::uint64_t x, std::uint32_t freq, std::uint32_t cum, std::uint32_t total) {
  return freq * (x / total) + (x % total) - cum;
}

/// Symbol s with cum[s] <= m < cum[s+1].
inline int find_symbol(const FrequencyTable& ft, std::uint32_t m) {
  const auto it = std::upper_bound(ft.cum.begin() + 1, ft.cum.end(), m);
  return static_cast<int>(it - ft.cum.begin()) - 1;
}

class RansEncoder {
 public:
  void encode(int s, const FrequencyTable& ft) {
    if (s < 0 || s >= kSymbols) fail(ErrorKind::invalid_argument, "symbol out of range");
    const std::uint32_t freq = ft.freq[static_cast<std::size_t>(s)];
    if (freq == 0) fail(ErrorKind::invalid_argument, "zero-frequency symbol " + std::to_string(s));
    const std::uint64_t x_max = ((kRansLow >> kFreqBits) << 8) * freq;
    while (x_ >= x_max) {
      emitted_.push_back(static_cast<std::uint8_t>(x_ & 0xff));
      x_ >>= 8;
    }
    x_ = rans_step_encode(x_, freq, ft.cum[static_cast<std::size_t>(s)], kFreqTotal);
  }

  std::uint64_t state() const { return x_; }

  /// Appends the final state and returns the payload in decoder order.
  Bytes finish() && {
    for (int i = 7; i >= 0; --i) emitted_.push_back(static_cast<std::uint8_t>(x_ >> (8 * i)));
    std::reverse(emitted_.begin(), emitted_.end());
    return std::move(emitted_);
  }

 private:
  std::uint64_t x_ = kRansLow;
  Bytes emitted_;
};

class RansDecoder {
 public:
  explicit RansDecoder(std::span<const std::uint8_t> payload) : in_(payload) {
    if (in_.size() < 8) fail(ErrorKind::corrupt_stream, "payload shorter than the 8-byte final state");
    for (int i = 0; i < 8; ++i) x_ |= std::uint64_t{in_[static_cast<std::size_t>(i)]} << (8 * i);
    pos_ = 8;
  }

  int decode(const FrequencyTable& ft) {
    if (x_ < kRansLow) fail(ErrorKind::corrupt_stream, "stream exhausted with symbols outstanding");
    const auto m = static_cast<std::uint32_t>(x_ & (kFreqTotal - 1));
    const int s = find_symbol(ft, m);
    x_ = rans_step_decode(x_, ft.freq[static_cast<std::size_t>(s)], ft.cum[static_cast<std::size_t>(s)], kFreqTotal);
    while (x_ < kRansLow && pos_ < in_.size()) x_ = (x_ << 8) | in_[pos_++];
    return s;
  }

  std::uint64_t state() const { return x_; }
  bool exhausted() const { return pos_ == in_.size(); }

  /// A well-formed stream ends at the initial encoder state with every byte consumed.
  void finish() const {
    if (x_ != kRansLow || pos_ != in_.size()) fail(ErrorKind::corrupt_stream, "payload not fully consumed");
  }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
  std::uint64_t x_ = 0;
};

}  // namespace gicdlc
