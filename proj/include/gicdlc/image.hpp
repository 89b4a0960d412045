#pragma once

#include <cctype>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gicdlc/bytes.hpp"
#include "gicdlc/errors.hpp"

namespace gicdlc {

/// 8-bit image, row-major with channels interleaved.
struct Image {
  int height = 0;
  int width = 0;
  int channels = 1;
  std::vector<std::uint8_t> data;

  Image() = default;
  Image(int h, int w, int c = 1, std::uint8_t fill = 0)
      : height(h), width(w), channels(c), data(static_cast<std::size_t>(h) * w * c, fill) {
    if (h < 0 || w < 0 || c < 1) fail(ErrorKind::invalid_argument, "bad image dims");
  }

  std::size_t index(int row, int col, int ch = 0) const {
    return (static_cast<std::size_t>(row) * width + col) * channels + ch;
  }
  std::uint8_t at(int row, int col, int ch = 0) const { return data[index(row, col, ch)]; }
  std::uint8_t& at(int row, int col, int ch = 0) { return data[index(row, col, ch)]; }

  std::size_t pixel_count() const { return static_cast<std::size_t>(height) * width; }
  bool empty() const { return height == 0 || width == 0; }

  friend bool operator==(const Image&, const Image&) = default;
};

/// Real-valued image (network predictions, bicubic output).
struct RealImage {
  int height = 0;
  int width = 0;
  int channels = 1;
  std::vector<double> data;

  RealImage() = default;
  RealImage(int h, int w, int c = 1)
      : height(h), width(w), channels(c), data(static_cast<std::size_t>(h) * w * c, 0.0) {}

  std::size_t index(int row, int col, int ch = 0) const {
    return (static_cast<std::size_t>(row) * width + col) * channels + ch;
  }
  double at(int row, int col, int ch = 0) const { return data[index(row, col, ch)]; }
  double& at(int row, int col, int ch = 0) { return data[index(row, col, ch)]; }
};

inline bool valid(const Image& img) {
  return img.height >= 0 && img.width >= 0 && img.channels >= 1 &&
         img.data.size() == static_cast<std::size_t>(img.height) * img.width * img.channels;
}

// ---- binary PGM (P5, maxval 255) ----

inline Bytes encode_pgm(const Image& img) {
  if (img.channels != 1) fail(ErrorKind::invalid_argument, "PGM requires a single channel");
  const std::string header = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  Bytes out(header.begin(), header.end());
  out.insert(out.end(), img.data.begin(), img.data.end());
  return out;
}

inline Image decode_pgm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto number = [&]() -> long {
    skip_ws();
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) fail(ErrorKind::format, "PGM header: expected number");
    long v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos++] - '0');
      if (v > 1'000'000) fail(ErrorKind::format, "PGM header: value too large");
    }
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') fail(ErrorKind::bad_magic, "not a binary PGM (P5)");
  pos = 2;
  const long w = number();
  const long h = number();
  const long maxval = number();
  if (maxval != 255) fail(ErrorKind::format, "only 8-bit PGM (maxval 255) supported");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) fail(ErrorKind::format, "PGM header: missing separator");
  ++pos;
  Image img(static_cast<int>(h), static_cast<int>(w), 1);
  if (bytes.size() - pos < img.data.size()) fail(ErrorKind::format, "PGM raster truncated");
  std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(pos), img.data.size(), img.data.begin());
  return img;
}

}  // namespace gicdlc
