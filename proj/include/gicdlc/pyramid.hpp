#pragma once

#include <algorithm>
#include <vector>

#include "gicdlc/errors.hpp"
#include "gicdlc/image.hpp"

namespace gicdlc {

/// Halve resolution with 2x2 average pooling, rounding half up. Odd sizes
/// replicate the last row/column so the output is ceil(H/2) x ceil(W/2).
inline Image downsample_once(const Image& img) {
  Image out((img.height + 1) / 2, (img.width + 1) / 2, img.channels);
  for (int r = 0; r < out.height; ++r) {
    const int r0 = 2 * r;
    const int r1 = std::min(r0 + 1, img.height - 1);
    for (int c = 0; c < out.width; ++c) {
      const int c0 = 2 * c;
      const int c1 = std::min(c0 + 1, img.width - 1);
      for (int ch = 0; ch < img.channels; ++ch) {
        const int sum = img.at(r0, c0, ch) + img.at(r0, c1, ch) + img.at(r1, c0, ch) + img.at(r1, c1, ch);
        out.at(r, c, ch) = static_cast<std::uint8_t>((sum + 2) / 4);
      }
    }
  }
  return out;
}

struct Pyramid {
  std::vector<Image> levels;  // levels[0] is the original

  int top_level() const { return static_cast<int>(levels.size()) - 1; }
  const Image& operator[](int level) const { return levels[static_cast<std::size_t>(level)]; }
};

/// Dimensions of level `level` for an H x W original.
inline std::pair<int, int> level_dims(int height, int width, int level) {
  for (int l = 0; l < level; ++l) {
    height = (height + 1) / 2;
    width = (width + 1) / 2;
  }
  return {height, width};
}

inline Pyramid decompose(const Image& img, int levels) {
  if (levels < 0) fail(ErrorKind::invalid_argument, "level count must be >= 0");
  if (!valid(img)) fail(ErrorKind::invalid_argument, "invalid image");
  if (img.empty()) fail(ErrorKind::invalid_argument, "empty image");
  // ceil-halving never reaches 0 from >= 1, but an image already at 1x1
  // cannot be pooled further without duplicating the same pixel.
  int h = img.height, w = img.width;
  for (int l = 0; l < levels; ++l) {
    if (h == 1 && w == 1)
      fail(ErrorKind::invalid_argument, "too many levels (" + std::to_string(levels) + ") for " +
                                            std::to_string(img.height) + "x" + std::to_string(img.width));
    h = (h + 1) / 2;
    w = (w + 1) / 2;
  }
  Pyramid p;
  p.levels.reserve(static_cast<std::size_t>(levels) + 1);
  p.levels.push_back(img);
  for (int l = 1; l <= levels; ++l) p.levels.push_back(downsample_once(p.levels.back()));
  return p;
}

}  // namespace gicdlc
