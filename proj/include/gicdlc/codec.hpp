#pragma once

// Hierarchical coding. Decoding goes coarse to fine: the coarsest level is
// decoded autoregressively from an all-zero initialization; every finer level
// first gets a UPS prediction from the decoded coarser level, then is decoded
// pixel by pixel with the ARM seeing decoded pixels before the current raster
// position and rounded UPS predictions elsewhere. All pixels share one rANS
// stream, encoded in reverse decode order.
//
// Container ("GICD", integers little-endian):
//
//   "GICD"  u16 version  u16 height  u16 width  u8 channels  u8 levels
//   u8 kernel  u8 reserved(0)
//   32-byte UPS content hash  32-byte ARM content hash
//   u32 payload_length  payload
//   u32 CRC-32 of every preceding byte

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gicdlc/binarize.hpp"
#include "gicdlc/bytes.hpp"
#include "gicdlc/errors.hpp"
#include "gicdlc/image.hpp"
#include "gicdlc/lutnet.hpp"
#include "gicdlc/prob.hpp"
#include "gicdlc/pyramid.hpp"
#include "gicdlc/rans.hpp"

namespace gicdlc {

inline constexpr std::uint16_t kContainerVersion = 1;
inline constexpr char kContainerMagic[] = "GICD";
inline constexpr int kMaxDim = 65535;
inline constexpr int kMaxChannels = 4;
inline constexpr int kDefaultLevels = 2;

/// What the codec needs from a probability model. The LUT-network model is
/// the production one; tests plug in others (e.g. an exactly uniform model).
template <typename M>
concept PixelModel = requires(const M& m, const Image& low, int h, int w, const ContextWindow& ctx) {
  { m.kernel() } -> std::convertible_to<int>;
  { m.channels() } -> std::convertible_to<int>;
  { m.upsample(low, h, w) } -> std::same_as<RealImage>;
  { m.predict(ctx) } -> std::same_as<std::vector<SymbolDistribution>>;
  { m.ups_hash() } -> std::convertible_to<Digest>;
  { m.arm_hash() } -> std::convertible_to<Digest>;
};

/// UPS prediction of the next finer level from `lowres`, cropped to out_h x out_w.
inline RealImage predict_ups_level(const Image& lowres, const HardLutNetwork& ups, int out_h, int out_w) {
  if (ups.role != NetRole::ups) fail(ErrorKind::model_mismatch, "UPS model has role ARM");
  if (ups.channels != lowres.channels) fail(ErrorKind::model_mismatch, "UPS channel count differs from image");
  if (static_cast<int>(ups.groups.size()) != 4 * ups.channels)
    fail(ErrorKind::model_mismatch, "UPS model must have 4 output groups per channel");
  if (out_h > 2 * lowres.height || out_w > 2 * lowres.width || out_h < 2 * lowres.height - 1 ||
      out_w < 2 * lowres.width - 1)
    fail(ErrorKind::invalid_argument, "output dims are not a 2x upsampling of the input");
  RealImage out(out_h, out_w, lowres.channels);
  ContextWindow win;
  for (int i = 0; i < lowres.height; ++i)
    for (int j = 0; j < lowres.width; ++j) {
      gather_ups_window(win, lowres, i, j, ups.kernel);
      const auto counts = infer_counts(ups, win);
      for (int c = 0; c < lowres.channels; ++c)
        for (int g = 0; g < 4; ++g) {
          const int r = 2 * i + g / 2, col = 2 * j + g % 2;
          if (r >= out_h || col >= out_w) continue;
          const auto& grp = ups.groups[static_cast<std::size_t>(4 * c + g)];
          out.at(r, col, c) = 255.0 * counts[static_cast<std::size_t>(4 * c + g)] / grp.size;
        }
    }
  return out;
}

/// Production model: shared UPS and ARM networks across all levels.
class LutModel {
 public:
  LutModel(const HardLutNetwork& ups, const HardLutNetwork& arm)
      : ups_(&ups), arm_(&arm), ups_hash_(content_hash(ups)), arm_hash_(content_hash(arm)) {
    if (ups.role != NetRole::ups) fail(ErrorKind::model_mismatch, "UPS model has role ARM");
    if (arm.role != NetRole::arm) fail(ErrorKind::model_mismatch, "ARM model has role UPS");
    if (ups.kernel != arm.kernel) fail(ErrorKind::model_mismatch, "UPS and ARM kernels differ");
    if (ups.channels != arm.channels) fail(ErrorKind::model_mismatch, "UPS and ARM channel counts differ");
    if (static_cast<int>(arm.groups.size()) != 2 * arm.channels)
      fail(ErrorKind::model_mismatch, "ARM model must have 2 output groups per channel");
    if (static_cast<int>(ups.groups.size()) != 4 * ups.channels)
      fail(ErrorKind::model_mismatch, "UPS model must have 4 output groups per channel");
  }

  int kernel() const { return arm_->kernel; }
  int channels() const { return arm_->channels; }
  Digest ups_hash() const { return ups_hash_; }
  Digest arm_hash() const { return arm_hash_; }

  RealImage upsample(const Image& low, int h, int w) const { return predict_ups_level(low, *ups_, h, w); }

  std::vector<LaplaceParams> laplace(const ContextWindow& ctx) const {
    const auto counts = infer_counts(*arm_, ctx);
    std::vector<LaplaceParams> p(static_cast<std::size_t>(arm_->channels));
    for (std::size_t c = 0; c < p.size(); ++c) {
      const double mu_avg = static_cast<double>(counts[2 * c]) / arm_->groups[2 * c].size;
      const double sigma_avg = static_cast<double>(counts[2 * c + 1]) / arm_->groups[2 * c + 1].size;
      p[c] = params_from_averages(mu_avg, sigma_avg);
    }
    return p;
  }

  std::vector<SymbolDistribution> predict(const ContextWindow& ctx) const {
    std::vector<SymbolDistribution> d;
    for (const auto& p : laplace(ctx)) d.push_back(discretize(p));
    return d;
  }

 private:
  const HardLutNetwork* ups_;
  const HardLutNetwork* arm_;
  Digest ups_hash_;
  Digest arm_hash_;
};

struct CodingPosition {
  int level = 0;
  int row = 0;
  int col = 0;
  int channel = 0;

  friend bool operator==(const CodingPosition&, const CodingPosition&) = default;
};

/// Coarsest level first, raster order within a level, channels innermost.
inline std::vector<CodingPosition> global_decode_order(int height, int width, int levels, int channels = 1) {
  std::vector<CodingPosition> order;
  for (int l = levels; l >= 0; --l) {
    const auto [h, w] = level_dims(height, width, l);
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c)
        for (int ch = 0; ch < channels; ++ch) order.push_back({l, r, c, ch});
  }
  return order;
}

struct Container {
  std::uint16_t version = kContainerVersion;
  int height = 0;
  int width = 0;
  int channels = 1;
  int levels = 0;
  int kernel = 0;
  Digest ups_hash{};
  Digest arm_hash{};
  Bytes payload;

  friend bool operator==(const Container&, const Container&) = default;
};

inline constexpr std::size_t kContainerHeaderBytes = 14;
inline constexpr std::size_t kContainerOverheadBytes = kContainerHeaderBytes + 64 + 4 + 4;

inline Bytes serialize_container(const Container& c) {
  ByteWriter w;
  w.tag(std::string_view(kContainerMagic, 4));
  w.u16(c.version);
  w.u16(static_cast<std::uint16_t>(c.height));
  w.u16(static_cast<std::uint16_t>(c.width));
  w.u8(static_cast<std::uint8_t>(c.channels));
  w.u8(static_cast<std::uint8_t>(c.levels));
  w.u8(static_cast<std::uint8_t>(c.kernel));
  w.u8(0);
  w.raw(c.ups_hash);
  w.raw(c.arm_hash);
  w.u32(static_cast<std::uint32_t>(c.payload.size()));
  w.raw(c.payload);
  const std::uint32_t crc = crc32_of(w.bytes());
  w.u32(crc);
  return w.take();
}

inline Container parse_container(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const auto magic = r.raw(4);
  if (!std::equal(magic.begin(), magic.end(), kContainerMagic)) fail(ErrorKind::bad_magic, "not a GICD container");
  Container c;
  c.version = r.u16();
  if (c.version != kContainerVersion)
    fail(ErrorKind::unsupported_version, "container version " + std::to_string(c.version));
  c.height = r.u16();
  c.width = r.u16();
  c.channels = r.u8();
  c.levels = r.u8();
  c.kernel = r.u8();
  r.u8();
  const auto uh = r.raw(32);
  std::copy(uh.begin(), uh.end(), c.ups_hash.begin());
  const auto ah = r.raw(32);
  std::copy(ah.begin(), ah.end(), c.arm_hash.begin());
  const std::uint32_t len = r.u32();
  if (len > r.remaining()) fail(ErrorKind::checksum, "container truncated (payload length exceeds file)");
  const auto payload = r.raw(len);
  c.payload.assign(payload.begin(), payload.end());
  const std::size_t body = r.position();
  if (r.remaining() != 4) fail(ErrorKind::checksum, "container size does not match payload length");
  if (r.u32() != crc32_of(bytes.first(body))) fail(ErrorKind::checksum, "container CRC mismatch");
  return c;
}

/// One coded symbol as seen by the encoder or decoder (for instrumentation).
struct CodingEvent {
  CodingPosition pos;
  const ContextWindow& window;
  const FrequencyTable& table;
  int symbol;
};
using CodingObserver = std::function<void(const CodingEvent&)>;

namespace detail {

template <PixelModel Model>
void check_model_for(const Model& model, int channels) {
  if (model.channels() != channels)
    fail(ErrorKind::model_mismatch, "model expects " + std::to_string(model.channels()) + " channel(s), image has " +
                                        std::to_string(channels));
  if (model.kernel() < 1 || model.kernel() % 2 == 0 || model.kernel() > 255)
    fail(ErrorKind::model_mismatch, "model kernel must be odd and in 1..255");
}

inline void check_image_for_coding(const Image& img, int levels) {
  if (!valid(img) || img.empty()) fail(ErrorKind::invalid_argument, "invalid or empty image");
  if (img.height > kMaxDim || img.width > kMaxDim) fail(ErrorKind::invalid_argument, "image exceeds 65535 per side");
  if (img.channels > kMaxChannels) fail(ErrorKind::invalid_argument, "at most 4 channels supported");
  if (levels < 0 || levels > 255) fail(ErrorKind::invalid_argument, "levels must be in 0..255");
}

/// Rounded UPS prior for `level`, or empty when level is the coarsest.
template <PixelModel Model>
std::optional<Image> level_prior(const Model& model, const std::vector<Image>& levels, int level) {
  if (level + 1 >= static_cast<int>(levels.size())) return std::nullopt;
  const Image& fine = levels[static_cast<std::size_t>(level)];
  return round_estimates(model.upsample(levels[static_cast<std::size_t>(level) + 1], fine.height, fine.width));
}

}  // namespace detail

struct LevelBits {
  int level = 0;
  double bits = 0.0;  // total -log2 p over the level
  double bpp = 0.0;   // bits / (H * W) of level 0
};

struct TheoreticalReport {
  std::vector<LevelBits> levels;  // ordered level 0 .. L
  double total_bits = 0.0;
  double total_bpp = 0.0;
};

/// Runs the decoder's context/prediction sequence over a known image,
/// visiting every symbol in global decode order (or its reverse).
template <PixelModel Model, typename Visit>
void simulate_coding(const Image& img, const Model& model, int levels, bool reverse, Visit&& visit) {
  detail::check_image_for_coding(img, levels);
  detail::check_model_for(model, img.channels);
  const Pyramid pyr = decompose(img, levels);
  ContextWindow win;
  auto run_level = [&](int l) {
    const Image& truth = pyr[l];
    const auto prior = detail::level_prior(model, pyr.levels, l);
    const long long n = static_cast<long long>(truth.height) * truth.width;
    for (long long k = 0; k < n; ++k) {
      const long long idx = reverse ? n - 1 - k : k;
      const int r = static_cast<int>(idx / truth.width), c = static_cast<int>(idx % truth.width);
      gather_arm_window(win, truth, prior ? &*prior : nullptr, r, c, model.kernel());
      const auto dists = model.predict(win);
      for (int kc = 0; kc < truth.channels; ++kc) {
        const int ch = reverse ? truth.channels - 1 - kc : kc;
        visit(CodingPosition{l, r, c, ch}, win, dists[static_cast<std::size_t>(ch)],
              static_cast<int>(truth.at(r, c, ch)));
      }
    }
  };
  if (reverse)
    for (int l = 0; l <= levels; ++l) run_level(l);
  else
    for (int l = levels; l >= 0; --l) run_level(l);
}

template <PixelModel Model>
Container encode_image(const Image& img, const Model& model, int levels = kDefaultLevels,
                       const CodingObserver& observer = {}) {
  RansEncoder enc;
  simulate_coding(img, model, levels, /*reverse=*/true,
                  [&](const CodingPosition& pos, const ContextWindow& win, const SymbolDistribution& d, int v) {
                    const FrequencyTable ft = quantize_freqs(d);
                    if (observer) observer(CodingEvent{pos, win, ft, v});
                    enc.encode(v, ft);
                  });
  Container c;
  c.height = img.height;
  c.width = img.width;
  c.channels = img.channels;
  c.levels = levels;
  c.kernel = model.kernel();
  c.ups_hash = model.ups_hash();
  c.arm_hash = model.arm_hash();
  c.payload = std::move(enc).finish();
  return c;
}

template <PixelModel Model>
Image decode_image(const Container& c, const Model& model, const CodingObserver& observer = {}) {
  if (c.ups_hash != model.ups_hash()) fail(ErrorKind::hash_mismatch, "container was coded with a different UPS model");
  if (c.arm_hash != model.arm_hash()) fail(ErrorKind::hash_mismatch, "container was coded with a different ARM model");
  if (c.kernel != model.kernel()) fail(ErrorKind::model_mismatch, "container kernel differs from model kernel");
  if (c.height < 1 || c.width < 1 || c.channels < 1 || c.channels > kMaxChannels)
    fail(ErrorKind::format, "container has invalid dimensions");
  detail::check_model_for(model, c.channels);
  // Same level bound as decompose(): never pool a 1x1 level.
  for (int l = 0; l < c.levels; ++l) {
    const auto [h, w] = level_dims(c.height, c.width, l);
    if (h == 1 && w == 1) fail(ErrorKind::format, "container level count too large for its dimensions");
  }

  RansDecoder dec(c.payload);
  std::vector<Image> levels(static_cast<std::size_t>(c.levels) + 1);
  ContextWindow win;
  for (int l = c.levels; l >= 0; --l) {
    const auto [h, w] = level_dims(c.height, c.width, l);
    Image& cur = levels[static_cast<std::size_t>(l)];
    cur = Image(h, w, c.channels);
    const auto prior = detail::level_prior(model, levels, l);
    for (int r = 0; r < h; ++r)
      for (int col = 0; col < w; ++col) {
        gather_arm_window(win, cur, prior ? &*prior : nullptr, r, col, model.kernel());
        const auto dists = model.predict(win);
        for (int ch = 0; ch < c.channels; ++ch) {
          const FrequencyTable ft = quantize_freqs(dists[static_cast<std::size_t>(ch)]);
          const int v = dec.decode(ft);
          if (observer) observer(CodingEvent{{l, r, col, ch}, win, ft, v});
          cur.at(r, col, ch) = static_cast<std::uint8_t>(v);
        }
      }
  }
  dec.finish();
  return std::move(levels[0]);
}

template <PixelModel Model>
Image decode_bytes(std::span<const std::uint8_t> bytes, const Model& model) {
  return decode_image(parse_container(bytes), model);
}

template <PixelModel Model>
TheoreticalReport theoretical_report(const Image& img, const Model& model, int levels = kDefaultLevels) {
  TheoreticalReport rep;
  rep.levels.resize(static_cast<std::size_t>(levels) + 1);
  for (int l = 0; l <= levels; ++l) rep.levels[static_cast<std::size_t>(l)].level = l;
  simulate_coding(img, model, levels, /*reverse=*/false,
                  [&](const CodingPosition& pos, const ContextWindow&, const SymbolDistribution& d, int v) {
                    rep.levels[static_cast<std::size_t>(pos.level)].bits += theoretical_bits(d, v);
                  });
  const double px = static_cast<double>(img.pixel_count());
  for (auto& lb : rep.levels) {
    lb.bpp = lb.bits / px;
    rep.total_bits += lb.bits;
  }
  rep.total_bpp = rep.total_bits / px;
  return rep;
}

/// Payload-only and whole-container bits per level-0 pixel.
inline double payload_bpp(const Container& c) {
  return 8.0 * static_cast<double>(c.payload.size()) / (static_cast<double>(c.height) * c.width);
}
inline double container_bpp(const Container& c) {
  return 8.0 * static_cast<double>(c.payload.size() + kContainerOverheadBytes) /
         (static_cast<double>(c.height) * c.width);
}

}  // namespace gicdlc
