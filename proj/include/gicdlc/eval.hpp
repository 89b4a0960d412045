#pragma once

// Dataset ingestion (IDX), benchmark reporting, the bicubic baseline and the
// analytical energy model.

#include <zlib.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gicdlc/bytes.hpp"
#include "gicdlc/codec.hpp"
#include "gicdlc/errors.hpp"
#include "gicdlc/image.hpp"
#include "gicdlc/pyramid.hpp"

namespace gicdlc {

struct Dataset {
  std::string name;
  std::vector<Image> images;
  std::vector<std::uint8_t> labels;  // optional; empty when unknown
  std::string digest;                // hex SHA-256 of the (decompressed) image file
};

// ---- IDX ----

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

inline bool is_gzip(std::span<const std::uint8_t> b) { return b.size() >= 2 && b[0] == 0x1f && b[1] == 0x8b; }

inline Bytes gunzip(std::span<const std::uint8_t> in) {
  z_stream zs{};
  if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK) fail(ErrorKind::io, "inflateInit2 failed");
  Bytes out;
  std::uint8_t chunk[1 << 16];
  zs.next_in = const_cast<Bytef*>(in.data());
  zs.avail_in = static_cast<uInt>(in.size());
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    zs.next_out = chunk;
    zs.avail_out = sizeof chunk;
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      fail(ErrorKind::format, "gzip stream is corrupt or truncated");
    }
    out.insert(out.end(), chunk, chunk + (sizeof chunk - zs.avail_out));
    if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
      inflateEnd(&zs);
      fail(ErrorKind::format, "gzip stream is truncated");
    }
  }
  inflateEnd(&zs);
  return out;
}

namespace detail {

inline std::uint32_t be32(std::span<const std::uint8_t> b, std::size_t at) {
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) | (std::uint32_t{b[at + 2]} << 8) | b[at + 3];
}

inline void put_be32(Bytes& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

/// Validates the IDX magic and returns the dimension list.
inline std::vector<std::uint32_t> idx_header(std::span<const std::uint8_t> b, std::uint32_t expect_magic) {
  if (b.size() < 4) fail(ErrorKind::format, "IDX truncated before magic");
  if (b[0] != 0 || b[1] != 0) fail(ErrorKind::bad_magic, "not an IDX file");
  if (b[2] != 0x08) fail(ErrorKind::format, "unsupported IDX dtype 0x" + to_hex(b.subspan(2, 1)) + " (need ubyte)");
  if (be32(b, 0) != expect_magic) fail(ErrorKind::bad_magic, "unexpected IDX dimensionality");
  const std::size_t ndims = b[3];
  if (b.size() < 4 + 4 * ndims) fail(ErrorKind::format, "IDX truncated in header");
  std::vector<std::uint32_t> dims(ndims);
  for (std::size_t i = 0; i < ndims; ++i) dims[i] = be32(b, 4 + 4 * i);
  return dims;
}

}  // namespace detail

/// IDX3 ubyte images (optionally gzipped); pixel values are copied verbatim.
inline Dataset load_idx(std::span<const std::uint8_t> raw, std::string name = "idx") {
  Bytes unz;
  if (is_gzip(raw)) {
    unz = gunzip(raw);
    raw = unz;
  }
  const auto dims = detail::idx_header(raw, kIdxImagesMagic);
  const std::uint64_t n = dims[0], h = dims[1], w = dims[2];
  if (h == 0 || w == 0 || h > kMaxDim || w > kMaxDim) fail(ErrorKind::format, "IDX image dims out of range");
  const std::size_t header = 16;
  if ((raw.size() - header) / (h * w) < n) fail(ErrorKind::format, "IDX payload truncated");
  Dataset ds;
  ds.name = std::move(name);
  ds.digest = to_hex(sha256(raw));
  ds.images.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    Image img(static_cast<int>(h), static_cast<int>(w), 1);
    const auto* src = raw.data() + header + i * h * w;
    std::copy(src, src + h * w, img.data.begin());
    ds.images.push_back(std::move(img));
  }
  return ds;
}

inline std::vector<std::uint8_t> load_idx_labels(std::span<const std::uint8_t> raw) {
  Bytes unz;
  if (is_gzip(raw)) {
    unz = gunzip(raw);
    raw = unz;
  }
  const auto dims = detail::idx_header(raw, kIdxLabelsMagic);
  if (raw.size() - 8 < dims[0]) fail(ErrorKind::format, "IDX label payload truncated");
  return {raw.begin() + 8, raw.begin() + 8 + dims[0]};
}

inline Bytes write_idx(const std::vector<Image>& images) {
  if (images.empty()) fail(ErrorKind::invalid_argument, "no images");
  const int h = images[0].height, w = images[0].width;
  Bytes out;
  detail::put_be32(out, kIdxImagesMagic);
  detail::put_be32(out, static_cast<std::uint32_t>(images.size()));
  detail::put_be32(out, static_cast<std::uint32_t>(h));
  detail::put_be32(out, static_cast<std::uint32_t>(w));
  for (const auto& img : images) {
    if (img.height != h || img.width != w || img.channels != 1)
      fail(ErrorKind::invalid_argument, "IDX images must share dims and be single-channel");
    out.insert(out.end(), img.data.begin(), img.data.end());
  }
  return out;
}

inline Bytes write_idx_labels(const std::vector<std::uint8_t>& labels) {
  Bytes out;
  detail::put_be32(out, kIdxLabelsMagic);
  detail::put_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.insert(out.end(), labels.begin(), labels.end());
  return out;
}

// ---- bicubic baseline ----

namespace detail {

/// Catmull-Rom cubic convolution weight (a = -0.5).
inline double cubic_weight(double x) {
  constexpr double a = -0.5;
  x = std::fabs(x);
  if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
  return 0.0;
}

}  // namespace detail

/// 2x bicubic upsampling with half-pixel centers, edge replication, and
/// output clamped to [0, 255]. Output dims default to 2H x 2W.
inline RealImage bicubic_upsample(const Image& low, int out_h = -1, int out_w = -1) {
  if (out_h < 0) out_h = 2 * low.height;
  if (out_w < 0) out_w = 2 * low.width;
  RealImage out(out_h, out_w, low.channels);
  auto taps = [](int o, int n, std::array<int, 4>& idx, std::array<double, 4>& wt) {
    const double src = (o + 0.5) / 2.0 - 0.5;
    const int base = static_cast<int>(std::floor(src));
    for (int t = 0; t < 4; ++t) {
      const int p = base - 1 + t;
      idx[static_cast<std::size_t>(t)] = std::clamp(p, 0, n - 1);
      wt[static_cast<std::size_t>(t)] = detail::cubic_weight(src - p);
    }
  };
  std::array<int, 4> ri{}, ci{};
  std::array<double, 4> rw{}, cw{};
  for (int r = 0; r < out_h; ++r) {
    taps(r, low.height, ri, rw);
    for (int c = 0; c < out_w; ++c) {
      taps(c, low.width, ci, cw);
      for (int ch = 0; ch < low.channels; ++ch) {
        double acc = 0.0;
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b)
            acc += rw[static_cast<std::size_t>(a)] * cw[static_cast<std::size_t>(b)] *
                   low.at(ri[static_cast<std::size_t>(a)], ci[static_cast<std::size_t>(b)], ch);
        out.at(r, c, ch) = std::clamp(acc, 0.0, 255.0);
      }
    }
  }
  return out;
}

/// Sum of squared differences and element count, for pooling RMSE over many images.
struct SquaredError {
  double sum = 0.0;
  std::size_t count = 0;
  double rmse() const { return count ? std::sqrt(sum / static_cast<double>(count)) : 0.0; }
};

inline SquaredError squared_error(const RealImage& a, const Image& b) {
  if (a.height != b.height || a.width != b.width || a.channels != b.channels)
    fail(ErrorKind::invalid_argument, "rmse: dimension mismatch");
  SquaredError e;
  for (std::size_t i = 0; i < b.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    e.sum += d * d;
  }
  e.count = b.data.size();
  return e;
}

inline double rmse(const RealImage& a, const Image& b) { return squared_error(a, b).rmse(); }

inline double rmse(const RealImage& a, const RealImage& b) {
  if (a.height != b.height || a.width != b.width || a.channels != b.channels)
    fail(ErrorKind::invalid_argument, "rmse: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) s += (a.data[i] - b.data[i]) * (a.data[i] - b.data[i]);
  return a.data.empty() ? 0.0 : std::sqrt(s / static_cast<double>(a.data.size()));
}

inline RealImage to_real(const Image& img) {
  RealImage r(img.height, img.width, img.channels);
  std::copy(img.data.begin(), img.data.end(), r.data.begin());
  return r;
}

// ---- energy ----

struct EnergyModel {
  double e_lut_inference = 2.5;  // nJ per network run
  double e_ans_op = 0.1;         // nJ per integer op
  double ans_ops_per_symbol = 8;
};

struct EnergyEstimate {
  double runs_per_pixel = 0;
  double symbols_per_pixel = 0;
  double lut_nj_per_pixel = 0;
  double ans_nj_per_pixel = 0;
  double nj_per_pixel = 0;
};

/// Level 0 runs the ARM once per pixel; every coarser level runs UPS and ARM.
inline EnergyEstimate energy_estimate(int height, int width, int levels, const EnergyModel& m = {}) {
  if (height < 1 || width < 1 || levels < 0) fail(ErrorKind::invalid_argument, "energy: invalid dimensions");
  if (m.e_lut_inference < 0 || m.e_ans_op < 0 || m.ans_ops_per_symbol < 0)
    fail(ErrorKind::invalid_argument, "energy model parameters must be nonnegative");
  std::uint64_t runs = 0, symbols = 0;
  for (int l = 0; l <= levels; ++l) {
    const auto [h, w] = level_dims(height, width, l);
    const std::uint64_t n = static_cast<std::uint64_t>(h) * static_cast<std::uint64_t>(w);
    runs += (l == 0 ? 1 : 2) * n;
    symbols += n;
  }
  const double px = static_cast<double>(height) * width;
  EnergyEstimate e;
  e.runs_per_pixel = static_cast<double>(runs) / px;
  e.symbols_per_pixel = static_cast<double>(symbols) / px;
  e.lut_nj_per_pixel = e.runs_per_pixel * m.e_lut_inference;
  e.ans_nj_per_pixel = e.symbols_per_pixel * m.ans_ops_per_symbol * m.e_ans_op;
  e.nj_per_pixel = e.lut_nj_per_pixel + e.ans_nj_per_pixel;
  return e;
}

// ---- bpp report ----

struct ImageResult {
  double payload_bpp = 0;
  double container_bpp = 0;
  std::vector<double> level_bpp;  // theoretical, per level 0..L
  double theoretical_bpp = 0;
  bool roundtrip_ok = true;
};

struct SplitSummary {
  std::string split;  // "all", "digits", "letters"
  std::size_t images = 0;
  double mean_payload_bpp = 0;
  double median_payload_bpp = 0;
  double mean_container_bpp = 0;
  double mean_theoretical_bpp = 0;
  std::vector<double> mean_level_bpp;
  std::size_t roundtrip_failures = 0;
};

struct RmseSummary {
  int target_level = 0;  // predicted from target_level + 1
  double ups_rmse = 0;
  double bicubic_rmse = 0;
};

struct BaselineRow {
  std::string codec;
  std::string split;
  double bpp = 0;
};

struct BppReport {
  std::string dataset;
  std::string digest;
  int levels = 0;
  std::vector<SplitSummary> splits;
  std::vector<RmseSummary> rmse;
  std::vector<BaselineRow> baselines;
};

struct ReportOptions {
  int levels = kDefaultLevels;
  bool verify_roundtrip = true;
  unsigned threads = 1;
  bool per_class = true;  // needs labels
};

namespace detail {

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) fn(i);
    });
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

inline SplitSummary summarize(const std::string& name, const std::vector<const ImageResult*>& rs, int levels) {
  SplitSummary s;
  s.split = name;
  s.images = rs.size();
  s.mean_level_bpp.assign(static_cast<std::size_t>(levels) + 1, 0.0);
  std::vector<double> payload;
  for (const auto* r : rs) {
    payload.push_back(r->payload_bpp);
    s.mean_payload_bpp += r->payload_bpp;
    s.mean_container_bpp += r->container_bpp;
    s.mean_theoretical_bpp += r->theoretical_bpp;
    for (std::size_t l = 0; l < r->level_bpp.size(); ++l) s.mean_level_bpp[l] += r->level_bpp[l];
    if (!r->roundtrip_ok) ++s.roundtrip_failures;
  }
  if (!rs.empty()) {
    const double n = static_cast<double>(rs.size());
    s.mean_payload_bpp /= n;
    s.mean_container_bpp /= n;
    s.mean_theoretical_bpp /= n;
    for (auto& v : s.mean_level_bpp) v /= n;
  }
  s.median_payload_bpp = median(std::move(payload));
  return s;
}

}  // namespace detail

template <PixelModel Model>
ImageResult evaluate_image(const Image& img, const Model& model, int levels, bool verify) {
  ImageResult r;
  const Container c = encode_image(img, model, levels);
  r.payload_bpp = payload_bpp(c);
  r.container_bpp = container_bpp(c);
  const auto th = theoretical_report(img, model, levels);
  for (const auto& lb : th.levels) r.level_bpp.push_back(lb.bpp);
  r.theoretical_bpp = th.total_bpp;
  if (verify) r.roundtrip_ok = decode_bytes(serialize_container(c), model) == img;
  return r;
}

/// Global RMSE of predicting `target_level` from `target_level + 1`, for UPS and bicubic.
template <PixelModel Model>
RmseSummary upsampling_rmse(const Dataset& ds, const Model& model, int target_level) {
  SquaredError ups, bic;
  for (const auto& img : ds.images) {
    const Pyramid p = decompose(img, target_level + 1);
    const Image& truth = p[target_level];
    const Image& low = p[target_level + 1];
    const auto e1 = squared_error(model.upsample(low, truth.height, truth.width), truth);
    const auto e2 = squared_error(bicubic_upsample(low, truth.height, truth.width), truth);
    ups.sum += e1.sum;
    ups.count += e1.count;
    bic.sum += e2.sum;
    bic.count += e2.count;
  }
  return {target_level, ups.rmse(), bic.rmse()};
}

template <PixelModel Model>
BppReport bpp_report(const Dataset& ds, const Model& model, const ReportOptions& opt = {}) {
  BppReport rep;
  rep.dataset = ds.name;
  rep.digest = ds.digest;
  rep.levels = opt.levels;
  std::vector<ImageResult> results(ds.images.size());
  detail::parallel_for(ds.images.size(), opt.threads, [&](std::size_t i) {
    results[i] = evaluate_image(ds.images[i], model, opt.levels, opt.verify_roundtrip);
  });

  std::vector<const ImageResult*> all, digits, letters;
  for (std::size_t i = 0; i < results.size(); ++i) {
    all.push_back(&results[i]);
    if (opt.per_class && i < ds.labels.size()) (ds.labels[i] <= 9 ? digits : letters).push_back(&results[i]);
  }
  rep.splits.push_back(detail::summarize("all", all, opt.levels));
  if (!digits.empty()) rep.splits.push_back(detail::summarize("digits", digits, opt.levels));
  if (!letters.empty()) rep.splits.push_back(detail::summarize("letters", letters, opt.levels));

  for (int l = 0; l < opt.levels; ++l) {
    bool feasible = !ds.images.empty();
    for (const auto& img : ds.images) {
      const auto [h, w] = level_dims(img.height, img.width, l);
      if (h == 1 && w == 1) feasible = false;
    }
    if (feasible) rep.rmse.push_back(upsampling_rmse(ds, model, l));
  }
  return rep;
}

/// Baseline rows, one per line: `<codec> <split> <bpp>`; '#' starts a comment.
inline std::vector<BaselineRow> parse_baselines(const std::string& text) {
  std::vector<BaselineRow> rows;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    BaselineRow row;
    if (!(ls >> row.codec)) continue;
    if (!(ls >> row.split >> row.bpp)) fail(ErrorKind::format, "baseline line " + std::to_string(lineno) + " malformed");
    rows.push_back(row);
  }
  return rows;
}

/// Machine-readable records (one per line), then an aligned table.
inline std::string format_report(const BppReport& rep) {
  std::string s;
  char buf[256];
  auto add = [&](const char* fmt, auto... args) {
    std::snprintf(buf, sizeof buf, fmt, args...);
    s += buf;
  };
  for (const auto& sp : rep.splits) {
    add("record dataset=%s split=%s images=%zu mean_bpp=%.6f median_bpp=%.6f mean_container_bpp=%.6f "
        "theoretical_bpp=%.6f roundtrip_failures=%zu",
        rep.dataset.c_str(), sp.split.c_str(), sp.images, sp.mean_payload_bpp, sp.median_payload_bpp,
        sp.mean_container_bpp, sp.mean_theoretical_bpp, sp.roundtrip_failures);
    for (std::size_t l = 0; l < sp.mean_level_bpp.size(); ++l) add(" level%zu_bpp=%.6f", l, sp.mean_level_bpp[l]);
    s += "\n";
  }
  for (const auto& r : rep.rmse)
    add("record dataset=%s rmse_level=%d ups_rmse=%.6f bicubic_rmse=%.6f convention=global\n", rep.dataset.c_str(),
        r.target_level, r.ups_rmse, r.bicubic_rmse);

  s += "\n";
  add("dataset %s (sha256 %s), levels=%d, bpp = bits per level-0 pixel\n", rep.dataset.c_str(), rep.digest.c_str(),
      rep.levels);
  add("%-12s %-8s %7s %10s %10s %10s %10s\n", "codec", "split", "images", "mean_bpp", "median", "container",
      "theory");
  for (const auto& sp : rep.splits)
    add("%-12s %-8s %7zu %10.4f %10.4f %10.4f %10.4f\n", "GIC-DLC", sp.split.c_str(), sp.images, sp.mean_payload_bpp,
        sp.median_payload_bpp, sp.mean_container_bpp, sp.mean_theoretical_bpp);
  for (const auto& b : rep.baselines)
    add("%-12s %-8s %7s %10.4f %10s %10s %10s\n", b.codec.c_str(), b.split.c_str(), "-", b.bpp, "-", "-", "-");
  if (!rep.splits.empty()) {
    s += "theoretical bpp by level (all):";
    for (std::size_t l = 0; l < rep.splits[0].mean_level_bpp.size(); ++l)
      add(" L%zu=%.4f", l, rep.splits[0].mean_level_bpp[l]);
    s += "\n";
  }
  for (const auto& r : rep.rmse)
    add("upsampling RMSE level %d<-%d: UPS %.4f  bicubic %.4f (global over pixels)\n", r.target_level,
        r.target_level + 1, r.ups_rmse, r.bicubic_rmse);
  return s;
}

}  // namespace gicdlc
