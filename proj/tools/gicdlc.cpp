// gicdlc: command-line front end for the codec.
//
// Exit codes:
//   0  success
//   1  usage error
//   2  I/O error (missing/unreadable/unwritable file)
//   3  format error (bad magic, unsupported version, malformed input)
//   4  model mismatch (container coded with other models, incompatible model, corrupted model file)
//   5  corrupt stream (container checksum failure or undecodable payload)
//   6  other failure

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include "gicdlc/gicdlc.hpp"

namespace fs = std::filesystem;
using namespace gicdlc;

namespace {

enum Exit { kOk = 0, kUsage = 1, kIo = 2, kFormat = 3, kModel = 4, kCorrupt = 5, kOther = 6 };

int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::io: return kIo;
    case ErrorKind::format:
    case ErrorKind::bad_magic:
    case ErrorKind::unsupported_version: return kFormat;
    case ErrorKind::hash_mismatch:
    case ErrorKind::model_mismatch: return kModel;
    case ErrorKind::checksum:
    case ErrorKind::corrupt_stream: return kCorrupt;
    case ErrorKind::invalid_argument: return kUsage;
  }
  return kOther;
}

/// Relative model paths that do not exist fall back to $GICDLC_MODEL_DIR.
std::string resolve_model(const std::string& given, const char* default_name) {
  const char* root = std::getenv("GICDLC_MODEL_DIR");
  if (given.empty()) {
    if (!root) fail(ErrorKind::invalid_argument, std::string("no --") + (default_name[0] == 'u' ? "ups" : "arm") +
                                                     " model given and GICDLC_MODEL_DIR is unset");
    return (fs::path(root) / default_name).string();
  }
  fs::path p(given);
  if (root && p.is_relative() && !fs::exists(p)) return (fs::path(root) / p).string();
  return given;
}

struct Models {
  HardLutNetwork ups;
  HardLutNetwork arm;
};

Models load_models(const std::string& ups_path, const std::string& arm_path) {
  return {load_model_file(resolve_model(ups_path, "ups.glc")), load_model_file(resolve_model(arm_path, "arm.glc"))};
}

/// PGM, or an IDX file (optionally gzipped) with an image index.
Image read_image(const std::string& path, std::size_t index) {
  const Bytes raw = read_file(path);
  if (raw.size() >= 2 && raw[0] == 'P' && raw[1] == '5') return decode_pgm(raw);
  const Dataset ds = load_idx(raw, path);
  if (index >= ds.images.size())
    fail(ErrorKind::invalid_argument, "image index " + std::to_string(index) + " out of range (dataset has " +
                                          std::to_string(ds.images.size()) + ")");
  return ds.images[index];
}

void print_header(const Container& c, std::size_t file_size) {
  std::printf("magic: GICD\nversion: %u\nheight: %d\nwidth: %d\nchannels: %d\nlevels: %d\nkernel: %d\n",
              c.version, c.height, c.width, c.channels, c.levels, c.kernel);
  std::printf("ups_hash: %s\narm_hash: %s\n", to_hex(c.ups_hash).c_str(), to_hex(c.arm_hash).c_str());
  std::printf("payload_bytes: %zu\nfile_bytes: %zu\npayload_bpp: %.6f\ncontainer_bpp: %.6f\n", c.payload.size(),
              file_size, payload_bpp(c), container_bpp(c));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GIC-DLC lossless grayscale image codec"};
  app.require_subcommand(1);

  std::string in, out, ups_path, arm_path, labels_path, baselines_path;
  int levels = kDefaultLevels;
  std::size_t index = 0;
  bool report_theoretical = false;

  auto* enc = app.add_subcommand("encode", "Encode a PGM or IDX image into a GICD container");
  enc->add_option("input", in, "input image (PGM P5, or IDX with --index)")->required();
  enc->add_option("-o,--output", out, "output container")->required();
  enc->add_option("--ups", ups_path, "UPS model (default $GICDLC_MODEL_DIR/ups.glc)");
  enc->add_option("--arm", arm_path, "ARM model (default $GICDLC_MODEL_DIR/arm.glc)");
  enc->add_option("--levels", levels, "pyramid levels L")->check(CLI::Range(0, 255));
  enc->add_option("--index", index, "image index when the input is an IDX dataset");
  enc->add_flag("--report-theoretical", report_theoretical, "print theoretical bpp to stderr");

  auto* dec = app.add_subcommand("decode", "Decode a GICD container to PGM");
  dec->add_option("input", in, "input container")->required();
  dec->add_option("-o,--output", out, "output PGM")->required();
  dec->add_option("--ups", ups_path, "UPS model");
  dec->add_option("--arm", arm_path, "ARM model");

  auto* ins = app.add_subcommand("inspect", "Print container header fields");
  ins->add_option("input", in, "input container")->required();

  ReportOptions ropt;
  bool no_verify = false, payload_only = false;
  std::size_t limit = 0;
  auto* ev = app.add_subcommand("eval", "Report bpp over an IDX dataset");
  ev->add_option("dataset", in, "IDX images (optionally gzipped)")->required();
  ev->add_option("--labels", labels_path, "IDX labels for the digits/letters split");
  ev->add_option("--ups", ups_path, "UPS model");
  ev->add_option("--arm", arm_path, "ARM model");
  ev->add_option("--levels", ropt.levels, "pyramid levels L")->check(CLI::Range(0, 255));
  ev->add_option("--threads", ropt.threads, "worker threads");
  ev->add_option("--limit", limit, "only the first N images (0 = all)");
  ev->add_option("--baselines", baselines_path, "baseline rows file: <codec> <split> <bpp> per line");
  ev->add_flag("--no-verify", no_verify, "skip the decode check");
  ev->add_flag("--payload-only-bpp", payload_only, "emit payload-only bpp records only (no table)");

  int eh = 28, ew = 28, elevels = kDefaultLevels;
  EnergyModel em;
  std::vector<int> positional;
  auto* en = app.add_subcommand("energy", "Analytical energy per pixel");
  en->add_option("dims", positional, "H W [L]")->expected(0, 3);
  en->add_option("--height", eh, "height");
  en->add_option("--width", ew, "width");
  en->add_option("--levels", elevels, "pyramid levels L");
  en->add_option("--e-lut", em.e_lut_inference, "nJ per network run");
  en->add_option("--e-ans", em.e_ans_op, "nJ per ANS integer op");
  en->add_option("--ans-ops", em.ans_ops_per_symbol, "integer ops per coded symbol");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*enc) {
      const Image img = read_image(in, index);
      const Models m = load_models(ups_path, arm_path);
      const LutModel model(m.ups, m.arm);
      const Container c = encode_image(img, model, levels);
      write_file(out, serialize_container(c));
      if (report_theoretical) {
        const auto th = theoretical_report(img, model, levels);
        std::fprintf(stderr, "theoretical_bpp=%.6f", th.total_bpp);
        for (const auto& lb : th.levels) std::fprintf(stderr, " level%d=%.6f", lb.level, lb.bpp);
        std::fprintf(stderr, " payload_bpp=%.6f\n", payload_bpp(c));
      }
    } else if (*dec) {
      const Container c = parse_container(read_file(in));
      const Models m = load_models(ups_path, arm_path);
      const Image img = decode_image(c, LutModel(m.ups, m.arm));
      write_file(out, encode_pgm(img));
    } else if (*ins) {
      const Bytes raw = read_file(in);
      print_header(parse_container(raw), raw.size());
    } else if (*ev) {
      Dataset ds = load_idx(read_file(in), fs::path(in).filename().string());
      if (!labels_path.empty()) ds.labels = load_idx_labels(read_file(labels_path));
      if (limit && limit < ds.images.size()) ds.images.resize(limit);
      const Models m = load_models(ups_path, arm_path);
      ropt.verify_roundtrip = !no_verify;
      BppReport rep = bpp_report(ds, LutModel(m.ups, m.arm), ropt);
      if (!baselines_path.empty()) {
        const Bytes b = read_file(baselines_path);
        rep.baselines = parse_baselines(std::string(b.begin(), b.end()));
      }
      if (payload_only) {
        for (const auto& sp : rep.splits)
          std::printf("record dataset=%s split=%s images=%zu mean_bpp=%.6f median_bpp=%.6f\n", rep.dataset.c_str(),
                      sp.split.c_str(), sp.images, sp.mean_payload_bpp, sp.median_payload_bpp);
      } else {
        std::fputs(format_report(rep).c_str(), stdout);
      }
      for (const auto& sp : rep.splits)
        if (sp.roundtrip_failures) {
          std::fprintf(stderr, "error: %zu image(s) failed the roundtrip check\n", sp.roundtrip_failures);
          return kOther;
        }
    } else if (*en) {
      if (positional.size() >= 1) eh = positional[0];
      if (positional.size() >= 2) ew = positional[1];
      if (positional.size() >= 3) elevels = positional[2];
      const auto e = energy_estimate(eh, ew, elevels, em);
      std::printf("runs_per_pixel=%.6f\nsymbols_per_pixel=%.6f\nlut_nj_per_pixel=%.6f\nans_nj_per_pixel=%.6f\n"
                  "nj_per_pixel=%.6f\n",
                  e.runs_per_pixel, e.symbols_per_pixel, e.lut_nj_per_pixel, e.ans_nj_per_pixel, e.nj_per_pixel);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "gicdlc: %s\n", e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "gicdlc: %s\n", e.what());
    return kOther;
  }
  return kOk;
}
