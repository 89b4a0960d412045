#include <gtest/gtest.h>

#include <optional>

#include "gicdlc/binarize.hpp"
#include "support/synthetic.hpp"

using namespace gicdlc;

namespace {

// Bit-by-bit reference: decode each bit index into (window row, window col,
// channel, threshold), resolve the source pixel by clamping, and apply the
// decoded/prior/zero rule directly.
BitVector reference_arm_bits(const Image& truth, const RealImage* est, int row, int col, int k) {
  const int C = truth.channels;
  BitVector bv(static_cast<std::size_t>(k) * k * C * 255);
  for (std::size_t idx = 0; idx < bv.size(); ++idx) {
    const int threshold = static_cast<int>(idx % 255);
    const int ch = static_cast<int>((idx / 255) % C);
    const int pos = static_cast<int>(idx / 255 / C);
    const int r = std::clamp(row + pos / k - k / 2, 0, truth.height - 1);
    const int c = std::clamp(col + pos % k - k / 2, 0, truth.width - 1);
    const bool decoded = r < row || (r == row && c < col);
    int v = 0;
    if (decoded) v = truth.at(r, c, ch);
    else if (est) v = static_cast<int>(std::clamp(std::floor(est->at(r, c, ch) + 0.5), 0.0, 255.0));
    bv.set(idx, v > threshold);
  }
  return bv;
}

// The "partial" image a decoder would hold: decoded pixels before (row, col), garbage after.
Image partial_of(const Image& truth, int row, int col, synth::Rng& rng) {
  Image p = truth;
  for (int r = 0; r < p.height; ++r)
    for (int c = 0; c < p.width; ++c)
      if (r > row || (r == row && c >= col))
        for (int ch = 0; ch < p.channels; ++ch) p.at(r, c, ch) = static_cast<std::uint8_t>(rng.below(256));
  return p;
}

}  // namespace

TEST(Thermometer, Endpoints) {
  EXPECT_EQ(thermometer(0), BitVector(255, false));
  EXPECT_EQ(thermometer(255), BitVector(255, true));
  const BitVector one = thermometer(1);
  EXPECT_TRUE(one.bit(0));
  for (std::size_t i = 1; i < 255; ++i) EXPECT_FALSE(one.bit(i));
}

TEST(Thermometer, RejectsOutOfRange) {
  EXPECT_THROW(thermometer(-1), Error);
  EXPECT_THROW(thermometer(256), Error);
}

TEST(Thermometer, PopcountAndMonotonicity) {
  for (int v = 0; v <= 255; ++v) {
    const BitVector a = thermometer(v);
    ASSERT_EQ(a.popcount(), static_cast<std::size_t>(v));
    if (v < 255) {
      const BitVector b = thermometer(v + 1);
      for (std::size_t i = 0; i < 255; ++i) ASSERT_LE(a.bit(i), b.bit(i));
    }
  }
}

TEST(UpsContext, ConstantImages) {
  const ContextSpec spec{5, 1, NetRole::ups};
  const BitVector zeros = assemble_ups_context(Image(6, 4, 1, 0), 2, 3, spec);
  EXPECT_EQ(zeros.size(), 6375u);
  EXPECT_EQ(zeros.popcount(), 0u);
  EXPECT_EQ(assemble_ups_context(Image(6, 4, 1, 255), 0, 0, spec), BitVector(6375, true));
}

TEST(UpsContext, SinglePixelReplicates) {
  const BitVector bv = assemble_ups_context(Image(1, 1, 1, 7), 0, 0, {3, 1, NetRole::ups});
  ASSERT_EQ(bv.size(), 9u * 255u);
  const BitVector code = thermometer(7);
  for (std::size_t pos = 0; pos < 9; ++pos)
    for (std::size_t t = 0; t < 255; ++t) ASSERT_EQ(bv.bit(pos * 255 + t), code.bit(t));
}

TEST(UpsContext, LayoutIsPositionThenChannelThenThreshold) {
  Image img(3, 3, 2);
  img.at(0, 0, 1) = 10;  // window position 0, channel 1
  img.at(1, 2, 0) = 3;   // window position 5, channel 0
  const BitVector bv = assemble_ups_context(img, 1, 1, {3, 2, NetRole::ups});
  ASSERT_EQ(bv.size(), 9u * 2u * 255u);
  EXPECT_EQ(bv.popcount(), 13u);
  EXPECT_TRUE(bv.bit((0 * 2 + 1) * 255 + 9));
  EXPECT_FALSE(bv.bit((0 * 2 + 1) * 255 + 10));
  EXPECT_TRUE(bv.bit((5 * 2 + 0) * 255 + 2));
}

TEST(UpsContext, RejectsWrongSpec) {
  EXPECT_THROW(assemble_ups_context(Image(3, 3), 0, 0, {4, 1, NetRole::ups}), Error);
  EXPECT_THROW(assemble_ups_context(Image(3, 3), 0, 0, {3, 1, NetRole::arm}), Error);
  EXPECT_THROW(assemble_ups_context(Image(3, 3), 0, 0, {3, 2, NetRole::ups}), Error);
}

TEST(ArmContext, EmptyInitializationAtOrigin) {
  synth::Rng rng(3);
  const Image garbage = synth::noise_image(7, 7, rng);
  const BitVector bv = assemble_arm_context(garbage, std::nullopt, 0, 0, {5, 1, NetRole::arm});
  EXPECT_EQ(bv.popcount(), 0u);
}

TEST(ArmContext, FullyDecodedWhiteWindow) {
  // Bottom-right pixel of an all-255 image: every window position except the
  // pixel itself (and its replicas) is decoded; the prior supplies 255 there.
  const Image img(4, 4, 1, 255);
  RealImage est(4, 4);
  for (auto& v : est.data) v = 254.6;
  const BitVector bv = assemble_arm_context(img, est, 3, 3, {5, 1, NetRole::arm});
  EXPECT_EQ(bv, BitVector(bv.size(), true));
}

TEST(ArmContext, MatchesBruteForceReference) {
  synth::Rng rng(11);
  for (int t = 0; t < 60; ++t) {
    const int C = rng.range(1, 2), K = 2 * rng.range(0, 3) + 1;
    const Image truth = synth::noise_image(rng.range(1, 9), rng.range(1, 9), rng, C);
    RealImage est(truth.height, truth.width, C);
    for (auto& v : est.data) v = rng.unit() * 280.0 - 12.0;  // exercises clamping
    const bool with_prior = rng.below(2) == 1;
    const int row = rng.range(0, truth.height - 1), col = rng.range(0, truth.width - 1);
    const Image partial = partial_of(truth, row, col, rng);
    const std::optional<RealImage> prior = with_prior ? std::optional<RealImage>(est) : std::nullopt;
    const BitVector got = assemble_arm_context(partial, prior, row, col, {K, C, NetRole::arm});
    ASSERT_EQ(got, reference_arm_bits(truth, with_prior ? &est : nullptr, row, col, K)) << "trial " << t;
  }
}

TEST(ArmContext, IndependentOfUndecodedPixels) {
  // Encoder sees ground truth, decoder sees garbage after the cursor; the
  // assembled contexts must agree everywhere.
  synth::Rng rng(5);
  const Image truth = synth::noise_image(9, 11, rng);
  RealImage est(9, 11);
  for (auto& v : est.data) v = rng.unit() * 255.0;
  for (int r = 0; r < truth.height; ++r)
    for (int c = 0; c < truth.width; ++c) {
      const BitVector enc = assemble_arm_context(truth, est, r, c, {5, 1, NetRole::arm});
      const BitVector dec = assemble_arm_context(partial_of(truth, r, c, rng), est, r, c, {5, 1, NetRole::arm});
      ASSERT_EQ(enc, dec);
    }
}

TEST(ContextWindow, LazyBitsMatchMaterialized) {
  synth::Rng rng(8);
  const Image img = synth::noise_image(5, 5, rng);
  ContextWindow w;
  gather_ups_window(w, img, 2, 2, 3);
  const BitVector bv = w.to_bits();
  ASSERT_EQ(bv.size(), w.size());
  for (std::size_t i = 0; i < bv.size(); ++i) ASSERT_EQ(bv.bit(i), w.bit(i));
}

TEST(RoundEstimate, HalfUpAndClamp) {
  EXPECT_EQ(round_estimate(2.5), 3);
  EXPECT_EQ(round_estimate(2.4999), 2);
  EXPECT_EQ(round_estimate(-3.0), 0);
  EXPECT_EQ(round_estimate(300.0), 255);
  EXPECT_EQ(round_estimate(254.5), 255);
}
