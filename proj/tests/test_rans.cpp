#include <gtest/gtest.h>

#include <cmath>

#include "gicdlc/rans.hpp"
#include "support/synthetic.hpp"

using namespace gicdlc;

namespace {

FrequencyTable random_table(synth::Rng& rng) {
  SymbolDistribution d;
  double s = 0.0;
  const double skew = 1.0 + rng.unit() * 6.0;
  for (auto& p : d.probs) {
    p = std::pow(rng.unit(), skew) + 1e-9;
    s += p;
  }
  for (auto& p : d.probs) p /= s;
  return quantize_freqs(d);
}

FrequencyTable uniform_table() {
  FrequencyTable ft;
  ft.freq.fill(kFreqTotal / 256);
  ft.rebuild_cum();
  return ft;
}

}  // namespace

TEST(RansStep, HandExample) {
  // x = 10, F = 8, freq = 2, C = 4: q = 5, r = 0, x' = 5*8 + 4 + 0.
  EXPECT_EQ(rans_step_encode(10, 2, 4, 8), 44u);
  // m = 44 mod 8 = 4 selects the symbol with C = 4; x = 2*5 + 4 - 4.
  EXPECT_EQ(44u % 8u, 4u);
  EXPECT_EQ(rans_step_decode(44, 2, 4, 8), 10u);
}

TEST(RansStep, InversePairOnRandomStates) {
  synth::Rng rng(1);
  const FrequencyTable ft = random_table(rng);
  for (int t = 0; t < 100000; ++t) {
    const int s = static_cast<int>(rng.below(256));
    const std::uint64_t x_max = ((kRansLow >> kFreqBits) << 8) * ft.freq[static_cast<std::size_t>(s)];
    const std::uint64_t x = 1 + ((std::uint64_t{rng.next()} << 8) | rng.below(256)) % (x_max - 1);
    const std::uint64_t y = rans_step_encode(x, ft.freq[static_cast<std::size_t>(s)], ft.cum[static_cast<std::size_t>(s)], kFreqTotal);
    ASSERT_EQ(find_symbol(ft, static_cast<std::uint32_t>(y % kFreqTotal)), s);
    ASSERT_EQ(rans_step_decode(y, ft.freq[static_cast<std::size_t>(s)], ft.cum[static_cast<std::size_t>(s)], kFreqTotal), x);
  }
}

TEST(Rans, EmptyStreamIsEightBytes) {
  const Bytes payload = RansEncoder{}.finish();
  ASSERT_EQ(payload.size(), 8u);
  RansDecoder dec(payload);
  EXPECT_EQ(dec.state(), kRansLow);
  EXPECT_NO_THROW(dec.finish());
}

TEST(Rans, FlushAndInitRoundtripState) {
  synth::Rng rng(2);
  for (int t = 0; t < 200; ++t) {
    RansEncoder enc;
    const FrequencyTable ft = random_table(rng);
    const int n = rng.range(0, 50);
    for (int i = 0; i < n; ++i) enc.encode(find_symbol(ft, rng.below(kFreqTotal)), ft);
    const std::uint64_t state = enc.state();
    ASSERT_GE(state, kRansLow);
    ASSERT_LT(state, kRansLow << 8);
    const Bytes payload = std::move(enc).finish();
    EXPECT_EQ(payload[0], state & 0xff);  // low byte first in decoder order
    EXPECT_EQ(RansDecoder(payload).state(), state);
  }
}

TEST(Rans, RandomSymbolsNearOptimal) {
  synth::Rng rng(3);
  constexpr int kN = 100000;
  std::vector<FrequencyTable> tables;
  for (int i = 0; i < 64; ++i) tables.push_back(random_table(rng));
  std::vector<int> syms(kN), which(kN);
  double ideal_bits = 0.0;
  for (int i = 0; i < kN; ++i) {
    which[static_cast<std::size_t>(i)] = static_cast<int>(rng.below(64));
    const auto& ft = tables[static_cast<std::size_t>(which[static_cast<std::size_t>(i)])];
    syms[static_cast<std::size_t>(i)] = find_symbol(ft, rng.below(kFreqTotal));
    ideal_bits -= std::log2(static_cast<double>(ft.freq[static_cast<std::size_t>(syms[static_cast<std::size_t>(i)])]) / kFreqTotal);
  }
  RansEncoder enc;
  for (int i = kN - 1; i >= 0; --i)
    enc.encode(syms[static_cast<std::size_t>(i)], tables[static_cast<std::size_t>(which[static_cast<std::size_t>(i)])]);
  const Bytes payload = std::move(enc).finish();

  RansDecoder dec(payload);
  for (int i = 0; i < kN; ++i)
    ASSERT_EQ(dec.decode(tables[static_cast<std::size_t>(which[static_cast<std::size_t>(i)])]), syms[static_cast<std::size_t>(i)]) << i;
  EXPECT_NO_THROW(dec.finish());
  EXPECT_LE(8.0 * payload.size(), ideal_bits * 1.001 + 64.0);
}

TEST(Rans, UniformTableCostsEightBitsPerSymbol) {
  synth::Rng rng(4);
  const FrequencyTable ft = uniform_table();
  constexpr int kN = 20000;
  RansEncoder enc;
  for (int i = 0; i < kN; ++i) enc.encode(static_cast<int>(rng.below(256)), ft);
  const Bytes payload = std::move(enc).finish();
  const double bits_per_symbol = 8.0 * (payload.size() - 8) / kN;
  EXPECT_NEAR(bits_per_symbol, 8.0, 0.08);
}

TEST(Rans, AdaptiveTablesRoundtrip) {
  // Table for each symbol depends on the previous symbol, as in the codec.
  synth::Rng rng(5);
  std::vector<FrequencyTable> tables;
  for (int i = 0; i < 256; ++i) {
    SymbolDistribution d;
    for (int s = 0; s < 256; ++s) d.probs[static_cast<std::size_t>(s)] = 1.0 / (1.0 + std::abs(s - i));
    double z = 0;
    for (double p : d.probs) z += p;
    for (auto& p : d.probs) p /= z;
    tables.push_back(quantize_freqs(d));
  }
  std::vector<int> seq(5000);
  int prev = 0;
  for (auto& s : seq) {
    s = std::clamp(prev + static_cast<int>(rng.below(9)) - 4, 0, 255);
    prev = s;
  }
  RansEncoder enc;
  for (int i = static_cast<int>(seq.size()) - 1; i >= 0; --i)
    enc.encode(seq[static_cast<std::size_t>(i)], tables[static_cast<std::size_t>(i == 0 ? 0 : seq[static_cast<std::size_t>(i) - 1])]);
  const Bytes payload = std::move(enc).finish();
  RansDecoder dec(payload);
  prev = 0;
  for (int v : seq) {
    const int s = dec.decode(tables[static_cast<std::size_t>(prev)]);
    ASSERT_EQ(s, v);
    prev = s;
  }
  dec.finish();
}

TEST(Rans, TruncatedPayloadIsCorrupt) {
  synth::Rng rng(6);
  const FrequencyTable ft = uniform_table();
  RansEncoder enc;
  for (int i = 0; i < 1000; ++i) enc.encode(static_cast<int>(rng.below(256)), ft);
  Bytes payload = std::move(enc).finish();
  payload.resize(payload.size() / 2);
  RansDecoder dec(payload);
  try {
    for (int i = 0; i < 1000; ++i) dec.decode(ft);
    dec.finish();
    FAIL() << "expected corrupt stream";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::corrupt_stream);
  }
  EXPECT_THROW(RansDecoder(Bytes(5, 0)), Error);
}

TEST(Rans, ZeroFrequencySymbolRejected) {
  FrequencyTable ft = uniform_table();
  ft.freq[0] = 0;
  ft.freq[1] = 128;
  ft.rebuild_cum();
  RansEncoder enc;
  EXPECT_THROW(enc.encode(0, ft), Error);
}
