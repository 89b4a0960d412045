#pragma once

// Network averages -> Laplace parameters -> 256-symbol distribution ->
// integer frequency table for rANS.
//
// Everything that feeds a FrequencyTable must be bit-reproducible across
// platforms, so the exponential is evaluated by det_exp below instead of the
// C library, and the build disables floating-point contraction.

#include <algorithm>
#include <array>
#include <cfloat>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "gicdlc/errors.hpp"

namespace gicdlc {

inline constexpr int kSymbols = 256;
inline constexpr int kFreqBits = 14;
inline constexpr std::uint32_t kFreqTotal = 1u << kFreqBits;

/// Clamp used on the sigma average before the logit.
inline constexpr double kSigmaEps = 1.0 / 1024.0;
inline constexpr double kScaleMin = kSigmaEps / (1.0 - kSigmaEps);
inline constexpr double kScaleMax = (1.0 - kSigmaEps) / kSigmaEps;

namespace detail {

inline constexpr double kLog2e = 1.4426950408889634074;
// Cody-Waite split of ln 2; kLn2Hi has enough trailing zero bits that
// k * kLn2Hi is exact for |k| < 2^11.
inline constexpr double kLn2Hi = 6.93147180369123816490e-01;
inline constexpr double kLn2Lo = 1.90821492927058770002e-10;

inline constexpr int kExpDegree = 13;

constexpr std::array<double, kExpDegree + 1> exp_coefficients() {
  std::array<double, kExpDegree + 1> c{};
  double f = 1.0;
  for (int n = 0; n <= kExpDegree; ++n) {
    if (n > 0) f *= n;
    c[static_cast<std::size_t>(n)] = 1.0 / f;
  }
  return c;
}

inline constexpr auto kExpCoeff = exp_coefficients();

}  // namespace detail

/// Platform-independent exp: x = k ln2 + r with |r| <= ln2/2, degree-13
/// Taylor polynomial in r by Horner's rule, then exact scaling by 2^k.
/// Relative error is below 1e-15 over the normal range.
inline double det_exp(double x) {
  if (std::isnan(x)) return x;
  if (x < -745.2) return 0.0;
  if (x > 709.7) return HUGE_VAL;
  const double k = std::floor(x * detail::kLog2e + 0.5);
  const double r = (x - k * detail::kLn2Hi) - k * detail::kLn2Lo;
  double p = detail::kExpCoeff[detail::kExpDegree];
  for (int n = detail::kExpDegree - 1; n >= 0; --n) p = p * r + detail::kExpCoeff[static_cast<std::size_t>(n)];
  return std::ldexp(p, static_cast<int>(k));
}

struct LaplaceParams {
  double mu = 127.5;
  double b = 1.0;  // scale, not standard deviation
};

inline double mu_from_average(double ybar) { return 255.0 * ybar; }

/// b = exp(logit(y)) = y / (1 - y), with y clamped to [eps, 1 - eps].
inline double sigma_from_average(double ybar) {
  const double y = std::clamp(ybar, kSigmaEps, 1.0 - kSigmaEps);
  return y / (1.0 - y);
}

inline LaplaceParams params_from_averages(double mu_avg, double sigma_avg) {
  return {mu_from_average(mu_avg), sigma_from_average(sigma_avg)};
}

struct SymbolDistribution {
  std::array<double, kSymbols> probs{};
};

/// Integrates the Laplace density over each pixel interval [v-0.5, v+0.5];
/// the tails below 0.5 and above 254.5 are folded into symbols 0 and 255.
/// Probabilities are floored at DBL_MIN so every symbol stays codable.
inline SymbolDistribution discretize(const LaplaceParams& p) {
  const double mu = p.mu;
  const double b = std::clamp(p.b, kScaleMin, kScaleMax);
  // Half the mass beyond t on the far side from mu: 0.5 * exp(-|t - mu| / b).
  auto tail = [&](double t) { return 0.5 * det_exp(-std::fabs(t - mu) / b); };

  // Tail mass at each interval boundary v + 0.5, shared by neighboring symbols.
  std::array<double, kSymbols - 1> t{};
  for (int v = 0; v < kSymbols - 1; ++v) t[static_cast<std::size_t>(v)] = tail(v + 0.5);

  SymbolDistribution d;
  d.probs[0] = 0.5 <= mu ? t[0] : 1.0 - t[0];
  d.probs[kSymbols - 1] = 254.5 >= mu ? t[kSymbols - 2] : 1.0 - t[kSymbols - 2];
  for (int v = 1; v < kSymbols - 1; ++v) {
    const double lo = v - 0.5, hi = v + 0.5;
    const double tlo = t[static_cast<std::size_t>(v) - 1], thi = t[static_cast<std::size_t>(v)];
    double pv;
    if (hi <= mu) pv = thi - tlo;
    else if (lo >= mu) pv = tlo - thi;
    else pv = 1.0 - tlo - thi;
    d.probs[static_cast<std::size_t>(v)] = pv;
  }
  for (auto& v : d.probs) v = std::max(v, DBL_MIN);
  return d;
}

struct FrequencyTable {
  std::array<std::uint32_t, kSymbols> freq{};
  std::array<std::uint32_t, kSymbols + 1> cum{};
  std::uint32_t total = kFreqTotal;

  void rebuild_cum() {
    cum[0] = 0;
    for (int s = 0; s < kSymbols; ++s) cum[static_cast<std::size_t>(s) + 1] = cum[static_cast<std::size_t>(s)] + freq[static_cast<std::size_t>(s)];
    total = cum[kSymbols];
  }

  friend bool operator==(const FrequencyTable&, const FrequencyTable&) = default;
};

/// Largest-remainder rounding of probs * F with every frequency >= 1.
/// Deficits go to the largest remainders (ties: lowest symbol); surpluses are
/// taken one at a time from the currently largest frequency (ties: lowest symbol).
inline FrequencyTable quantize_freqs(const SymbolDistribution& d) {
  FrequencyTable ft;
  std::array<double, kSymbols> rem{};
  std::int64_t sum = 0;
  for (int s = 0; s < kSymbols; ++s) {
    const auto i = static_cast<std::size_t>(s);
    const double scaled = std::clamp(d.probs[i], 0.0, 1.0) * kFreqTotal;
    const double fl = std::floor(scaled);
    rem[i] = scaled - fl;
    ft.freq[i] = std::max<std::uint32_t>(1, static_cast<std::uint32_t>(fl));
    sum += ft.freq[i];
  }

  if (sum < kFreqTotal) {
    // Largest remainders first, lowest symbol among equal remainders.
    std::array<int, kSymbols> order{};
    std::iota(order.begin(), order.end(), 0);
    const auto deficit = static_cast<std::size_t>(kFreqTotal - sum);
    const auto need = std::min<std::size_t>(deficit, kSymbols);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(need), order.end(), [&](int a, int b) {
      const double ra = rem[static_cast<std::size_t>(a)], rb = rem[static_cast<std::size_t>(b)];
      return ra != rb ? ra > rb : a < b;
    });
    for (std::size_t k = 0; k < deficit; ++k) ++ft.freq[static_cast<std::size_t>(order[k % kSymbols])];
    sum = kFreqTotal;
  }
  if (sum > kFreqTotal) {
    // Max-heap on (frequency, lower symbol first): the top is what max_element would pick.
    auto before = [&](int a, int b) {
      const auto fa = ft.freq[static_cast<std::size_t>(a)], fb = ft.freq[static_cast<std::size_t>(b)];
      return fa != fb ? fa < fb : a > b;
    };
    std::array<int, kSymbols> heap{};
    std::iota(heap.begin(), heap.end(), 0);
    std::make_heap(heap.begin(), heap.end(), before);
    for (; sum > kFreqTotal; --sum) {
      std::pop_heap(heap.begin(), heap.end(), before);
      --ft.freq[static_cast<std::size_t>(heap.back())];
      std::push_heap(heap.begin(), heap.end(), before);
    }
  }
  ft.rebuild_cum();
  return ft;
}

inline double theoretical_bits(const SymbolDistribution& d, int v) {
  return -std::log2(d.probs[static_cast<std::size_t>(v)]);
}

}  // namespace gicdlc
