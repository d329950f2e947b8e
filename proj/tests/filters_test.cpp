#include "navfuse/filters.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "navfuse/error.hpp"
#include "navfuse/quatmath.hpp"

namespace navfuse::dsp {
namespace {

double to_db(double g) { return 20.0 * std::log10(g); }

// Textbook closed form of the pre-warped bilinear Butterworth section.
BiquadCoeffs butterworth_by_hand(double fc, double fs) {
  const double k = std::tan(kPi * fc / fs);
  const double r2 = std::sqrt(2.0);
  const double norm = 1.0 / (1.0 + r2 * k + k * k);
  BiquadCoeffs c;
  c.b0 = k * k * norm;
  c.b1 = 2.0 * c.b0;
  c.b2 = c.b0;
  c.a1 = 2.0 * (k * k - 1.0) * norm;
  c.a2 = (1.0 - r2 * k + k * k) * norm;
  return c;
}

double overshoot(const BiquadCoeffs& c, int n) {
  BiquadFilter f(c);
  double peak = 0.0;
  for (int i = 0; i < n; ++i) peak = std::max(peak, f.step(1.0));
  return peak / c.dc_gain() - 1.0;
}

TEST(Butterworth, MatchesHandComputedBilinear) {
  for (auto [fc, fs] : {std::pair{10.0, 1000.0}, {5.0, 60.0}, {1.0, 50.0}, {200.0, 1000.0}}) {
    const BiquadCoeffs c = design_butterworth2_lp(fc, fs);
    const BiquadCoeffs h = butterworth_by_hand(fc, fs);
    EXPECT_NEAR(c.b0, h.b0, 1e-12);
    EXPECT_NEAR(c.b1, h.b1, 1e-12);
    EXPECT_NEAR(c.b2, h.b2, 1e-12);
    EXPECT_NEAR(c.a1, h.a1, 1e-12);
    EXPECT_NEAR(c.a2, h.a2, 1e-12);
    EXPECT_EQ(c.cutoff_hz, fc);
    EXPECT_EQ(c.sample_rate_hz, fs);
  }
}

TEST(Butterworth, PolesAreMappedAnalogPoles) {
  const double fc = 10.0, fs = 1000.0;
  const double wa = 2.0 * fs * std::tan(kPi * fc / fs);
  std::vector<std::complex<double>> expected;
  for (double angle : {3.0 * kPi / 4.0, -3.0 * kPi / 4.0}) {
    const std::complex<double> s = std::polar(wa, angle);
    expected.push_back((1.0 + s / (2.0 * fs)) / (1.0 - s / (2.0 * fs)));
  }
  const auto poles = design_butterworth2_lp(fc, fs).poles();
  for (const auto& p : poles) {
    const double best = std::min(std::abs(p - expected[0]), std::abs(p - expected[1]));
    EXPECT_LT(best, 1e-9);
  }
}

TEST(Butterworth, DesignPointFromTheFlightSetup) {
  const BiquadCoeffs c = design_butterworth2_lp(10.0, 1000.0);
  EXPECT_NEAR(c.dc_gain(), 1.0, 1e-6);
  EXPECT_NEAR(frequency_response(c, 0.0), 1.0, 1e-9);
  EXPECT_NEAR(to_db(frequency_response(c, 10.0)), to_db(1.0 / std::sqrt(2.0)), 0.1);
  EXPECT_TRUE(c.stable(1e-9));
}

TEST(Butterworth, MonotoneMagnitude) {
  for (auto [fc, fs] : {std::pair{10.0, 1000.0}, {10.0, 60.0}, {25.0, 60.0}}) {
    const BiquadCoeffs c = design_butterworth2_lp(fc, fs);
    double prev = frequency_response(c, 0.0);
    for (int i = 1; i <= 100; ++i) {
      const double g = frequency_response(c, fs / 2.0 * i / 100.0);
      EXPECT_LE(g, prev + 1e-12) << "f index " << i;
      prev = g;
    }
  }
}

TEST(Designs, RejectBadBands) {
  for (double fc : {0.0, -1.0, 500.0, 700.0, std::nan("")}) {
    EXPECT_THROW(design_butterworth2_lp(fc, 1000.0), Error);
    EXPECT_THROW(design_first_order_lp(fc, 1000.0), Error);
    EXPECT_THROW(design_first_order_hp(fc, 1000.0), Error);
    EXPECT_THROW(design_chebyshev1_2_lp(fc, 1000.0, 1.0), Error);
  }
  EXPECT_THROW(design_chebyshev1_2_lp(10.0, 1000.0, 0.0), Error);
  EXPECT_THROW(design_chebyshev1_2_lp(10.0, 1000.0, 3.5), Error);
  EXPECT_NO_THROW(design_chebyshev1_2_lp(10.0, 1000.0, 3.0));
}

TEST(Designs, AllStableWithUnitDcGain) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> frac(0.001, 0.49);
  for (int i = 0; i < 500; ++i) {
    const double fs = 60.0 + 1000.0 * frac(gen);
    const double fc = fs * frac(gen);
    for (const auto& c : {design_butterworth2_lp(fc, fs), design_chebyshev1_2_lp(fc, fs, 1.0),
                          design_first_order_lp(fc, fs)}) {
      EXPECT_TRUE(c.stable(1e-9));
      EXPECT_NEAR(c.dc_gain(), 1.0, 1e-6);
    }
    EXPECT_TRUE(design_first_order_hp(fc, fs).stable(1e-9));
  }
}

TEST(Chebyshev, RippleWithinBound) {
  for (double ripple : {0.5, 1.0, 3.0}) {
    const BiquadCoeffs c = design_chebyshev1_2_lp(10.0, 1000.0, ripple);
    const double dc = c.dc_gain();
    EXPECT_GE(dc, 1.0 - ripple);
    EXPECT_LE(dc, 1.0 + 1e-12);
    double peak = 0.0;
    for (int i = 0; i <= 1000; ++i) peak = std::max(peak, frequency_response(c, 10.0 * i / 1000.0));
    // The ripple is visible and stays within the requested band.
    EXPECT_GT(to_db(peak / dc), 0.9 * ripple);
    EXPECT_LE(to_db(peak / dc), ripple + 1e-6);
    EXPECT_NEAR(to_db(frequency_response(c, 10.0) / dc), to_db(1.0 / std::sqrt(2.0)), 0.1);
  }
}

TEST(Chebyshev, FasterRolloffAndMoreOvershootThanButterworth) {
  for (auto [fc, fs] : {std::pair{10.0, 1000.0}, {10.0, 60.0}, {5.0, 60.0}}) {
    const BiquadCoeffs b = design_butterworth2_lp(fc, fs);
    const BiquadCoeffs c = design_chebyshev1_2_lp(fc, fs, 1.0);
    const double stop = std::min(10.0 * fc, 0.45 * fs);
    EXPECT_LT(frequency_response(c, stop), frequency_response(b, stop));
    EXPECT_GT(overshoot(c, static_cast<int>(20 * fs / fc)), overshoot(b, static_cast<int>(20 * fs / fc)));
  }
}

TEST(FirstOrder, Gains) {
  const BiquadCoeffs lp = design_first_order_lp(5.0, 60.0);
  const BiquadCoeffs hp = design_first_order_hp(0.1, 60.0);
  EXPECT_EQ(lp.b2, 0.0);
  EXPECT_EQ(lp.a2, 0.0);
  EXPECT_EQ(hp.b2, 0.0);
  EXPECT_EQ(hp.a2, 0.0);
  EXPECT_NEAR(frequency_response(lp, 0.0), 1.0, 1e-9);
  EXPECT_LT(frequency_response(lp, 30.0), 1.0 / std::sqrt(2.0));
  EXPECT_NEAR(frequency_response(hp, 0.0), 0.0, 1e-9);
  EXPECT_NEAR(frequency_response(hp, 30.0), 1.0, 1e-6);
  EXPECT_NEAR(to_db(frequency_response(lp, 5.0)), to_db(1.0 / std::sqrt(2.0)), 0.1);
  EXPECT_NEAR(to_db(frequency_response(hp, 0.1)), to_db(1.0 / std::sqrt(2.0)), 0.1);
}

TEST(Filter, ZeroInZeroOut) {
  BiquadFilter f(design_butterworth2_lp(10.0, 1000.0));
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(f.step(0.0), 0.0);
}

TEST(Filter, ConvergesToDc) {
  for (const auto& c : {design_butterworth2_lp(10.0, 1000.0), design_butterworth2_lp(10.0, 60.0),
                        design_first_order_lp(5.0, 60.0)}) {
    BiquadFilter f(c);
    const int n = static_cast<int>(std::ceil(5.0 / c.cutoff_hz * c.sample_rate_hz));
    double y = 0.0;
    for (int i = 0; i < n; ++i) y = f.step(1.0);
    EXPECT_NEAR(y, 1.0, 1e-6);
  }
  // Higher Q rings longer.
  BiquadFilter cheb(design_chebyshev1_2_lp(10.0, 60.0, 1.0));
  double y = 0.0;
  for (int i = 0; i < 60; ++i) y = cheb.step(1.0);
  EXPECT_NEAR(y, 1.0, 1e-6);
}

TEST(Filter, PrimeRemovesTransient) {
  BiquadFilter f(design_butterworth2_lp(10.0, 60.0));
  f.prime(9.80665);
  for (int i = 0; i < 100; ++i) EXPECT_NEAR(f.step(9.80665), 9.80665, 1e-12);
  f.reset();
  EXPECT_EQ(f.s1(), 0.0);
  EXPECT_EQ(f.s2(), 0.0);
}

TEST(Filter, ReducesWhiteNoiseVariance) {
  std::mt19937_64 gen(42);
  std::normal_distribution<double> n;
  BiquadFilter f(design_butterworth2_lp(10.0, 1000.0));
  double in = 0.0, out = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double x = n(gen);
    const double y = f.step(x);
    in += x * x;
    out += y * y;
  }
  EXPECT_LT(out, in);
}

TEST(Filter, Linear) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> n;
  const BiquadCoeffs c = design_chebyshev1_2_lp(7.0, 60.0, 1.0);
  BiquadFilter fx(c), fy(c), fxy(c);
  for (int i = 0; i < 1000; ++i) {
    const double x = n(gen), y = n(gen);
    const double lhs = fxy.step(2.5 * x - 0.75 * y);
    const double rhs = 2.5 * fx.step(x) - 0.75 * fy.step(y);
    EXPECT_NEAR(lhs, rhs, 1e-9);
  }
}

TEST(Filter, Deterministic) {
  std::vector<double> input(500);
  std::mt19937_64 gen(8);
  std::normal_distribution<double> n;
  for (auto& x : input) x = n(gen);
  BiquadFilter a(design_butterworth2_lp(10.0, 60.0)), b(design_butterworth2_lp(10.0, 60.0));
  for (double x : input) EXPECT_EQ(a.step(x), b.step(x));
}

TEST(Filter, RejectsNonFiniteAndKeepsState) {
  BiquadFilter f(design_butterworth2_lp(10.0, 60.0));
  f.step(1.0);
  const double s1 = f.s1(), s2 = f.s2();
  try {
    f.step(std::nan(""));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFinite);
  }
  EXPECT_THROW(f.step(INFINITY), Error);
  EXPECT_EQ(f.s1(), s1);
  EXPECT_EQ(f.s2(), s2);
}

TEST(Filter, IdentityPassesThrough) {
  BiquadFilter f(BiquadCoeffs::identity(60.0));
  for (double x : {1.0, -3.5, 1e6}) EXPECT_EQ(f.step(x), x);
}

}  // namespace
}  // namespace navfuse::dsp
