#include "navfuse/filters.hpp"

#include <cmath>
#include <string>

#include "navfuse/error.hpp"
#include "navfuse/quatmath.hpp"

namespace navfuse::dsp {

namespace {

void check_band(double cutoff_hz, double sample_rate_hz) {
  if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz)) {
    throw Error(ErrorCode::kInvalidArgument, "sample rate must be positive");
  }
  if (!(cutoff_hz > 0.0) || !(cutoff_hz < 0.5 * sample_rate_hz)) {
    throw Error(ErrorCode::kInvalidArgument,
                "cutoff " + std::to_string(cutoff_hz) + " Hz must lie in (0, " +
                    std::to_string(0.5 * sample_rate_hz) + ") Hz");
  }
}

// Analog section n(s)/d(s) in the normalized variable s' = s / wc, with
// n(s) = n0 + n1 s + n2 s^2 and d likewise. Substituting
// s' = c (1 - z^-1) / (1 + z^-1), c = 1 / tan(pi fc / fs), is the bilinear
// transform with the cutoff pre-warped onto fc.
BiquadCoeffs bilinear(std::array<double, 3> n, std::array<double, 3> d, double cutoff_hz,
                      double sample_rate_hz) {
  const double c = 1.0 / std::tan(kPi * cutoff_hz / sample_rate_hz);
  const double c2 = c * c;
  const double z0 = d[0] + d[1] * c + d[2] * c2;
  BiquadCoeffs out;
  out.b0 = (n[0] + n[1] * c + n[2] * c2) / z0;
  out.b1 = (2.0 * n[0] - 2.0 * n[2] * c2) / z0;
  out.b2 = (n[0] - n[1] * c + n[2] * c2) / z0;
  out.a1 = (2.0 * d[0] - 2.0 * d[2] * c2) / z0;
  out.a2 = (d[0] - d[1] * c + d[2] * c2) / z0;
  out.sample_rate_hz = sample_rate_hz;
  out.cutoff_hz = cutoff_hz;
  return out;
}

}  // namespace

BiquadCoeffs BiquadCoeffs::identity(double sample_rate_hz) {
  BiquadCoeffs c;
  c.sample_rate_hz = sample_rate_hz;
  return c;
}

std::array<std::complex<double>, 2> BiquadCoeffs::poles() const {
  // Roots of z^2 + a1 z + a2.
  const std::complex<double> disc = std::sqrt(std::complex<double>(a1 * a1 - 4.0 * a2, 0.0));
  return {(-a1 + disc) / 2.0, (-a1 - disc) / 2.0};
}

bool BiquadCoeffs::stable(double margin) const {
  for (const auto& p : poles()) {
    if (!(std::abs(p) < 1.0 - margin)) return false;
  }
  return true;
}

BiquadCoeffs design_butterworth2_lp(double cutoff_hz, double sample_rate_hz) {
  check_band(cutoff_hz, sample_rate_hz);
  // wc^2 / (s^2 + sqrt(2) wc s + wc^2)
  return bilinear({1.0, 0.0, 0.0}, {1.0, std::sqrt(2.0), 1.0}, cutoff_hz, sample_rate_hz);
}

BiquadCoeffs design_chebyshev1_2_lp(double cutoff_hz, double sample_rate_hz, double ripple_db) {
  check_band(cutoff_hz, sample_rate_hz);
  if (!(ripple_db > 0.0) || !(ripple_db <= 3.0)) {
    throw Error(ErrorCode::kInvalidArgument, "chebyshev ripple must lie in (0, 3] dB");
  }
  const double eps = std::sqrt(std::pow(10.0, ripple_db / 10.0) - 1.0);
  const double mu = std::asinh(1.0 / eps) / 2.0;
  // Prototype poles -sinh(mu) sin(pi/4) +/- j cosh(mu) cos(pi/4).
  // Rescaled so the -3 dB point (relative to DC) sits at 1 instead of the
  // ripple edge, which puts both low-passes on the same cutoff.
  const double e2 = eps * eps;
  const double w3 = std::sqrt((1.0 + std::sqrt((1.0 + 2.0 * e2) / e2)) / 2.0);
  const double sigma = std::sinh(mu) * std::sin(kPi / 4.0) / w3;
  const double omega = std::cosh(mu) * std::cos(kPi / 4.0) / w3;
  const double p2 = sigma * sigma + omega * omega;
  // Unit gain at DC; the ripple shows up as a passband peak of
  // sqrt(1 + eps^2) instead of a DC dip.
  return bilinear({p2, 0.0, 0.0}, {p2, 2.0 * sigma, 1.0}, cutoff_hz, sample_rate_hz);
}

BiquadCoeffs design_first_order_lp(double cutoff_hz, double sample_rate_hz) {
  check_band(cutoff_hz, sample_rate_hz);
  // 1 / (1 + s'); kept first order so no pole sits on the unit circle.
  const double c = 1.0 / std::tan(kPi * cutoff_hz / sample_rate_hz);
  BiquadCoeffs out;
  out.b0 = 1.0 / (1.0 + c);
  out.b1 = out.b0;
  out.b2 = 0.0;
  out.a1 = (1.0 - c) / (1.0 + c);
  out.a2 = 0.0;
  out.sample_rate_hz = sample_rate_hz;
  out.cutoff_hz = cutoff_hz;
  return out;
}

BiquadCoeffs design_first_order_hp(double cutoff_hz, double sample_rate_hz) {
  check_band(cutoff_hz, sample_rate_hz);
  // s' / (1 + s')
  BiquadCoeffs out = design_first_order_lp(cutoff_hz, sample_rate_hz);
  const double c = 1.0 / std::tan(kPi * cutoff_hz / sample_rate_hz);
  out.b0 = c / (1.0 + c);
  out.b1 = -out.b0;
  return out;
}

double frequency_response(const BiquadCoeffs& c, double f_hz) {
  const std::complex<double> z1 = std::polar(1.0, -2.0 * kPi * f_hz / c.sample_rate_hz);
  const std::complex<double> z2 = z1 * z1;
  return std::abs((c.b0 + c.b1 * z1 + c.b2 * z2) / (1.0 + c.a1 * z1 + c.a2 * z2));
}

double BiquadFilter::step(double x) {
  if (!std::isfinite(x)) {
    throw Error(ErrorCode::kNonFinite, "filter input is not finite");
  }
  const BiquadCoeffs& c = coeffs_;
  const double y = c.b0 * x + s1_;
  s1_ = c.b1 * x - c.a1 * y + s2_;
  s2_ = c.b2 * x - c.a2 * y;
  return y;
}

void BiquadFilter::prime(double x) {
  const BiquadCoeffs& c = coeffs_;
  const double y = c.dc_gain() * x;
  s2_ = c.b2 * x - c.a2 * y;
  s1_ = c.b1 * x - c.a1 * y + s2_;
}

}  // namespace navfuse::dsp
