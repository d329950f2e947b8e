#pragma once

#include <array>
#include <complex>

namespace navfuse::dsp {

// Second-order IIR section, a0 normalized to 1:
//   H(z) = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)
// First-order sections use b2 = a2 = 0.
struct BiquadCoeffs {
  double b0 = 1.0;
  double b1 = 0.0;
  double b2 = 0.0;
  double a1 = 0.0;
  double a2 = 0.0;
  double sample_rate_hz = 0.0;
  double cutoff_hz = 0.0;

  // Passthrough section (unity gain at every frequency).
  static BiquadCoeffs identity(double sample_rate_hz);

  double dc_gain() const { return (b0 + b1 + b2) / (1.0 + a1 + a2); }
  std::array<std::complex<double>, 2> poles() const;
  bool stable(double margin = 0.0) const;
};

// All designers use the bilinear transform with the analog cutoff
// pre-warped so the -3 dB (or ripple-edge) point lands on cutoff_hz.
// They throw kInvalidArgument unless 0 < cutoff_hz < sample_rate_hz / 2.
BiquadCoeffs design_butterworth2_lp(double cutoff_hz, double sample_rate_hz);

// Chebyshev type I scaled to unit DC gain, so the passband rises to
// 10^(ripple_db/20). cutoff_hz is the -3 dB point, as for the Butterworth
// design. ripple_db must be in (0, 3].
BiquadCoeffs design_chebyshev1_2_lp(double cutoff_hz, double sample_rate_hz, double ripple_db);

BiquadCoeffs design_first_order_lp(double cutoff_hz, double sample_rate_hz);
BiquadCoeffs design_first_order_hp(double cutoff_hz, double sample_rate_hz);

// |H(e^{j 2 pi f / fs})|. f_hz must lie in [0, fs/2].
double frequency_response(const BiquadCoeffs& coeffs, double f_hz);

// Streaming evaluation in direct form II transposed. Owns its delay line.
class BiquadFilter {
 public:
  BiquadFilter() = default;
  explicit BiquadFilter(const BiquadCoeffs& coeffs) : coeffs_(coeffs) {}

  // Throws kNonFinite on NaN/inf input; the state is left untouched.
  double step(double x);

  void reset() { s1_ = s2_ = 0.0; }
  // Loads the steady state for a constant input x, so a constant stream
  // passes through without a start-up transient.
  void prime(double x);

  const BiquadCoeffs& coeffs() const { return coeffs_; }
  double s1() const { return s1_; }
  double s2() const { return s2_; }

 private:
  BiquadCoeffs coeffs_{};
  double s1_ = 0.0;
  double s2_ = 0.0;
};

}  // namespace navfuse::dsp
