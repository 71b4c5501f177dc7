#include "iontrap/spectrum.hpp"

#include <algorithm>
#include <cmath>

#include "iontrap/constants.hpp"
#include "iontrap/errors.hpp"

namespace iontrap {

void fft_radix2(std::vector<std::complex<double>>& data) {
  const std::size_t n = data.size();
  if (n == 0 || (n & (n - 1)) != 0) throw input_error("FFT size must be a power of two");
  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = -2.0 * kPi / static_cast<double>(len);
    const std::complex<double> root(std::cos(angle), std::sin(angle));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> a = data[i + k];
        const std::complex<double> b = data[i + k + len / 2] * w;
        data[i + k] = a + b;
        data[i + k + len / 2] = a - b;
        w *= root;
      }
    }
  }
}

AmplitudeSpectrum amplitude_spectrum(const std::vector<double>& samples, double dt) {
  if (samples.size() < 16) throw input_error("spectrum needs at least 16 samples");
  if (!(dt > 0.0)) throw input_error("sample spacing must be positive");
  const std::size_t n = samples.size();

  std::size_t padded = 1;
  while (padded < 4 * n) padded <<= 1;

  // Hann window; its coherent gain (mean of the window) rescales amplitudes.
  std::vector<std::complex<double>> data(padded, 0.0);
  double gain = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w =
        0.5 * (1.0 - std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n - 1)));
    data[i] = samples[i] * w;
    gain += w;
  }
  fft_radix2(data);

  AmplitudeSpectrum out;
  out.bin_width = 1.0 / (static_cast<double>(padded) * dt);
  const std::size_t half = padded / 2;
  out.frequency.resize(half + 1);
  out.amplitude.resize(half + 1);
  for (std::size_t k = 0; k <= half; ++k) {
    out.frequency[k] = static_cast<double>(k) * out.bin_width;
    const double scale = (k == 0 || k == half) ? 1.0 : 2.0;  // one-sided spectrum
    out.amplitude[k] = scale * std::abs(data[k]) / gain;
  }
  return out;
}

SpectralPeak dominant_peak(const AmplitudeSpectrum& spectrum, double f_lo, double f_hi) {
  SpectralPeak best;
  const std::size_t n = spectrum.amplitude.size();
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double f = spectrum.frequency[k];
    if (f < f_lo || f > f_hi) continue;
    const double a = spectrum.amplitude[k];
    if (a < spectrum.amplitude[k - 1] || a < spectrum.amplitude[k + 1]) continue;
    if (!best.found || a > best.amplitude) {
      // Parabolic refinement through the three bins around the maximum.
      const double am = spectrum.amplitude[k - 1], ap = spectrum.amplitude[k + 1];
      const double denom = am - 2.0 * a + ap;
      double shift = 0.0;
      if (denom < 0.0) shift = 0.5 * (am - ap) / denom;
      shift = std::clamp(shift, -0.5, 0.5);
      best.found = true;
      best.frequency = f + shift * spectrum.bin_width;
      best.amplitude = a - 0.25 * (am - ap) * shift;
    }
  }
  return best;
}

}  // namespace iontrap
