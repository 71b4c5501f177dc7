#pragma once

// Amplitude spectra of uniformly sampled series: Hann window, radix-2 FFT,
// and parabolic refinement of peak position/height.  Window gain is divided
// out so sinusoid amplitudes are reported directly; ratios between peaks of
// one spectrum are therefore window-independent.

#include <complex>
#include <vector>

namespace iontrap {

struct AmplitudeSpectrum {
  std::vector<double> frequency;  // hertz, DC..Nyquist
  std::vector<double> amplitude;  // sinusoid amplitude estimate per bin
  double bin_width = 0.0;         // hertz
};

// In-place radix-2 decimation-in-time FFT; size must be a power of two.
void fft_radix2(std::vector<std::complex<double>>& data);

// Hann-windowed, zero-padded (next power of two, at least 4x the input
// length) amplitude spectrum of a real series sampled every dt seconds.
AmplitudeSpectrum amplitude_spectrum(const std::vector<double>& samples, double dt);

struct SpectralPeak {
  double frequency = 0.0;  // hertz, parabolically refined
  double amplitude = 0.0;
  bool found = false;
};

// Largest local maximum with frequency inside [f_lo, f_hi].
SpectralPeak dominant_peak(const AmplitudeSpectrum& spectrum, double f_lo, double f_hi);

}  // namespace iontrap
