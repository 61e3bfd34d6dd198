#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace cdflow {

using Complex = std::complex<double>;

/// Unnormalized forward transform: out[j] = sum_n in[n] exp(-2 pi i j n / size).
void fft_forward(std::span<const Complex> in, std::span<Complex> out);

/// Unnormalized backward transform: out[n] = sum_j in[j] exp(+2 pi i j n / size).
void fft_backward(std::span<const Complex> in, std::span<Complex> out);

/// Signed wavenumber of FFT bin `index` on a grid of `size` points.
/// The Nyquist bin of an even grid maps to zero, so odd-order derivatives
/// of real fields stay real.
inline double wavenumber(std::size_t index, std::size_t size) {
  const auto half = static_cast<std::ptrdiff_t>(size / 2);
  auto j = static_cast<std::ptrdiff_t>(index);
  if (size % 2 == 0 && j == half) return 0.0;
  if (j > half) j -= static_cast<std::ptrdiff_t>(size);
  return static_cast<double>(j);
}

/// Grid values of d^order/du^order of the trigonometric polynomial
/// sum_{p=-N..N} modes[p+N] e^{ipu}, sampled at u_j = 2 pi j / grid_size.
std::vector<Complex> synthesize(std::span<const Complex> modes, std::size_t grid_size, int order = 0);

/// Fourier modes p = -N..N of periodic samples (inverse of synthesize when
/// the samples are band limited to N).
std::vector<Complex> analyze(std::span<const Complex> samples, int n_modes);

/// Spectral derivative of a real periodic field sampled on [0, 2 pi).
std::vector<double> periodic_derivative(std::span<const double> samples, int order = 1);

/// Zeroes Fourier bins of a real periodic field below relative * (largest bin).
void suppress_roundoff(std::vector<double>& samples, double relative);

/// Antiderivative of the zero-mean part of a real periodic field, pinned to
/// zero at u = 0.
std::vector<double> periodic_antiderivative(std::span<const double> samples);

std::size_t next_pow2(std::size_t n);

}  // namespace cdflow
