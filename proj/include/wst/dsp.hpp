// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The wstlid Authors

#pragma once

#include "wst/types.hpp"

#include <cstddef>
#include <span>

namespace wst {

/// DFT of a power-of-two length sequence, unnormalized forward convention:
/// X[k] = sum_n x[n] exp(-2 pi i k n / N).
class ComplexSpectrum {
 public:
  ComplexSpectrum() = default;
  explicit ComplexSpectrum(ComplexVector bins);

  const ComplexVector& bins() const noexcept { return bins_; }
  ComplexVector& bins() noexcept { return bins_; }
  std::size_t size() const noexcept { return bins_.size(); }
  const Complex& operator[](std::size_t k) const noexcept { return bins_[k]; }

 private:
  ComplexVector bins_;
};

bool is_power_of_two(std::size_t n) noexcept;
std::size_t next_power_of_two(std::size_t n) noexcept;

/// In-place forward / inverse FFT of any power-of-two size. The inverse
/// includes the 1/N factor.
void fft_inplace(std::span<Complex> data);
void ifft_inplace(std::span<Complex> data);

ComplexSpectrum spectrum(std::span<const double> x);
ComplexSpectrum spectrum(std::span<const Complex> x);
ComplexVector inverse(const ComplexSpectrum& spec);

/// Inverse DFT of a Hermitian spectrum. Only bins 0..N/2 are read; the
/// imaginary part of the result is dropped.
RealVector inverse_real(std::span<const Complex> bins);

/// Same as inverse_real, given only the N/2 + 1 non-negative-frequency bins.
RealVector inverse_half(ComplexVector half, std::size_t n);

/// Unnormalized form of inverse_half: writes N times the inverse DFT into
/// `out` (length N). `half` is overwritten.
void inverse_half_into(std::span<Complex> half, std::span<double> out);

/// Circular convolution of the signal behind `x_spec` with the filter whose
/// frequency response is `h_spec`, decimated by `subsample` through spectral
/// folding. Output length is N / subsample and sample m equals the full-rate
/// convolution at index m * subsample.
ComplexVector filter_apply(const ComplexSpectrum& x_spec, const ComplexSpectrum& h_spec,
                           std::size_t subsample);
ComplexVector filter_apply(const ComplexSpectrum& x_spec, std::span<const double> h_response,
                           std::size_t subsample);

/// Folds `product` (length N) into N / subsample bins and inverse transforms.
ComplexVector fold_inverse(std::span<const Complex> product, std::size_t subsample);

/// output[n] = x[n - c] with circular wrap.
AudioBuffer time_shift(const AudioBuffer& x, long c);

/// output[n] ~ x((1 - eps) n), 16-tap windowed-sinc interpolation, same length.
AudioBuffer time_warp(const AudioBuffer& x, double eps);

/// Symmetric (reflect, edge not repeated) extension: `left` samples before and
/// enough after to reach `total` samples. Handles pads longer than the input.
RealVector reflect_pad(std::span<const double> x, std::size_t left, std::size_t total);

}  // namespace wst
