// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The wstlid Authors

#include "wst/scattering.hpp"

#include "scattering_common.hpp"

#include <cmath>

namespace wst::reference {

namespace {

ComplexVector forward(const RealVector& v) {
  ComplexVector out(v.begin(), v.end());
  fft_inplace(out);
  return out;
}

// |ifft(spec * h)| at full rate.
RealVector envelope(const ComplexVector& spec, const RealVector& h) {
  ComplexVector z(spec.size());
  for (std::size_t k = 0; k < spec.size(); ++k) z[k] = spec[k] * h[k];
  ifft_inplace(z);
  RealVector out(z.size());
  for (std::size_t k = 0; k < z.size(); ++k) out[k] = std::abs(z[k]);
  return out;
}

// (v * phi) at full rate, then every hop-th sample of the cropped signal.
void average_into(const RealVector& v, const RealVector& phi, const detail::Layout& layout,
                  Matrix& dst, Eigen::Index col) {
  ComplexVector z = forward(v);
  for (std::size_t k = 0; k < z.size(); ++k) z[k] *= phi[k];
  ifft_inplace(z);
  for (std::size_t f = 0; f < layout.frames; ++f) {
    dst(static_cast<Eigen::Index>(f), col) = z[layout.left + f * layout.hop].real();
  }
}

}  // namespace

ScatteringCoefficients scattering_coefficients(const AudioBuffer& x, const ScatteringConfig& config,
                                               std::span<const WaveletFilterbank> banks) {
  config.validate();
  const detail::Layout layout = detail::make_layout(x.size(), config.T, config.hop());
  detail::check_banks(config, banks, layout.n, config.m);
  const auto& bank1 = banks[0];
  const WaveletFilterbank* bank2 = config.m >= 2 ? &banks[1] : nullptr;
  const RealVector& phi = bank1.lowpass;

  ScatteringCoefficients out;
  detail::describe_paths(out, bank1, bank2);
  out.hop_samples = config.hop();
  out.sample_rate_hz = x.sample_rate_hz();
  out.peak = detail::peak_amplitude(x);

  const auto frames = static_cast<Eigen::Index>(layout.frames);
  Eigen::Index n1 = 0;
  Eigen::Index n2 = 0;
  for (const auto& p : out.paths) (p.order == 1 ? n1 : n2)++;
  out.s0 = Matrix::Zero(frames, 1);
  out.abs_lowpass = Matrix::Zero(frames, 1);
  out.s1 = Matrix::Zero(frames, n1);
  out.s2 = Matrix::Zero(frames, n2);

  const RealVector padded = detail::padded_signal(x, layout);
  average_into(padded, phi, layout, out.s0, 0);
  RealVector mag(padded.size());
  for (std::size_t k = 0; k < padded.size(); ++k) mag[k] = std::abs(padded[k]);
  average_into(mag, phi, layout, out.abs_lowpass, 0);

  const ComplexVector xs = forward(padded);
  Eigen::Index col2 = 0;
  for (std::size_t i = 0; i < bank1.bandpass.size(); ++i) {
    const RealVector u1 = envelope(xs, bank1.bandpass[i].response);
    average_into(u1, phi, layout, out.s1, static_cast<Eigen::Index>(i));
    if (bank2 == nullptr) continue;
    const ComplexVector u1s = forward(u1);
    for (const auto& p : out.paths) {
      if (p.order != 2 || p.filter1 != i) continue;
      const RealVector u2 = envelope(u1s, bank2->bandpass[p.filter2].response);
      average_into(u2, phi, layout, out.s2, col2++);
    }
  }
  return out;
}

}  // namespace wst::reference
