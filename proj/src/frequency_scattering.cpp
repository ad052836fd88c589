// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The wstlid Authors

#include "wst/dsp.hpp"
#include "wst/scattering.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace wst {

ScatteringFeatures frequency_scattering(const ScatteringFeatures& s1_frames,
                                        const FreqScatteringConfig& fcfg) {
  fcfg.validate();
  std::vector<Eigen::Index> cols;
  for (std::size_t c = 0; c < s1_frames.channels.size(); ++c) {
    const auto& ch = s1_frames.channels[c];
    if (ch.kind == ChannelKind::order1 && ch.geometric) cols.push_back(static_cast<Eigen::Index>(c));
  }
  if (cols.size() < 8) {
    throw std::invalid_argument("frequency_scattering: need at least 8 geometric order-1 channels, got " +
                                std::to_string(cols.size()));
  }
  const double ratio = s1_frames.channels[cols[1]].lambda1 / s1_frames.channels[cols[0]].lambda1;
  for (std::size_t c = 1; c < cols.size(); ++c) {
    const double r = s1_frames.channels[cols[c]].lambda1 / s1_frames.channels[cols[c - 1]].lambda1;
    if (!(ratio > 0.0) || std::abs(r - ratio) > 1e-9 * ratio) {
      throw std::invalid_argument("frequency_scattering: order-1 channels are not log-uniform");
    }
  }

  const std::size_t k = cols.size();
  const std::size_t n = next_power_of_two(2 * k);
  const std::size_t left = (n - k) / 2;
  const WaveletFilterbank bank = build_morlet_bank(static_cast<double>(k), fcfg.Qf, n);
  const auto nb = static_cast<Eigen::Index>(bank.bandpass.size());

  ScatteringFeatures out;
  out.data = Matrix::Zero(s1_frames.frames(), 1 + nb);
  const Eigen::Index frames = s1_frames.frames();
#pragma omp parallel for schedule(static)
  for (Eigen::Index t = 0; t < frames; ++t) {
    RealVector v(k);
    double mean = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      v[c] = s1_frames.data(t, cols[c]);
      mean += v[c];
    }
    out.data(t, 0) = mean / static_cast<double>(k);
    const ComplexSpectrum vs = spectrum(std::span<const double>(reflect_pad(v, left, n)));
    for (Eigen::Index b = 0; b < nb; ++b) {
      const ComplexVector z = filter_apply(vs, bank.bandpass[static_cast<std::size_t>(b)].response, 1);
      double acc = 0.0;
      for (std::size_t c = 0; c < k; ++c) acc += std::abs(z[left + c]);
      out.data(t, 1 + b) = acc / static_cast<double>(k);
    }
  }
  out.channels.push_back({ChannelKind::freq_lowpass});
  for (const auto& psi : bank.bandpass) {
    ChannelInfo info;
    info.kind = ChannelKind::freq_bandpass;
    info.mu = psi.center;
    info.geometric = psi.kind == FilterKind::geometric;
    out.channels.push_back(info);
  }
  out.hop_samples = s1_frames.hop_samples;
  out.sample_rate_hz = s1_frames.sample_rate_hz;
  out.normalized = s1_frames.normalized;
  return out;
}

ScatteringFeatures concatenate_layers(std::span<const ScatteringFeatures> parts) {
  if (parts.empty()) throw std::invalid_argument("concatenate_layers: no parts");
  Eigen::Index width = 0;
  for (const auto& p : parts) {
    if (p.frames() != parts[0].frames()) {
      throw std::invalid_argument("concatenate_layers: frame count mismatch (" +
                                  std::to_string(p.frames()) + " vs " +
                                  std::to_string(parts[0].frames()) + ")");
    }
    if (p.hop_samples != parts[0].hop_samples) {
      throw std::invalid_argument("concatenate_layers: hop mismatch");
    }
    width += p.width();
  }
  ScatteringFeatures out;
  out.data.resize(parts[0].frames(), width);
  out.hop_samples = parts[0].hop_samples;
  out.sample_rate_hz = parts[0].sample_rate_hz;
  out.normalized = true;
  Eigen::Index off = 0;
  for (const auto& p : parts) {
    out.data.middleCols(off, p.width()) = p.data;
    off += p.width();
    out.channels.insert(out.channels.end(), p.channels.begin(), p.channels.end());
    out.normalized = out.normalized && p.normalized;
  }
  return out;
}

}  // namespace wst
