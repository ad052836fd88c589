// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The wstlid Authors

#pragma once

#include "wst/filterbank.hpp"
#include "wst/types.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace wst {

struct FreqScatteringConfig {
  int Qf = 4;     ///< octave resolution along log-lambda, 3..8
  int order = 1;

  void validate() const;
};

struct ScatteringConfig {
  int T = 256;
  int Q1 = 2;
  int Q2 = 1;
  int m = 2;
  double log_eps = 0x1p-20;  ///< relative to the peak input amplitude
  int oversampling = 1;      ///< hop = T / 2^oversampling
  bool include_s0 = true;
  std::optional<FreqScatteringConfig> freq_scattering;

  int hop() const noexcept { return T >> oversampling; }
  int layer_q(int layer) const noexcept { return layer <= 1 ? Q1 : Q2; }
  void validate() const;
};

using ScatteringFeatures = FeatureMatrix;

/// Transform size used for a signal of `length` samples: the next power of
/// two >= length + T (and >= 2T), doubled until the hop-aligned crop fits.
std::size_t padded_length(std::size_t length, int T, int hop);

/// Layer banks 1..layers for signals of `length` samples.
std::vector<WaveletFilterbank> make_banks(const ScatteringConfig& config, std::size_t length,
                                          int layers = -1);

/// Un-normalized coefficients on the hop grid, frames = ceil(length / hop).
struct ScatteringCoefficients {
  Matrix s0;           ///< x * phi
  Matrix abs_lowpass;  ///< |x| * phi, the order-1 normalizer
  Matrix s1;           ///< |x * psi1| * phi, one column per order-1 path
  Matrix s2;           ///< ||x * psi1| * psi2| * phi, one column per order-2 path
  std::vector<ScatteringPath> paths;  ///< order-1 paths then order-2 paths
  std::vector<bool> geometric1;       ///< per order-1 path
  int hop_samples = 0;
  int sample_rate_hz = kDefaultSampleRate;
  double peak = 0.0;  ///< max |x|

  Eigen::Index frames() const noexcept { return s0.rows(); }
};

/// Decimated, OpenMP-parallel kernel. Columns are computed independently so
/// results do not depend on the thread count.
ScatteringCoefficients scattering_coefficients(const AudioBuffer& x, const ScatteringConfig& config,
                                               std::span<const WaveletFilterbank> banks);

/// Log-normalized features, channels [S0] ++ order-1 ++ order-2.
ScatteringFeatures log_normalize(const ScatteringCoefficients& coeffs,
                                 const ScatteringConfig& config);

/// Un-normalized coefficients in the same channel layout as log_normalize.
ScatteringFeatures raw_features(const ScatteringCoefficients& coeffs, bool include_s0);

/// Time-domain log-normalized scattering features.
ScatteringFeatures scattering_transform(const AudioBuffer& x, const ScatteringConfig& config,
                                        std::span<const WaveletFilterbank> banks);

/// Convenience overload that builds the banks for x.
ScatteringFeatures scattering_transform(const AudioBuffer& x, const ScatteringConfig& config);

/// |x * psi_lambda| sampled every `hop` samples, no averaging.
ScatteringFeatures scalogram(const AudioBuffer& x, const WaveletFilterbank& bank1, int hop);

/// Energy fractions on un-normalized coefficients over the padded analysis
/// window: order_fractions[l] = |S_l|^2 / |x|^2 for l = 0..m, residual =
/// |U_{m+1}|^2 / |x|^2 over every layer-(m+1) filter.
struct LayerEnergy {
  std::vector<double> order_fractions;
  double residual = 0.0;

  double total() const noexcept;
};

LayerEnergy layer_energy(const AudioBuffer& x, const ScatteringConfig& config,
                         std::span<const WaveletFilterbank> banks);

/// One wavelet-modulus layer along log-lambda per frame, averaged over the
/// whole axis. Input must contain >= 8 geometric order-1 channels; output has
/// one lowpass channel followed by one channel per frequency wavelet.
ScatteringFeatures frequency_scattering(const ScatteringFeatures& s1_frames,
                                        const FreqScatteringConfig& fcfg);

/// Column-wise concatenation; all parts must share frame count and hop.
ScatteringFeatures concatenate_layers(std::span<const ScatteringFeatures> parts);

namespace reference {

/// Serial, full-rate computation of the same coefficients. Kept as the
/// ground truth for the decimated kernel.
ScatteringCoefficients scattering_coefficients(const AudioBuffer& x, const ScatteringConfig& config,
                                               std::span<const WaveletFilterbank> banks);

}  // namespace reference

}  // namespace wst
