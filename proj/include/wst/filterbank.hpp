// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The wstlid Authors

#pragma once

#include "wst/types.hpp"

#include <json.hpp>

#include <cstddef>
#include <optional>
#include <vector>

namespace wst {

/// Averaging span T (samples), octave resolution Q, transform size n_fft.
struct FilterbankConfig {
  int T = 256;
  int Q = 2;
  std::size_t n_fft = 512;

  /// Throws std::invalid_argument unless T is a power of two in
  /// [256, 16384], Q is one of {1, 2, 4, 8} and n_fft is a power of two >= 2T.
  void validate() const;
};

enum class FilterKind { geometric, linear };

/// One analytic Morlet band-pass filter sampled on the n_fft grid. Bins above
/// N/2 (negative frequencies) are zero.
struct BandpassFilter {
  double center = 0.0;     ///< rad/sample
  FilterKind kind = FilterKind::geometric;
  double sigma = 0.0;      ///< Gaussian std of the bump, rad/sample
  double bandwidth = 0.0;  ///< half-power full width, rad/sample
  double beta = 0.0;       ///< zero-mean correction weight
  RealVector response;
};

struct WaveletFilterbank {
  FilterbankConfig config;
  double extent = 0.0;  ///< averaging span the bank was designed for
  std::vector<BandpassFilter> bandpass;  ///< centers strictly decreasing
  RealVector lowpass;                    ///< Gaussian phi-hat, even in frequency
  double lowpass_sigma = 0.0;
  double lowpass_bandwidth = 0.0;

  std::size_t n_fft() const noexcept { return lowpass.size(); }
  std::size_t geometric_count() const noexcept;
};

/// Time-domain bank for one scattering layer. Highest center frequency is pi.
WaveletFilterbank build_filterbank(const FilterbankConfig& config);

/// Same construction without the time-domain range checks: `extent` may be
/// any value > 1 and Q any positive integer. Used along the log-frequency axis.
WaveletFilterbank build_morlet_bank(double extent, int Q, std::size_t n_fft);

/// floor(Q log2(pi T / (2 pi Q))) + 1, clamped at 1.
int geometric_filter_count(double extent, int Q);

/// A(w) = |phi(w)|^2 + 1/2 sum (|psi(w)|^2 + |psi(-w)|^2) on the n_fft grid.
RealVector littlewood_paley(const WaveletFilterbank& bank);

/// Index pair into the layer-1 / layer-2 banks.
struct ScatteringPath {
  int order = 1;
  double lambda1 = 0.0;
  std::optional<double> lambda2;
  std::size_t filter1 = 0;
  std::size_t filter2 = 0;
};

/// Order-1 paths (bank1 order) followed by order-2 paths with lambda2 < lambda1,
/// sorted by (lambda1 desc, lambda2 desc). bank2 is expected to use Q = 1.
std::vector<ScatteringPath> admissible_paths(const WaveletFilterbank& bank1,
                                             const WaveletFilterbank& bank2);

/// Debug dump: centers, kinds and bandwidths in rad/sample and Hz.
nlohmann::json filterbank_to_json(const WaveletFilterbank& bank, int sample_rate_hz);

}  // namespace wst
