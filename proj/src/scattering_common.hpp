// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The wstlid Authors

#pragma once

#include "wst/dsp.hpp"
#include "wst/scattering.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace wst::detail {

/// Where the signal sits inside the padded transform and which decimated
/// samples become output frames.
struct Layout {
  std::size_t n = 0;       ///< padded length
  std::size_t left = 0;    ///< reflect padding before the signal, multiple of hop
  std::size_t frames = 0;  ///< ceil(length / hop)
  std::size_t hop = 0;

  std::size_t first_frame() const noexcept { return left / hop; }
};

Layout make_layout(std::size_t length, int T, int hop);

/// Validates banks against config and padded size; needs `layers` banks.
void check_banks(const ScatteringConfig& config, std::span<const WaveletFilterbank> banks,
                 std::size_t n_fft, int layers);

RealVector padded_signal(const AudioBuffer& x, const Layout& layout);

/// Full-grid response h (length N) read at bin j of a grid of m <= N bins.
inline double response_at(const RealVector& h, std::size_t m, std::size_t j) noexcept {
  return j <= m / 2 ? h[j] : h[h.size() - (m - j)];
}

/// Path list and per-order-1 geometric flags shared by both kernels.
void describe_paths(ScatteringCoefficients& out, const WaveletFilterbank& bank1,
                    const WaveletFilterbank* bank2);

double peak_amplitude(const AudioBuffer& x) noexcept;

/// Real part of the frames picked out of a hop-rate sequence.
void store_frames(const ComplexVector& hop_rate, const Layout& layout, Matrix& dst, Eigen::Index col);
void store_frames(std::span<const double> hop_rate, const Layout& layout, Matrix& dst, Eigen::Index col);

}  // namespace wst::detail
