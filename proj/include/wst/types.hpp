// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The wstlid Authors

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <vector>

namespace wst {

using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;
using RealVector = std::vector<double>;

/// Frames x channels, row-major so a frame is contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr int kDefaultSampleRate = 8000;
inline constexpr double kPi = 3.14159265358979323846;

/// Mono PCM signal. Samples are finite; nominal amplitude range is [-1, 1].
class AudioBuffer {
 public:
  AudioBuffer() = default;
  explicit AudioBuffer(RealVector samples, int sample_rate_hz = kDefaultSampleRate);

  const RealVector& samples() const noexcept { return samples_; }
  int sample_rate_hz() const noexcept { return sample_rate_hz_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  double duration_s() const noexcept {
    return static_cast<double>(samples_.size()) / sample_rate_hz_;
  }
  double operator[](std::size_t i) const noexcept { return samples_[i]; }

 private:
  RealVector samples_;
  int sample_rate_hz_ = kDefaultSampleRate;
};

enum class ChannelKind {
  order0,
  order1,
  order2,
  freq_lowpass,
  freq_bandpass,
  cepstral,
};

const char* to_string(ChannelKind kind) noexcept;

/// What one feature column holds. Frequencies are normalized rad/sample;
/// fields that do not apply to a kind are zero.
struct ChannelInfo {
  ChannelKind kind = ChannelKind::order0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double mu = 0.0;       ///< frequency-axis wavelet center (rad/bin)
  bool geometric = true; ///< order-1 channel comes from the constant-Q part
  int index = 0;         ///< cepstral coefficient index

  bool operator==(const ChannelInfo&) const = default;
};

/// Frames x channels feature matrix with its channel layout.
struct FeatureMatrix {
  Matrix data;
  std::vector<ChannelInfo> channels;
  int hop_samples = 0;
  int sample_rate_hz = kDefaultSampleRate;
  bool normalized = false;

  Eigen::Index frames() const noexcept { return data.rows(); }
  Eigen::Index width() const noexcept { return data.cols(); }
};

}  // namespace wst
