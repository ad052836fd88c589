// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The wstlid Authors

#pragma once

#include "wst/scattering.hpp"
#include "wst/types.hpp"

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace wst {

struct VadConfig {
  double frame_ms = 25.0;
  double hop_ms = 10.0;
  double threshold_db = -35.0;  ///< relative to the loudest frame

  void validate() const;
};

struct MfccConfig {
  int n_coeffs = 20;
  double window_ms = 25.0;
  double hop_ms = 10.0;
  int n_mels = 20;
  int sample_rate_hz = kDefaultSampleRate;

  void validate() const;
  std::size_t window_samples() const noexcept;
  std::size_t hop_samples() const noexcept;
};

/// Drops frames whose energy is more than |threshold_db| below the loudest
/// frame. Frame i owns samples [i*hop, (i+1)*hop); its energy is measured over
/// the full analysis window starting at i*hop. May return an empty buffer.
AudioBuffer energy_vad(const AudioBuffer& x, const VadConfig& cfg = {});

/// Non-overlapping chunks of chunk_s seconds; a trailing chunk is kept only
/// if it lasts at least one second.
std::vector<AudioBuffer> chunk_utterance(const AudioBuffer& x, double chunk_s = 3.0);

double hz_to_mel(double hz) noexcept;
double mel_to_hz(double mel) noexcept;

/// n_mels x (n_fft/2 + 1) triangular weights, HTK mel scale, edges evenly
/// spaced in mel between fmin and fmax.
Matrix mel_filterbank(int n_mels, std::size_t n_fft, int sample_rate_hz, double fmin, double fmax);

/// Orthonormal DCT-II, n x n, row k is basis function k.
Matrix dct_matrix(int n);

/// frames = floor((L - window) / hop) + 1. Throws if x is shorter than a window.
FeatureMatrix mfcc(const AudioBuffer& x, const MfccConfig& cfg = {});

/// Subtracts each column's mean over frames.
Matrix cms(const Matrix& features);
void cms_inplace(FeatureMatrix& features);

/// Per-column mean followed by per-column standard deviation over frames.
RealVector pool_statistics(const Matrix& features);

enum class FeatureKind { mfcc, wst };

struct PipelineConfig {
  FeatureKind kind = FeatureKind::wst;
  VadConfig vad;
  double chunk_s = 3.0;
  MfccConfig mfcc;
  ScatteringConfig scattering;
  bool apply_cms = true;

  void validate() const;
};

/// VAD, chunking, per-chunk features (with optional frequency scattering) and
/// CMS. Filterbanks are built once per padded size and shared across threads.
class FeatureExtractor {
 public:
  explicit FeatureExtractor(PipelineConfig config);

  const PipelineConfig& config() const noexcept { return config_; }

  /// Empty when the utterance is entirely silent.
  std::vector<FeatureMatrix> extract(const AudioBuffer& x) const;

  /// Features of one chunk, without VAD or chunking.
  FeatureMatrix chunk_features(const AudioBuffer& chunk) const;

 private:
  using Banks = std::vector<WaveletFilterbank>;
  std::shared_ptr<const Banks> banks_for(std::size_t length) const;

  PipelineConfig config_;
  mutable std::mutex mutex_;
  mutable std::map<std::size_t, std::shared_ptr<const Banks>> banks_;
};

std::vector<FeatureMatrix> extract_pipeline(const AudioBuffer& x, const PipelineConfig& cfg);

}  // namespace wst
