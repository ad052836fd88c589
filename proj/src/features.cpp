// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The wstlid Authors

#include "wst/features.hpp"

#include "wst/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace wst {

namespace {

std::size_t ms_to_samples(double ms, int rate) {
  return static_cast<std::size_t>(std::lround(ms * 1e-3 * rate));
}

}  // namespace

void VadConfig::validate() const {
  if (!(frame_ms > 0.0) || !(hop_ms > 0.0)) {
    throw std::invalid_argument("VadConfig: frame and hop must be positive");
  }
  if (!(threshold_db < 0.0)) throw std::invalid_argument("VadConfig: threshold_db must be < 0");
}

void MfccConfig::validate() const {
  if (n_mels < 1 || n_coeffs < 1 || n_coeffs > n_mels) {
    throw std::invalid_argument("MfccConfig: need 1 <= n_coeffs <= n_mels");
  }
  if (sample_rate_hz <= 0 || window_samples() < 2 || hop_samples() < 1) {
    throw std::invalid_argument("MfccConfig: invalid window, hop or sample rate");
  }
}

std::size_t MfccConfig::window_samples() const noexcept {
  return ms_to_samples(window_ms, sample_rate_hz);
}

std::size_t MfccConfig::hop_samples() const noexcept { return ms_to_samples(hop_ms, sample_rate_hz); }

AudioBuffer energy_vad(const AudioBuffer& x, const VadConfig& cfg) {
  cfg.validate();
  if (x.empty()) throw std::invalid_argument("energy_vad: empty input");
  const std::size_t win = std::max<std::size_t>(1, ms_to_samples(cfg.frame_ms, x.sample_rate_hz()));
  const std::size_t hop = std::max<std::size_t>(1, ms_to_samples(cfg.hop_ms, x.sample_rate_hz()));
  const std::size_t n = x.size();
  const std::size_t frames = (n + hop - 1) / hop;
  const auto& s = x.samples();

  RealVector energy(frames, 0.0);
  for (std::size_t i = 0; i < frames; ++i) {
    const std::size_t end = std::min(n, i * hop + win);
    for (std::size_t k = i * hop; k < end; ++k) energy[i] += s[k] * s[k];
  }
  const double peak = *std::max_element(energy.begin(), energy.end());
  RealVector kept;
  if (peak <= 0.0) return AudioBuffer(std::move(kept), x.sample_rate_hz());
  const double floor = peak * std::pow(10.0, cfg.threshold_db / 10.0);
  kept.reserve(n);
  for (std::size_t i = 0; i < frames; ++i) {
    if (energy[i] > 0.0 && energy[i] >= floor) {
      const std::size_t end = std::min(n, (i + 1) * hop);
      kept.insert(kept.end(), s.begin() + static_cast<long>(i * hop), s.begin() + static_cast<long>(end));
    }
  }
  return AudioBuffer(std::move(kept), x.sample_rate_hz());
}

std::vector<AudioBuffer> chunk_utterance(const AudioBuffer& x, double chunk_s) {
  if (x.empty()) throw std::invalid_argument("chunk_utterance: empty input");
  if (!(chunk_s >= 1.0)) throw std::invalid_argument("chunk_utterance: chunk_s must be >= 1 s");
  const auto rate = static_cast<std::size_t>(x.sample_rate_hz());
  const auto len = static_cast<std::size_t>(std::llround(chunk_s * static_cast<double>(rate)));
  std::vector<AudioBuffer> out;
  const auto& s = x.samples();
  for (std::size_t start = 0; start < x.size(); start += len) {
    const std::size_t end = std::min(x.size(), start + len);
    if (end - start < rate) break;
    out.emplace_back(RealVector(s.begin() + static_cast<long>(start), s.begin() + static_cast<long>(end)),
                     x.sample_rate_hz());
  }
  return out;
}

double hz_to_mel(double hz) noexcept { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) noexcept { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Matrix mel_filterbank(int n_mels, std::size_t n_fft, int sample_rate_hz, double fmin, double fmax) {
  if (n_mels < 1 || n_fft < 2 || !(fmax > fmin) || fmin < 0.0) {
    throw std::invalid_argument("mel_filterbank: invalid parameters");
  }
  const std::size_t bins = n_fft / 2 + 1;
  const double mlo = hz_to_mel(fmin);
  const double mhi = hz_to_mel(fmax);
  RealVector edges(static_cast<std::size_t>(n_mels) + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(mlo + (mhi - mlo) * static_cast<double>(i) / (n_mels + 1));
  }
  Matrix w = Matrix::Zero(n_mels, static_cast<Eigen::Index>(bins));
  for (int m = 0; m < n_mels; ++m) {
    const double lo = edges[static_cast<std::size_t>(m)];
    const double mid = edges[static_cast<std::size_t>(m) + 1];
    const double hi = edges[static_cast<std::size_t>(m) + 2];
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate_hz / static_cast<double>(n_fft);
      double v = 0.0;
      if (f > lo && f <= mid) v = (f - lo) / (mid - lo);
      else if (f > mid && f < hi) v = (hi - f) / (hi - mid);
      w(m, static_cast<Eigen::Index>(k)) = v;
    }
  }
  return w;
}

Matrix dct_matrix(int n) {
  if (n < 1) throw std::invalid_argument("dct_matrix: n must be positive");
  Matrix d(n, n);
  for (int k = 0; k < n; ++k) {
    const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / n);
    for (int i = 0; i < n; ++i) d(k, i) = scale * std::cos(kPi * k * (i + 0.5) / n);
  }
  return d;
}

FeatureMatrix mfcc(const AudioBuffer& x, const MfccConfig& cfg) {
  cfg.validate();
  const std::size_t win = cfg.window_samples();
  const std::size_t hop = cfg.hop_samples();
  if (x.size() < win) {
    throw std::invalid_argument("mfcc: input shorter than one analysis window (" +
                                std::to_string(x.size()) + " < " + std::to_string(win) + ")");
  }
  const std::size_t n_fft = next_power_of_two(win);
  const std::size_t frames = (x.size() - win) / hop + 1;
  const Matrix mel = mel_filterbank(cfg.n_mels, n_fft, cfg.sample_rate_hz, 0.0, cfg.sample_rate_hz / 2.0);
  const Matrix dct = dct_matrix(cfg.n_mels).topRows(cfg.n_coeffs);

  RealVector window(win);
  for (std::size_t i = 0; i < win; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(win));
  }

  FeatureMatrix out;
  out.data.resize(static_cast<Eigen::Index>(frames), cfg.n_coeffs);
  const auto& s = x.samples();
  ComplexVector buf(n_fft);
  Eigen::VectorXd power(static_cast<Eigen::Index>(n_fft / 2 + 1));
  for (std::size_t f = 0; f < frames; ++f) {
    std::fill(buf.begin(), buf.end(), Complex{});
    for (std::size_t i = 0; i < win; ++i) buf[i] = s[f * hop + i] * window[i];
    fft_inplace(buf);
    for (Eigen::Index k = 0; k < power.size(); ++k) power[k] = std::norm(buf[static_cast<std::size_t>(k)]);
    Eigen::VectorXd logmel = mel * power;
    for (Eigen::Index m = 0; m < logmel.size(); ++m) logmel[m] = std::log(std::max(logmel[m], 1e-10));
    out.data.row(static_cast<Eigen::Index>(f)) = (dct * logmel).transpose();
  }
  for (int c = 0; c < cfg.n_coeffs; ++c) {
    ChannelInfo info;
    info.kind = ChannelKind::cepstral;
    info.index = c;
    out.channels.push_back(info);
  }
  out.hop_samples = static_cast<int>(hop);
  out.sample_rate_hz = x.sample_rate_hz();
  out.normalized = false;
  return out;
}

Matrix cms(const Matrix& features) {
  if (features.rows() < 1) throw std::invalid_argument("cms: need at least one frame");
  // Centered on the first frame so constant columns cancel exactly.
  Matrix out = features.rowwise() - features.row(0);
  out.rowwise() -= out.colwise().mean();
  return out;
}

void cms_inplace(FeatureMatrix& features) { features.data = cms(features.data); }

RealVector pool_statistics(const Matrix& features) {
  if (features.rows() < 1) throw std::invalid_argument("pool_statistics: need at least one frame");
  const Eigen::Index d = features.cols();
  RealVector out(static_cast<std::size_t>(2 * d));
  const Eigen::RowVectorXd mean = features.colwise().mean();
  for (Eigen::Index c = 0; c < d; ++c) {
    const double var = (features.col(c).array() - mean[c]).square().mean();
    out[static_cast<std::size_t>(c)] = mean[c];
    out[static_cast<std::size_t>(d + c)] = std::sqrt(var);
  }
  return out;
}

void PipelineConfig::validate() const {
  vad.validate();
  if (!(chunk_s >= 1.0)) throw std::invalid_argument("PipelineConfig: chunk_s must be >= 1 s");
  if (kind == FeatureKind::mfcc) mfcc.validate();
  else scattering.validate();
}

FeatureExtractor::FeatureExtractor(PipelineConfig config) : config_(std::move(config)) {
  config_.validate();
}

std::shared_ptr<const FeatureExtractor::Banks> FeatureExtractor::banks_for(std::size_t length) const {
  const auto& sc = config_.scattering;
  const std::size_t n = padded_length(length, sc.T, sc.hop());
  std::lock_guard lock(mutex_);
  auto it = banks_.find(n);
  if (it == banks_.end()) {
    it = banks_.emplace(n, std::make_shared<const Banks>(make_banks(sc, length))).first;
  }
  return it->second;
}

FeatureMatrix FeatureExtractor::chunk_features(const AudioBuffer& chunk) const {
  FeatureMatrix f;
  if (config_.kind == FeatureKind::mfcc) {
    f = mfcc(chunk, config_.mfcc);
  } else {
    const auto banks = banks_for(chunk.size());
    f = scattering_transform(chunk, config_.scattering, *banks);
    if (config_.scattering.freq_scattering) {
      const FeatureMatrix freq = frequency_scattering(f, *config_.scattering.freq_scattering);
      const FeatureMatrix parts[] = {std::move(f), freq};
      f = concatenate_layers(parts);
    }
  }
  if (config_.apply_cms) cms_inplace(f);
  return f;
}

std::vector<FeatureMatrix> FeatureExtractor::extract(const AudioBuffer& x) const {
  std::vector<FeatureMatrix> out;
  if (x.empty()) return out;
  const AudioBuffer voiced = energy_vad(x, config_.vad);
  if (voiced.empty()) return out;
  for (const auto& chunk : chunk_utterance(voiced, config_.chunk_s)) {
    if (config_.kind == FeatureKind::mfcc && chunk.size() < config_.mfcc.window_samples()) continue;
    out.push_back(chunk_features(chunk));
  }
  return out;
}

std::vector<FeatureMatrix> extract_pipeline(const AudioBuffer& x, const PipelineConfig& cfg) {
  return FeatureExtractor(cfg).extract(x);
}

}  // namespace wst
