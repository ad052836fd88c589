// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The wstlid Authors

#include "wst/filterbank.hpp"

#include "wst/dsp.hpp"


#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace wst {

namespace {

const double kSqrtLn2 = std::sqrt(std::log(2.0));

double bin_frequency(std::size_t k, std::size_t n) {
  const auto kk = static_cast<double>(k);
  const auto nn = static_cast<double>(n);
  return k <= n / 2 ? 2.0 * kPi * kk / nn : 2.0 * kPi * (kk - nn) / nn;
}

// Half-power full width lambda / Q.
double geometric_sigma(double lambda, int Q) { return lambda / (2.0 * Q * kSqrtLn2); }

double morlet(double w, double center, double sigma) {
  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
  const double beta = std::exp(-center * center * inv2s2);
  return std::exp(-(w - center) * (w - center) * inv2s2) - beta * std::exp(-w * w * inv2s2);
}

BandpassFilter make_morlet(double center, double sigma, FilterKind kind, std::size_t n) {
  BandpassFilter f;
  f.center = center;
  f.kind = kind;
  f.sigma = sigma;
  f.bandwidth = 2.0 * sigma * kSqrtLn2;
  f.beta = std::exp(-center * center / (2.0 * sigma * sigma));
  f.response.assign(n, 0.0);
  for (std::size_t k = 1; k <= n / 2; ++k) {
    double v = morlet(bin_frequency(k, n), center, sigma);
    // The Nyquist bin is its own mirror; split it between +pi and -pi.
    if (k == n / 2) v /= std::sqrt(2.0);
    f.response[k] = v;
  }
  return f;
}

}  // namespace

void FilterbankConfig::validate() const {
  if (T < 256 || T > 16384 || !is_power_of_two(static_cast<std::size_t>(T))) {
    throw std::invalid_argument("FilterbankConfig: T must be a power of two in [256, 16384], got " +
                                std::to_string(T));
  }
  if (Q != 1 && Q != 2 && Q != 4 && Q != 8) {
    throw std::invalid_argument("FilterbankConfig: Q must be one of 1, 2, 4, 8, got " +
                                std::to_string(Q));
  }
  if (!is_power_of_two(n_fft) || n_fft < 2 * static_cast<std::size_t>(T)) {
    throw std::invalid_argument("FilterbankConfig: n_fft must be a power of two >= 2T");
  }
}

std::size_t WaveletFilterbank::geometric_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(bandpass.begin(), bandpass.end(),
                    [](const BandpassFilter& f) { return f.kind == FilterKind::geometric; }));
}

int geometric_filter_count(double extent, int Q) {
  const double v = Q * std::log2(kPi * extent / (2.0 * kPi * Q));
  return std::max(1, static_cast<int>(std::floor(v + 1e-9)) + 1);
}

WaveletFilterbank build_morlet_bank(double extent, int Q, std::size_t n) {
  if (!(extent > 1.0) || Q < 1 || !is_power_of_two(n) || n < 4) {
    throw std::invalid_argument("build_morlet_bank: invalid extent, Q or transform size");
  }
  WaveletFilterbank bank;
  bank.config = FilterbankConfig{static_cast<int>(extent), Q, n};
  bank.extent = extent;

  const double lambda_floor = 2.0 * kPi * Q / extent;
  for (int k = 0;; ++k) {
    const double lambda = kPi * std::pow(2.0, -static_cast<double>(k) / Q);
    if (k > 0 && lambda < lambda_floor * (1.0 - 1e-12)) break;
    bank.bandpass.push_back(
        make_morlet(lambda, geometric_sigma(lambda, Q), FilterKind::geometric, n));
  }
  const double lambda_min = bank.bandpass.back().center;

  const double step = 2.0 * kPi / extent;
  const double linear_sigma = step / (2.0 * kSqrtLn2);
  for (int k = Q - 1; k >= 1; --k) {
    const double c = step * k;
    if (c >= lambda_min * (1.0 - 1e-12)) continue;
    bank.bandpass.push_back(make_morlet(c, linear_sigma, FilterKind::linear, n));
  }

  bank.lowpass_bandwidth = step;
  bank.lowpass_sigma = step / (2.0 * kSqrtLn2);
  bank.lowpass.assign(n, 0.0);
  const double inv2s2 = 1.0 / (2.0 * bank.lowpass_sigma * bank.lowpass_sigma);
  for (std::size_t k = 0; k < n; ++k) {
    const double w = bin_frequency(k, n);
    bank.lowpass[k] = std::exp(-w * w * inv2s2);
  }

  // Tighten the frame: every bump is scaled by the same per-frequency factor
  // so that |phi|^2 + 1/2 sum |psi|^2 = 1 wherever a band-pass filter is
  // present. The factor is smooth across the constant-Q range, where the
  // bumps keep their Morlet shape up to a near-constant gain.
  RealVector band(n, 0.0);
  for (const auto& f : bank.bandpass) {
    for (std::size_t k = 0; k < n; ++k) {
      const double a = f.response[k];
      const double b = f.response[(n - k) % n];
      band[k] += 0.5 * (a * a + b * b);
    }
  }
  RealVector gain(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    if (band[k] > 0.0) {
      const double room = std::max(1.0 - bank.lowpass[k] * bank.lowpass[k], 0.0);
      gain[k] = std::sqrt(room / band[k]);
    }
  }
  for (auto& f : bank.bandpass) {
    for (std::size_t k = 0; k < n; ++k) f.response[k] *= gain[k];
  }
  return bank;
}

WaveletFilterbank build_filterbank(const FilterbankConfig& config) {
  config.validate();
  auto bank = build_morlet_bank(static_cast<double>(config.T), config.Q, config.n_fft);
  bank.config = config;
  return bank;
}

RealVector littlewood_paley(const WaveletFilterbank& bank) {
  const std::size_t n = bank.lowpass.size();
  RealVector a(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) a[k] = bank.lowpass[k] * bank.lowpass[k];
  for (const auto& f : bank.bandpass) {
    for (std::size_t k = 0; k < n; ++k) {
      const double p = f.response[k];
      const double q = f.response[(n - k) % n];
      a[k] += 0.5 * (p * p + q * q);
    }
  }
  return a;
}

std::vector<ScatteringPath> admissible_paths(const WaveletFilterbank& bank1,
                                             const WaveletFilterbank& bank2) {
  std::vector<ScatteringPath> paths;
  for (std::size_t i = 0; i < bank1.bandpass.size(); ++i) {
    paths.push_back({1, bank1.bandpass[i].center, std::nullopt, i, 0});
  }
  for (std::size_t i = 0; i < bank1.bandpass.size(); ++i) {
    const double l1 = bank1.bandpass[i].center;
    for (std::size_t j = 0; j < bank2.bandpass.size(); ++j) {
      const double l2 = bank2.bandpass[j].center;
      if (l2 < l1 * (1.0 - 1e-12)) paths.push_back({2, l1, l2, i, j});
    }
  }
  std::stable_sort(paths.begin(), paths.end(), [](const ScatteringPath& a, const ScatteringPath& b) {
    if (a.order != b.order) return a.order < b.order;
    if (a.lambda1 != b.lambda1) return a.lambda1 > b.lambda1;
    return a.lambda2.value_or(0.0) > b.lambda2.value_or(0.0);
  });
  return paths;
}

nlohmann::json filterbank_to_json(const WaveletFilterbank& bank, int sample_rate_hz) {
  const double to_hz = sample_rate_hz / (2.0 * kPi);
  nlohmann::json filters = nlohmann::json::array();
  for (const auto& f : bank.bandpass) {
    filters.push_back({{"center", f.center},
                       {"center_hz", f.center * to_hz},
                       {"kind", f.kind == FilterKind::geometric ? "geometric" : "linear"},
                       {"bandwidth", f.bandwidth},
                       {"bandwidth_hz", f.bandwidth * to_hz}});
  }
  return {{"T", bank.config.T},
          {"Q", bank.config.Q},
          {"n_fft", bank.n_fft()},
          {"lowpass_bandwidth", bank.lowpass_bandwidth},
          {"lowpass_bandwidth_hz", bank.lowpass_bandwidth * to_hz},
          {"bandpass", filters}};
}

}  // namespace wst
