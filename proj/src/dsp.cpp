// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The wstlid Authors

#include "wst/dsp.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <tuple>

namespace wst {

AudioBuffer::AudioBuffer(RealVector samples, int sample_rate_hz)
    : samples_(std::move(samples)), sample_rate_hz_(sample_rate_hz) {
  if (sample_rate_hz_ <= 0) {
    throw std::invalid_argument("AudioBuffer: sample rate must be positive");
  }
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!std::isfinite(samples_[i])) {
      throw std::invalid_argument("AudioBuffer: non-finite sample at index " +
                                  std::to_string(i));
    }
  }
}

const char* to_string(ChannelKind kind) noexcept {
  switch (kind) {
    case ChannelKind::order0: return "order0";
    case ChannelKind::order1: return "order1";
    case ChannelKind::order2: return "order2";
    case ChannelKind::freq_lowpass: return "freq_lowpass";
    case ChannelKind::freq_bandpass: return "freq_bandpass";
    case ChannelKind::cepstral: return "cepstral";
  }
  return "unknown";
}

ComplexSpectrum::ComplexSpectrum(ComplexVector bins) : bins_(std::move(bins)) {
  if (!is_power_of_two(bins_.size())) {
    throw std::invalid_argument("ComplexSpectrum: length must be a power of two");
  }
}

bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) noexcept {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

namespace {

// FFTW planning is not thread-safe, execution with the new-array interface is.
// Each size and kind gets an aligned plan and an unaligned fallback.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(std::size_t n, int sign, fftw_complex* data) {
    const bool aligned = is_aligned(data);
    return find_or_make(n, sign, aligned, [&] {
      return fftw_plan_dft_1d(static_cast<int>(n), data, data, sign, flags(aligned));
    });
  }

  fftw_plan get_r2c(std::size_t n, double* in, fftw_complex* out) {
    const bool aligned = is_aligned(in) && is_aligned(out);
    return find_or_make(n, kR2C, aligned, [&] {
      return fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, flags(aligned));
    });
  }

  fftw_plan get_c2r(std::size_t n, fftw_complex* in, double* out) {
    const bool aligned = is_aligned(in) && is_aligned(out);
    return find_or_make(n, kC2R, aligned, [&] {
      return fftw_plan_dft_c2r_1d(static_cast<int>(n), in, out, flags(aligned));
    });
  }

 private:
  static constexpr int kR2C = 2;
  static constexpr int kC2R = 3;

  static bool is_aligned(double* p) { return fftw_alignment_of(p) == 0; }
  static bool is_aligned(fftw_complex* p) { return is_aligned(reinterpret_cast<double*>(p)); }
  static unsigned flags(bool aligned) {
    return aligned ? FFTW_ESTIMATE : FFTW_ESTIMATE | FFTW_UNALIGNED;
  }

  template <class Make>
  fftw_plan find_or_make(std::size_t n, int kind, bool aligned, Make&& make) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(n, kind, aligned);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    fftw_plan plan = make();
    if (plan == nullptr) throw std::runtime_error("fftw: planning failed");
    plans_.emplace(key, plan);
    return plan;
  }

  std::mutex mutex_;
  std::map<std::tuple<std::size_t, int, bool>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

void execute(std::span<Complex> data, int sign) {
  if (data.empty()) throw std::invalid_argument("fft: empty input");
  if (!is_power_of_two(data.size())) {
    throw std::invalid_argument("fft: length must be a power of two");
  }
  if (data.size() == 1) return;
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan_cache().get(data.size(), sign, ptr), ptr, ptr);
}

}  // namespace

void fft_inplace(std::span<Complex> data) { execute(data, FFTW_FORWARD); }

void ifft_inplace(std::span<Complex> data) {
  execute(data, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(data.size());
  for (auto& v : data) v *= scale;
}

ComplexSpectrum spectrum(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("spectrum: empty input");
  const std::size_t n = x.size();
  if (!is_power_of_two(n)) throw std::invalid_argument("fft: length must be a power of two");
  ComplexVector bins(n);
  if (n == 1) {
    bins[0] = x[0];
    return ComplexSpectrum(std::move(bins));
  }
  // Out-of-place r2c leaves its input untouched.
  auto* in = const_cast<double*>(x.data());
  auto* out = reinterpret_cast<fftw_complex*>(bins.data());
  fftw_execute_dft_r2c(plan_cache().get_r2c(n, in, out), in, out);
  for (std::size_t k = n / 2 + 1; k < n; ++k) bins[k] = std::conj(bins[n - k]);
  return ComplexSpectrum(std::move(bins));
}

RealVector inverse_real(std::span<const Complex> bins) {
  const std::size_t n = bins.size();
  if (n == 0 || !is_power_of_two(n)) throw std::invalid_argument("inverse_real: length must be a power of two");
  return inverse_half(ComplexVector(bins.begin(), bins.begin() + static_cast<long>(n / 2 + 1)), n);
}

RealVector inverse_half(ComplexVector half, std::size_t n) {
  if (half.size() != n / 2 + 1) throw std::invalid_argument("inverse_half: expected N/2 + 1 bins");
  RealVector out(n);
  inverse_half_into(half, out);
  const double scale = 1.0 / static_cast<double>(n);
  for (auto& v : out) v *= scale;
  return out;
}

void inverse_half_into(std::span<Complex> half, std::span<double> out) {
  const std::size_t n = out.size();
  if (n == 0 || !is_power_of_two(n)) throw std::invalid_argument("inverse_half: length must be a power of two");
  if (half.size() != n / 2 + 1) throw std::invalid_argument("inverse_half: expected N/2 + 1 bins");
  if (n == 1) {
    out[0] = half[0].real();
    return;
  }
  auto* in = reinterpret_cast<fftw_complex*>(half.data());
  fftw_execute_dft_c2r(plan_cache().get_c2r(n, in, out.data()), in, out.data());
}

ComplexSpectrum spectrum(std::span<const Complex> x) {
  if (x.empty()) throw std::invalid_argument("spectrum: empty input");
  ComplexVector bins(x.begin(), x.end());
  fft_inplace(bins);
  return ComplexSpectrum(std::move(bins));
}

ComplexVector inverse(const ComplexSpectrum& spec) {
  ComplexVector out = spec.bins();
  ifft_inplace(out);
  return out;
}

ComplexVector fold_inverse(std::span<const Complex> product, std::size_t subsample) {
  const std::size_t n = product.size();
  if (subsample == 0 || !is_power_of_two(subsample) || n % subsample != 0) {
    throw std::invalid_argument("filter_apply: subsample must be a power of two dividing N");
  }
  const std::size_t m = n / subsample;
  ComplexVector folded(m, Complex{});
  for (std::size_t k = 0; k < n; ++k) folded[k % m] += product[k];
  if (subsample > 1) {
    const double inv = 1.0 / static_cast<double>(subsample);
    for (auto& v : folded) v *= inv;
  }
  ifft_inplace(folded);
  return folded;
}

ComplexVector filter_apply(const ComplexSpectrum& x_spec, const ComplexSpectrum& h_spec,
                           std::size_t subsample) {
  if (x_spec.size() != h_spec.size() || x_spec.size() == 0) {
    throw std::invalid_argument("filter_apply: spectrum length mismatch");
  }
  ComplexVector product(x_spec.size());
  for (std::size_t k = 0; k < product.size(); ++k) product[k] = x_spec[k] * h_spec[k];
  return fold_inverse(product, subsample);
}

ComplexVector filter_apply(const ComplexSpectrum& x_spec, std::span<const double> h_response,
                           std::size_t subsample) {
  if (x_spec.size() != h_response.size() || x_spec.size() == 0) {
    throw std::invalid_argument("filter_apply: spectrum length mismatch");
  }
  ComplexVector product(x_spec.size());
  for (std::size_t k = 0; k < product.size(); ++k) product[k] = x_spec[k] * h_response[k];
  return fold_inverse(product, subsample);
}

AudioBuffer time_shift(const AudioBuffer& x, long c) {
  const auto n = static_cast<long>(x.size());
  if (n == 0 || std::labs(c) >= n) {
    throw std::invalid_argument("time_shift: |c| must be smaller than the signal length");
  }
  RealVector out(x.size());
  for (long i = 0; i < n; ++i) {
    long src = (i - c) % n;
    if (src < 0) src += n;
    out[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(src)];
  }
  return AudioBuffer(std::move(out), x.sample_rate_hz());
}

namespace {

constexpr int kWarpHalfTaps = 8;

double blackman(double t) {
  // t in [-kWarpHalfTaps, kWarpHalfTaps]
  const double u = (t + kWarpHalfTaps) / (2.0 * kWarpHalfTaps);
  return 0.42 - 0.5 * std::cos(2.0 * kPi * u) + 0.08 * std::cos(4.0 * kPi * u);
}

double sinc(double t) {
  if (std::abs(t) < 1e-12) return 1.0;
  return std::sin(kPi * t) / (kPi * t);
}

}  // namespace

AudioBuffer time_warp(const AudioBuffer& x, double eps) {
  if (!(eps >= 0.0 && eps < 0.1)) {
    throw std::invalid_argument("time_warp: eps must lie in [0, 0.1)");
  }
  const auto n = static_cast<long>(x.size());
  RealVector out(x.size(), 0.0);
  const auto& s = x.samples();
  for (long i = 0; i < n; ++i) {
    const double t = (1.0 - eps) * static_cast<double>(i);
    const double base = std::floor(t);
    const double frac = t - base;
    if (frac < 1e-12) {
      const auto k = static_cast<long>(base);
      out[static_cast<std::size_t>(i)] = (k >= 0 && k < n) ? s[static_cast<std::size_t>(k)] : 0.0;
      continue;
    }
    double acc = 0.0;
    double wsum = 0.0;
    for (int j = -kWarpHalfTaps + 1; j <= kWarpHalfTaps; ++j) {
      const long k = static_cast<long>(base) + j;
      const double d = t - static_cast<double>(k);
      const double w = sinc(d) * blackman(d);
      wsum += w;
      if (k >= 0 && k < n) acc += w * s[static_cast<std::size_t>(k)];
    }
    out[static_cast<std::size_t>(i)] = acc / wsum;
  }
  return AudioBuffer(std::move(out), x.sample_rate_hz());
}

RealVector reflect_pad(std::span<const double> x, std::size_t left, std::size_t total) {
  const std::size_t n = x.size();
  if (n == 0) throw std::invalid_argument("reflect_pad: empty input");
  if (total < n + left) throw std::invalid_argument("reflect_pad: total too small");
  RealVector out(total);
  if (n == 1) {
    std::fill(out.begin(), out.end(), x[0]);
    return out;
  }
  const long period = 2 * static_cast<long>(n - 1);
  for (std::size_t i = 0; i < total; ++i) {
    long j = (static_cast<long>(i) - static_cast<long>(left)) % period;
    if (j < 0) j += period;
    if (j >= static_cast<long>(n)) j = period - j;
    out[i] = x[static_cast<std::size_t>(j)];
  }
  return out;
}

}  // namespace wst
