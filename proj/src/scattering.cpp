// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The wstlid Authors

#include "wst/scattering.hpp"

#include "scattering_common.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace wst {

void FreqScatteringConfig::validate() const {
  if (Qf < 3 || Qf > 8) {
    throw std::invalid_argument("FreqScatteringConfig: Qf must lie in [3, 8], got " +
                                std::to_string(Qf));
  }
  if (order != 1) throw std::invalid_argument("FreqScatteringConfig: only order 1 is supported");
}

void ScatteringConfig::validate() const {
  FilterbankConfig{T, Q1, 2 * static_cast<std::size_t>(T)}.validate();
  FilterbankConfig{T, Q2, 2 * static_cast<std::size_t>(T)}.validate();
  if (m < 1 || m > 2) throw std::invalid_argument("ScatteringConfig: m must be 1 or 2");
  if (!(log_eps > 0.0) || !std::isfinite(log_eps)) {
    throw std::invalid_argument("ScatteringConfig: log_eps must be positive");
  }
  if (oversampling < 0 || (T >> oversampling) < 1 || ((T >> oversampling) << oversampling) != T) {
    throw std::invalid_argument("ScatteringConfig: T / 2^oversampling must be a positive integer");
  }
  if (freq_scattering) freq_scattering->validate();
}

double LayerEnergy::total() const noexcept {
  double t = residual;
  for (double e : order_fractions) t += e;
  return t;
}

std::size_t padded_length(std::size_t length, int T, int hop) {
  return detail::make_layout(length, T, hop).n;
}

namespace detail {

Layout make_layout(std::size_t length, int T, int hop) {
  if (length == 0) throw std::invalid_argument("scattering: empty input");
  if (T < 1 || hop < 1) throw std::invalid_argument("scattering: T and hop must be positive");
  Layout l;
  l.hop = static_cast<std::size_t>(hop);
  l.frames = (length + l.hop - 1) / l.hop;
  l.n = next_power_of_two(std::max(length + static_cast<std::size_t>(T),
                                   2 * static_cast<std::size_t>(T)));
  for (;;) {
    if (l.n % l.hop != 0) throw std::invalid_argument("scattering: hop must divide padded length");
    l.left = ((l.n - length) / 2) / l.hop * l.hop;
    if (l.left + l.frames * l.hop <= l.n) break;
    l.n *= 2;
  }
  return l;
}

void check_banks(const ScatteringConfig& config, std::span<const WaveletFilterbank> banks,
                 std::size_t n_fft, int layers) {
  if (banks.size() < static_cast<std::size_t>(layers)) {
    throw std::invalid_argument("scattering: expected " + std::to_string(layers) +
                                " filterbanks, got " + std::to_string(banks.size()));
  }
  for (int l = 0; l < layers; ++l) {
    const auto& b = banks[static_cast<std::size_t>(l)];
    if (b.config.T != config.T || b.config.Q != config.layer_q(l + 1)) {
      throw std::invalid_argument("scattering: filterbank " + std::to_string(l + 1) +
                                  " does not match T/Q of the configuration");
    }
    if (b.n_fft() != n_fft) {
      throw std::invalid_argument("scattering: filterbank size " + std::to_string(b.n_fft()) +
                                  " does not match padded length " + std::to_string(n_fft));
    }
  }
}

RealVector padded_signal(const AudioBuffer& x, const Layout& layout) {
  return reflect_pad(x.samples(), layout.left, layout.n);
}

void describe_paths(ScatteringCoefficients& out, const WaveletFilterbank& bank1,
                    const WaveletFilterbank* bank2) {
  if (bank2 != nullptr) {
    out.paths = admissible_paths(bank1, *bank2);
  } else {
    out.paths.clear();
    for (std::size_t i = 0; i < bank1.bandpass.size(); ++i) {
      out.paths.push_back({1, bank1.bandpass[i].center, std::nullopt, i, 0});
    }
  }
  out.geometric1.clear();
  for (const auto& f : bank1.bandpass) out.geometric1.push_back(f.kind == FilterKind::geometric);
}

double peak_amplitude(const AudioBuffer& x) noexcept {
  double p = 0.0;
  for (double v : x.samples()) p = std::max(p, std::abs(v));
  return p;
}

void store_frames(const ComplexVector& hop_rate, const Layout& layout, Matrix& dst,
                  Eigen::Index col) {
  const std::size_t f0 = layout.first_frame();
  for (std::size_t f = 0; f < layout.frames; ++f) {
    dst(static_cast<Eigen::Index>(f), col) = hop_rate[f0 + f].real();
  }
}

void store_frames(std::span<const double> hop_rate, const Layout& layout, Matrix& dst, Eigen::Index col) {
  const std::size_t f0 = layout.first_frame();
  for (std::size_t f = 0; f < layout.frames; ++f) dst(static_cast<Eigen::Index>(f), col) = hop_rate[f0 + f];
}

}  // namespace detail

std::vector<WaveletFilterbank> make_banks(const ScatteringConfig& config, std::size_t length,
                                          int layers) {
  config.validate();
  if (layers < 0) layers = config.m;
  const std::size_t n = padded_length(length, config.T, config.hop());
  std::vector<WaveletFilterbank> banks;
  for (int l = 1; l <= layers; ++l) {
    banks.push_back(build_filterbank(FilterbankConfig{config.T, config.layer_q(l), n}));
  }
  return banks;
}

namespace {

using detail::Layout;
using detail::response_at;

// Full width of a band-pass bump down to -50 dB of its peak.
double essential_width(const BandpassFilter& f) {
  return 2.0 * f.sigma * std::sqrt(2.0 * std::log(std::pow(10.0, 50.0 / 20.0)));
}

// Largest power-of-two subsampling s <= limit whose Nyquist pi / s still
// exceeds 2.5 times the filter's essential width.
std::size_t decimation_for(const BandpassFilter& f, std::size_t limit) {
  const double width = essential_width(f);
  std::size_t s = 1;
  while (2 * s <= limit && kPi / static_cast<double>(2 * s) > 2.5 * width) s *= 2;
  return s;
}

// Coarsest internal rate; the lowpass output still fits below its Nyquist.
std::size_t rate_limit(int T) { return std::max<std::size_t>(1, static_cast<std::size_t>(T) / 8); }

ComplexVector real_spectrum(std::span<const double> v) {
  ComplexSpectrum s = spectrum(v);
  return std::move(s.bins());
}

RealVector modulus(const ComplexVector& z) {
  RealVector out(z.size());
  for (std::size_t k = 0; k < z.size(); ++k) out[k] = std::sqrt(std::norm(z[k]));
  return out;
}

struct Scratch {
  ComplexVector half;
  RealVector out;
};

Scratch& scratch() {
  thread_local Scratch s;
  return s;
}

// spec lives on a grid of m = N / s bins; lowpass and resample to the hop.
// The N / hop output samples live in thread-local scratch.
std::span<const double> lowpass_to_hop(const ComplexVector& spec, std::size_t s, const RealVector& phi,
                                       std::size_t hop) {
  const std::size_t m = spec.size();
  const std::size_t out_n = m * s / hop;
  auto& [half, out] = scratch();
  half.assign(out_n / 2 + 1, Complex{});
  out.resize(out_n);
  // Resampling gain and the 1 / out_n of the inverse combine to 1 / m.
  const double scale = 1.0 / static_cast<double>(m);
  if (s >= hop) {
    for (std::size_t k = 0; k < m / 2; ++k) half[k] = scale * spec[k] * response_at(phi, m, k);
    // The Nyquist bin is split between +/- m/2 when upsampling.
    const double nyquist = s > hop ? 0.5 * scale : scale;
    half[m / 2] = nyquist * spec[m / 2] * response_at(phi, m, m / 2);
  } else {
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t j = k % out_n;
      if (j <= out_n / 2) half[j] += scale * spec[k] * response_at(phi, m, k);
    }
  }
  inverse_half_into(half, out);
  return out;
}

// Spectrum of a real sequence at rate s1 re-expressed at the finer rate s2.
ComplexVector upsample_spectrum(const ComplexVector& spec, std::size_t s1, std::size_t s2) {
  const std::size_t m1 = spec.size();
  const std::size_t m2 = m1 * (s1 / s2);
  const double r = static_cast<double>(s1 / s2);
  ComplexVector out(m2, Complex{});
  for (std::size_t k = 0; k < m1 / 2; ++k) out[k] = r * spec[k];
  for (std::size_t k = m1 / 2 + 1; k < m1; ++k) out[m2 - (m1 - k)] = r * spec[k];
  out[m1 / 2] = 0.5 * r * spec[m1 / 2];
  out[m2 - m1 / 2] += 0.5 * r * spec[m1 / 2];
  return out;
}

}  // namespace

ScatteringCoefficients scattering_coefficients(const AudioBuffer& x, const ScatteringConfig& config,
                                               std::span<const WaveletFilterbank> banks) {
  config.validate();
  const Layout layout = detail::make_layout(x.size(), config.T, config.hop());
  detail::check_banks(config, banks, layout.n, config.m);
  const auto& bank1 = banks[0];
  const WaveletFilterbank* bank2 = config.m >= 2 ? &banks[1] : nullptr;

  ScatteringCoefficients out;
  detail::describe_paths(out, bank1, bank2);
  out.hop_samples = config.hop();
  out.sample_rate_hz = x.sample_rate_hz();
  out.peak = detail::peak_amplitude(x);

  const auto frames = static_cast<Eigen::Index>(layout.frames);
  const std::size_t n1 = bank1.bandpass.size();
  const std::size_t hop = layout.hop;
  const std::size_t limit = rate_limit(config.T);
  const RealVector& phi = bank1.lowpass;

  // Order-2 columns grouped by their order-1 filter.
  std::vector<std::vector<std::pair<std::size_t, Eigen::Index>>> children(n1);
  Eigen::Index n2 = 0;
  for (const auto& p : out.paths) {
    if (p.order == 2) children[p.filter1].emplace_back(p.filter2, n2++);
  }

  // Every column is written below.
  out.s0.resize(frames, 1);
  out.abs_lowpass.resize(frames, 1);
  out.s1.resize(frames, static_cast<Eigen::Index>(n1));
  out.s2.resize(frames, n2);

  const RealVector padded = detail::padded_signal(x, layout);
  const ComplexSpectrum xs(real_spectrum(padded));
  {
    detail::store_frames(filter_apply(xs, phi, hop), layout, out.s0, 0);
    RealVector mag(padded.size());
    for (std::size_t k = 0; k < padded.size(); ++k) mag[k] = std::abs(padded[k]);
    const ComplexSpectrum ms(real_spectrum(mag));
    detail::store_frames(filter_apply(ms, phi, hop), layout, out.abs_lowpass, 0);
  }

#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < n1; ++i) {
    const auto& psi1 = bank1.bandpass[i];
    const std::size_t s1 = decimation_for(psi1, limit);
    const RealVector u1 = modulus(filter_apply(xs, psi1.response, s1));
    const ComplexVector u1s = real_spectrum(u1);
    detail::store_frames(lowpass_to_hop(u1s, s1, phi, hop), layout, out.s1,
                         static_cast<Eigen::Index>(i));

    for (const auto& [j, col] : children[i]) {
      const auto& psi2 = bank2->bandpass[j];
      const std::size_t s2 = decimation_for(psi2, limit);
      ComplexVector z2;
      std::size_t rate = s2;
      if (s2 >= s1) {
        const std::size_t m1 = u1s.size();
        const std::size_t m2 = m1 / (s2 / s1);
        const double scale = static_cast<double>(s1) / static_cast<double>(s2);
        z2.assign(m2, Complex{});
        for (std::size_t k = 0; k < m1; ++k) z2[k % m2] += scale * u1s[k] * response_at(psi2.response, m1, k);
        ifft_inplace(z2);
      } else {
        ComplexVector product = upsample_spectrum(u1s, s1, s2);
        const std::size_t m2 = product.size();
        for (std::size_t k = 0; k < m2; ++k) product[k] *= response_at(psi2.response, m2, k);
        ifft_inplace(product);
        z2 = std::move(product);
      }
      const ComplexVector u2s = real_spectrum(modulus(z2));
      detail::store_frames(lowpass_to_hop(u2s, rate, phi, hop), layout, out.s2, col);
    }
  }
  return out;
}

ScatteringFeatures raw_features(const ScatteringCoefficients& c, bool include_s0) {
  ScatteringFeatures f;
  const Eigen::Index off = include_s0 ? 1 : 0;
  f.data.resize(c.frames(), off + c.s1.cols() + c.s2.cols());
  if (include_s0) f.data.col(0) = c.s0.col(0);
  f.data.middleCols(off, c.s1.cols()) = c.s1;
  f.data.middleCols(off + c.s1.cols(), c.s2.cols()) = c.s2;
  if (include_s0) f.channels.push_back({ChannelKind::order0});
  for (const auto& p : c.paths) {
    ChannelInfo info;
    info.kind = p.order == 1 ? ChannelKind::order1 : ChannelKind::order2;
    info.lambda1 = p.lambda1;
    info.lambda2 = p.lambda2.value_or(0.0);
    info.geometric = c.geometric1[p.filter1];
    f.channels.push_back(info);
  }
  f.hop_samples = c.hop_samples;
  f.sample_rate_hz = c.sample_rate_hz;
  f.normalized = false;
  return f;
}

ScatteringFeatures log_normalize(const ScatteringCoefficients& c, const ScatteringConfig& config) {
  ScatteringFeatures f = raw_features(c, config.include_s0);
  const double eps = config.log_eps * (c.peak > 0.0 ? c.peak : 1.0);
  const double log_eps = std::log(eps);
  const Eigen::Index off = config.include_s0 ? 1 : 0;
  const Eigen::Index n1 = c.s1.cols();
  auto pos = [](double v) { return v > 0.0 ? v : 0.0; };
  for (Eigen::Index t = 0; t < c.frames(); ++t) {
    if (config.include_s0) f.data(t, 0) = std::log(std::abs(c.s0(t, 0)) + eps) - log_eps;
    const double denom = pos(c.abs_lowpass(t, 0)) + eps;
    for (Eigen::Index i = 0; i < n1; ++i) {
      f.data(t, off + i) = std::log((pos(c.s1(t, i)) + eps) / denom);
    }
  }
  Eigen::Index col = 0;
  for (const auto& p : c.paths) {
    if (p.order != 2) continue;
    const auto i = static_cast<Eigen::Index>(p.filter1);
    for (Eigen::Index t = 0; t < c.frames(); ++t) {
      f.data(t, off + n1 + col) = std::log((pos(c.s2(t, col)) + eps) / (pos(c.s1(t, i)) + eps));
    }
    ++col;
  }
  f.normalized = true;
  return f;
}

ScatteringFeatures scattering_transform(const AudioBuffer& x, const ScatteringConfig& config,
                                        std::span<const WaveletFilterbank> banks) {
  return log_normalize(scattering_coefficients(x, config, banks), config);
}

ScatteringFeatures scattering_transform(const AudioBuffer& x, const ScatteringConfig& config) {
  const auto banks = make_banks(config, x.size());
  return scattering_transform(x, config, banks);
}

ScatteringFeatures scalogram(const AudioBuffer& x, const WaveletFilterbank& bank1, int hop) {
  const Layout layout = detail::make_layout(x.size(), bank1.config.T, hop);
  if (bank1.n_fft() != layout.n) {
    throw std::invalid_argument("scalogram: filterbank size does not match padded length");
  }
  const ComplexSpectrum xs(real_spectrum(detail::padded_signal(x, layout)));
  ScatteringFeatures f;
  const auto n1 = static_cast<Eigen::Index>(bank1.bandpass.size());
  f.data = Matrix::Zero(static_cast<Eigen::Index>(layout.frames), n1);
#pragma omp parallel for schedule(dynamic, 1)
  for (Eigen::Index i = 0; i < n1; ++i) {
    const auto& psi = bank1.bandpass[static_cast<std::size_t>(i)];
    const ComplexVector z = filter_apply(xs, psi.response, layout.hop);
    const std::size_t f0 = layout.first_frame();
    for (std::size_t t = 0; t < layout.frames; ++t) {
      f.data(static_cast<Eigen::Index>(t), i) = std::abs(z[f0 + t]);
    }
  }
  for (const auto& psi : bank1.bandpass) {
    ChannelInfo info;
    info.kind = ChannelKind::order1;
    info.lambda1 = psi.center;
    info.geometric = psi.kind == FilterKind::geometric;
    f.channels.push_back(info);
  }
  f.hop_samples = hop;
  f.sample_rate_hz = x.sample_rate_hz();
  return f;
}

namespace {

// (1/m) sum |spec[k] h[k]|^2, i.e. the time-domain energy of the filtered signal.
double filtered_energy(const ComplexVector& spec, const RealVector* h) {
  double e = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double g = h != nullptr ? (*h)[k] : 1.0;
    e += std::norm(spec[k]) * g * g;
  }
  return e / static_cast<double>(spec.size());
}

struct Node {
  ComplexVector spectrum;  // of U_l, full rate
  double center;           // lambda_l of the last filter on the path
};

}  // namespace

LayerEnergy layer_energy(const AudioBuffer& x, const ScatteringConfig& config,
                         std::span<const WaveletFilterbank> banks) {
  config.validate();
  const Layout layout = detail::make_layout(x.size(), config.T, config.hop());
  detail::check_banks(config, banks, layout.n, config.m + 1);
  LayerEnergy out;
  out.order_fractions.assign(static_cast<std::size_t>(config.m) + 1, 0.0);

  const RealVector padded = detail::padded_signal(x, layout);
  double total = 0.0;
  for (double v : padded) total += v * v;
  if (total == 0.0) return out;

  const RealVector& phi = banks[0].lowpass;
  std::vector<Node> layer{{real_spectrum(padded), kPi * 2.0}};
  out.order_fractions[0] = filtered_energy(layer[0].spectrum, &phi) / total;

  for (int l = 1; l <= config.m + 1; ++l) {
    const auto& bank = banks[static_cast<std::size_t>(l - 1)];
    const bool last = l == config.m + 1;
    std::vector<double> partial(layer.size(), 0.0);
    std::vector<std::vector<Node>> produced(layer.size());
    const auto count = static_cast<long>(layer.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (long p = 0; p < count; ++p) {
      const auto& parent = layer[static_cast<std::size_t>(p)];
      for (const auto& psi : bank.bandpass) {
        if (!(psi.center < parent.center * (1.0 - 1e-12))) continue;
        ComplexVector z(parent.spectrum);
        for (std::size_t k = 0; k < z.size(); ++k) z[k] *= psi.response[k];
        if (last) {
          partial[static_cast<std::size_t>(p)] += filtered_energy(z, nullptr);
          continue;
        }
        ifft_inplace(z);
        ComplexVector u = real_spectrum(modulus(z));
        partial[static_cast<std::size_t>(p)] += filtered_energy(u, &phi);
        produced[static_cast<std::size_t>(p)].push_back({std::move(u), psi.center});
      }
    }
    double acc = 0.0;
    for (double v : partial) acc += v;
    if (last) {
      out.residual = acc / total;
      break;
    }
    out.order_fractions[static_cast<std::size_t>(l)] = acc / total;
    std::vector<Node> next;
    for (auto& group : produced) {
      for (auto& node : group) next.push_back(std::move(node));
    }
    layer = std::move(next);
  }
  return out;
}

}  // namespace wst
