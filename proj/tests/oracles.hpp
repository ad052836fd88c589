// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The wstlid Authors

// Independent reference computations used only by tests. Nothing here calls
// into the library's numerical kernels.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;
inline constexpr double pi = 3.14159265358979323846;

inline std::vector<cplx> dft(const std::vector<cplx>& x, int sign = -1) {
  const std::size_t n = x.size();
  std::vector<cplx> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    cplx acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double a = sign * 2.0 * pi * static_cast<double>((k * t) % n) / static_cast<double>(n);
      acc += x[t] * cplx(std::cos(a), std::sin(a));
    }
    out[k] = acc;
  }
  return out;
}

inline std::vector<cplx> idft(const std::vector<cplx>& x) {
  auto out = dft(x, +1);
  for (auto& v : out) v /= static_cast<double>(x.size());
  return out;
}

/// y[t] = sum_k x[k] h[(t - k) mod N]
inline std::vector<cplx> circular_convolution(const std::vector<cplx>& x, const std::vector<cplx>& h) {
  const std::size_t n = x.size();
  std::vector<cplx> y(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t k = 0; k < n; ++k) y[t] += x[k] * h[(t + n - k) % n];
  }
  return y;
}

/// Miss and false-alarm rates at every threshold of the sorted score union
/// plus +inf, counted directly; EER by linear interpolation at the crossing.
inline double eer(const std::vector<double>& tgt, const std::vector<double>& non) {
  std::vector<double> th(tgt);
  th.insert(th.end(), non.begin(), non.end());
  std::sort(th.begin(), th.end());
  th.erase(std::unique(th.begin(), th.end()), th.end());
  th.push_back(std::numeric_limits<double>::infinity());
  std::vector<double> pm;
  std::vector<double> pf;
  for (double t : th) {
    double miss = 0.0;
    double fa = 0.0;
    for (double s : tgt) miss += s < t ? 1.0 : 0.0;
    for (double s : non) fa += s >= t ? 1.0 : 0.0;
    pm.push_back(miss / static_cast<double>(tgt.size()));
    pf.push_back(fa / static_cast<double>(non.size()));
  }
  for (std::size_t i = 0; i < th.size(); ++i) {
    if (pm[i] >= pf[i]) {
      if (i == 0) return pm[0];
      const double d0 = pf[i - 1] - pm[i - 1];
      const double d1 = pf[i] - pm[i];
      const double a = d0 / (d0 - d1);
      return pm[i - 1] + a * (pm[i] - pm[i - 1]);
    }
  }
  return 1.0;
}

/// Pairwise cost: language t's detector accepts a trial when
/// logit_t - log sum_{j != t} exp(logit_j) >= 0.
inline double cavg(const std::vector<std::vector<double>>& logits, const std::vector<int>& labels,
                   int L, double p_target = 0.5) {
  auto accepted = [&](std::size_t n, int t) {
    double others = 0.0;
    for (int j = 0; j < L; ++j) {
      if (j != t) others += std::exp(logits[n][static_cast<std::size_t>(j)]);
    }
    return logits[n][static_cast<std::size_t>(t)] - std::log(others) >= 0.0;
  };
  double total = 0.0;
  for (int t = 0; t < L; ++t) {
    double n_t = 0.0;
    double miss = 0.0;
    for (std::size_t n = 0; n < labels.size(); ++n) {
      if (labels[n] != t) continue;
      n_t += 1.0;
      if (!accepted(n, t)) miss += 1.0;
    }
    double fa_sum = 0.0;
    for (int u = 0; u < L; ++u) {
      if (u == t) continue;
      double n_u = 0.0;
      double fa = 0.0;
      for (std::size_t n = 0; n < labels.size(); ++n) {
        if (labels[n] != u) continue;
        n_u += 1.0;
        if (accepted(n, t)) fa += 1.0;
      }
      fa_sum += fa / n_u;
    }
    total += p_target * miss / n_t + (1.0 - p_target) / (L - 1) * fa_sum;
  }
  return total / L;
}

/// Central differences of f at x with step h.
template <class F>
std::vector<double> numeric_gradient(F&& f, std::vector<double> x, double h = 1e-5) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f(x);
    x[i] = keep - h;
    const double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

/// max_i |a_i - b_i| / max(|a|_inf, |b|_inf, floor)
inline double max_relative_error(const std::vector<double>& a, const std::vector<double>& b,
                                 double floor = 1e-8) {
  double scale = floor;
  for (std::size_t i = 0; i < a.size(); ++i) scale = std::max({scale, std::abs(a[i]), std::abs(b[i])});
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
  return worst;
}

}  // namespace oracle
