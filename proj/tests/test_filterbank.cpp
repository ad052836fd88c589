// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The wstlid Authors

#include "oracles.hpp"
#include "wst/filterbank.hpp"

#include <doctest.h>

#include <cmath>

using namespace wst;

namespace {

const int kTs[] = {256, 512, 1024, 2048, 4096, 8192, 16384};
const int kQs[] = {1, 2, 4, 8};

WaveletFilterbank bank(int T, int Q) { return build_filterbank({T, Q, 2 * static_cast<std::size_t>(T)}); }

// Counts k with pi 2^(-k/Q) >= 2 pi Q / T by walking k upward.
void validate_config(int T, int Q, std::size_t n) { FilterbankConfig{T, Q, n}.validate(); }
void validate_build(int T, int Q, std::size_t n) { build_filterbank({T, Q, n}); }

int enumerate_geometric(int T, int Q) {
  int k = 0;
  while (oracle::pi * std::pow(2.0, -(k + 1.0) / Q) >= 2.0 * oracle::pi * Q / T * (1.0 - 1e-12)) ++k;
  return k + 1;
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_NOTHROW(validate_config(256, 2, 512));
  CHECK_THROWS_AS(validate_config(128, 2, 512), std::invalid_argument);
  CHECK_THROWS_AS(validate_config(300, 2, 1024), std::invalid_argument);
  CHECK_THROWS_AS(validate_config(32768, 2, 65536), std::invalid_argument);
  CHECK_THROWS_AS(validate_config(256, 3, 512), std::invalid_argument);
  CHECK_THROWS_AS(validate_config(256, 2, 256), std::invalid_argument);
  CHECK_THROWS_AS(validate_config(256, 2, 768), std::invalid_argument);
  CHECK_THROWS_AS(validate_build(256, 16, 512), std::invalid_argument);
}

TEST_CASE("T = 256, Q = 2 has 13 geometric and 1 linear filter") {
  const auto b = bank(256, 2);
  CHECK(b.geometric_count() == 13);
  CHECK(b.bandpass.size() == 14);
  CHECK(b.bandpass.front().center == doctest::Approx(oracle::pi));
  CHECK(b.bandpass[12].center == doctest::Approx(oracle::pi / 64.0));
}

TEST_CASE("filter counts follow the closed form and direct enumeration on the whole grid") {
  for (int T : kTs) {
    for (int Q : kQs) {
      const auto b = bank(T, Q);
      const int expected = static_cast<int>(std::floor(Q * std::log2(oracle::pi * T / (2.0 * oracle::pi * Q)) + 1e-9)) + 1;
      CHECK(static_cast<int>(b.geometric_count()) == expected);
      CHECK(geometric_filter_count(T, Q) == expected);
      CHECK(enumerate_geometric(T, Q) == expected);
      CHECK(b.bandpass.size() - b.geometric_count() == static_cast<std::size_t>(Q - 1));
    }
  }
}

TEST_CASE("centers: geometric ladder, admissible floor, linear spacing, strictly decreasing") {
  for (int T : kTs) {
    for (int Q : kQs) {
      const auto b = bank(T, Q);
      const double floor = 2.0 * oracle::pi * Q / T;
      for (std::size_t i = 0; i < b.bandpass.size(); ++i) {
        const auto& f = b.bandpass[i];
        if (i > 0) CHECK(f.center < b.bandpass[i - 1].center);
        if (f.kind == FilterKind::geometric) {
          CHECK(f.center == doctest::Approx(oracle::pi * std::pow(2.0, -static_cast<double>(i) / Q)));
          CHECK(f.center >= floor * (1.0 - 1e-12));
          CHECK(2.0 * oracle::pi * Q / f.center <= T * (1.0 + 1e-9));
          CHECK(f.bandwidth == doctest::Approx(f.center / Q));
        } else {
          CHECK(f.center < floor);
          CHECK(f.bandwidth == doctest::Approx(2.0 * oracle::pi / T));
          const double k = f.center / (2.0 * oracle::pi / T);
          CHECK(std::abs(k - std::round(k)) < 1e-9);
        }
      }
    }
  }
}

TEST_CASE("Q = 1 gives an exact octave ladder and no linear filters") {
  const auto b = bank(1024, 1);
  CHECK(b.geometric_count() == b.bandpass.size());
  for (std::size_t i = 1; i < b.bandpass.size(); ++i) {
    CHECK(b.bandpass[i - 1].center / b.bandpass[i].center == doctest::Approx(2.0).epsilon(1e-14));
  }
}

TEST_CASE("band-pass filters are analytic with zero DC gain") {
  for (int T : {256, 2048}) {
    for (int Q : kQs) {
      const auto b = bank(T, Q);
      const std::size_t n = b.n_fft();
      for (const auto& f : b.bandpass) {
        CHECK(std::abs(f.response[0]) < 1e-7);
        for (std::size_t k = n / 2 + 1; k < n; ++k) CHECK(f.response[k] == 0.0);
      }
    }
  }
}

TEST_CASE("geometric responses peak near their center with the stated half-power width") {
  const auto b = bank(4096, 8);
  const std::size_t n = b.n_fft();
  for (std::size_t i = 4; i + 8 < b.geometric_count(); i += 7) {
    const auto& f = b.bandpass[i];
    std::size_t kmax = 1;
    for (std::size_t k = 1; k <= n / 2; ++k) {
      if (f.response[k] > f.response[kmax]) kmax = k;
    }
    const double wpeak = 2.0 * oracle::pi * static_cast<double>(kmax) / static_cast<double>(n);
    CHECK(std::abs(wpeak - f.center) < 0.1 * f.bandwidth);
    // Measure the width where the power falls to one half of its peak.
    const double half = f.response[kmax] / std::sqrt(2.0);
    std::size_t lo = kmax;
    std::size_t hi = kmax;
    while (lo > 1 && f.response[lo] > half) --lo;
    while (hi < n / 2 && f.response[hi] > half) ++hi;
    const double width = 2.0 * oracle::pi * static_cast<double>(hi - lo) / static_cast<double>(n);
    CHECK(width == doctest::Approx(f.bandwidth).epsilon(0.15));
  }
}

TEST_CASE("Littlewood-Paley frame bounds on the whole grid") {
  for (int T : kTs) {
    for (int Q : kQs) {
      const auto b = bank(T, Q);
      const auto a = littlewood_paley(b);
      const std::size_t n = b.n_fft();
      double mx = 0.0;
      double mn = 2.0;
      for (std::size_t k = 0; k < n; ++k) mx = std::max(mx, a[k]);
      for (std::size_t k = 1; k <= n / 2; ++k) {
        const double w = 2.0 * oracle::pi * static_cast<double>(k) / static_cast<double>(n);
        if (w > 2.0 * oracle::pi / T) mn = std::min(mn, a[k]);
      }
      CHECK(mx <= 1.0 + 1e-12);
      CHECK(mn >= 0.8);
    }
  }
}

TEST_CASE("littlewood_paley on synthetic banks") {
  WaveletFilterbank allpass;
  allpass.lowpass.assign(16, 0.0);
  BandpassFilter f;
  f.response.assign(16, 1.0);
  allpass.bandpass.push_back(f);
  const auto a = littlewood_paley(allpass);
  for (std::size_t k = 1; k < 16; ++k) CHECK(a[k] == doctest::Approx(1.0));

  WaveletFilterbank lowonly = bank(256, 2);
  lowonly.bandpass.clear();
  const auto l = littlewood_paley(lowonly);
  for (std::size_t k = 0; k < l.size(); ++k) {
    CHECK(l[k] == doctest::Approx(lowonly.lowpass[k] * lowonly.lowpass[k]));
    CHECK(l[k] <= l[0]);
  }
}

TEST_CASE("lowpass is an even Gaussian with bandwidth 2 pi / T") {
  const auto b = bank(2048, 4);
  const std::size_t n = b.n_fft();
  CHECK(b.lowpass[0] == doctest::Approx(1.0));
  for (std::size_t k = 1; k < n; ++k) CHECK(b.lowpass[k] == doctest::Approx(b.lowpass[n - k]));
  CHECK(b.lowpass_bandwidth == doctest::Approx(2.0 * oracle::pi / 2048));
  const auto j = filterbank_to_json(b, 8000);
  CHECK(j["lowpass_bandwidth_hz"].get<double>() == doctest::Approx(8000.0 / 2048.0));
  CHECK(j["bandpass"].size() == b.bandpass.size());
  CHECK(j["bandpass"][0]["center_hz"].get<double>() == doctest::Approx(4000.0));
}

namespace {

WaveletFilterbank synthetic(std::initializer_list<double> centers) {
  WaveletFilterbank b;
  for (double c : centers) {
    BandpassFilter f;
    f.center = c;
    b.bandpass.push_back(f);
  }
  return b;
}

}  // namespace

TEST_CASE("admissible paths") {
  const double pi = oracle::pi;
  SUBCASE("single first-layer filter") {
    const auto p = admissible_paths(synthetic({pi}), synthetic({pi, pi / 2}));
    REQUIRE(p.size() == 2);
    CHECK(p[0].order == 1);
    CHECK(p[1].order == 2);
    CHECK(p[1].lambda2.value() == doctest::Approx(pi / 2));
  }
  SUBCASE("dyadic banks give three second-order paths in order") {
    const auto d = synthetic({pi, pi / 2, pi / 4});
    const auto p = admissible_paths(d, d);
    REQUIRE(p.size() == 6);
    const double expect[3][2] = {{pi, pi / 2}, {pi, pi / 4}, {pi / 2, pi / 4}};
    for (int i = 0; i < 3; ++i) {
      CHECK(p[3 + static_cast<std::size_t>(i)].lambda1 == doctest::Approx(expect[i][0]));
      CHECK(p[3 + static_cast<std::size_t>(i)].lambda2.value() == doctest::Approx(expect[i][1]));
    }
  }
  SUBCASE("second layer entirely above the first gives no order-2 paths") {
    const auto p = admissible_paths(synthetic({pi / 4, pi / 8}), synthetic({pi, pi / 2}));
    CHECK(p.size() == 2);
  }
  SUBCASE("built banks: lambda2 < lambda1 and sorted") {
    const auto b1 = bank(512, 4);
    const auto b2 = bank(512, 1);
    const auto p = admissible_paths(b1, b2);
    bool seen2 = false;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p[i].order == 1) {
        CHECK_FALSE(seen2);
        CHECK_FALSE(p[i].lambda2.has_value());
      } else {
        seen2 = true;
        REQUIRE(p[i].lambda2.has_value());
        CHECK(*p[i].lambda2 < p[i].lambda1);
        if (p[i - 1].order == 2) {
          const bool ordered = p[i - 1].lambda1 > p[i].lambda1 ||
                               (p[i - 1].lambda1 == p[i].lambda1 && *p[i - 1].lambda2 > *p[i].lambda2);
          CHECK(ordered);
        }
      }
    }
  }
}
