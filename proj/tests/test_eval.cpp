// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The wstlid Authors

#include "oracles.hpp"
#include "wst/eval.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace wst;

namespace {

std::vector<double> quantized_scores(std::mt19937_64& rng, std::size_t n, double shift) {
  std::normal_distribution<double> g(shift, 1.0);
  std::vector<double> v(n);
  for (auto& s : v) s = std::round(g(rng) * 4.0) / 4.0;
  return v;
}

TrialScores random_trials(std::mt19937_64& rng, int langs, std::size_t per_lang, double margin) {
  std::normal_distribution<double> g(0.0, 1.0);
  TrialScores t;
  const auto n = static_cast<Eigen::Index>(per_lang * static_cast<std::size_t>(langs));
  t.logits.resize(n, langs);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % langs);
    t.labels.push_back(label);
    t.utterance_ids.push_back("u" + std::to_string(i));
    for (int l = 0; l < langs; ++l) t.logits(i, l) = g(rng) + (l == label ? margin : 0.0);
  }
  for (int l = 0; l < langs; ++l) t.language_names.push_back("lang" + std::to_string(l));
  return t;
}

std::vector<std::vector<double>> rows(const Matrix& m) {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) out[static_cast<std::size_t>(i)].assign(m.row(i).begin(), m.row(i).end());
  return out;
}

double eer_of(const std::vector<double>& t, const std::vector<double>& n) { return compute_eer(t, n); }

LinearClassifier train(const Matrix& X, const std::vector<int>& y, int langs, TrainingOptions o = {}) {
  return train_linear_classifier(X, y, langs, o);
}

FusionModel fuse(const std::vector<TrialScores>& systems, FusionOptions o = {}) { return train_fusion(systems, o); }

TrialScores fuse_apply(const FusionModel& m, const std::vector<TrialScores>& systems) {
  return apply_fusion(m, systems);
}

}  // namespace

TEST_CASE("EER examples") {
  CHECK(eer_of({0.9, 0.8}, {0.1, 0.2}) == 0.0);
  CHECK(eer_of({0.1, 0.2}, {0.8, 0.9}) == 1.0);
  const std::vector<double> t = {0.8, 0.6, 0.4};
  const std::vector<double> n = {0.7, 0.5, 0.3};
  CHECK(eer_of(t, n) == doctest::Approx(oracle::eer(t, n)).epsilon(1e-9));
  CHECK(eer_of(t, n) == doctest::Approx(1.0 / 3.0));
  CHECK(eer_of({0.5}, {0.5}) == doctest::Approx(oracle::eer({0.5}, {0.5})));
  CHECK_THROWS_AS(eer_of({}, {0.1}), std::invalid_argument);
  CHECK_THROWS_AS(eer_of({0.1}, {}), std::invalid_argument);
}

TEST_CASE("EER matches the brute-force sweep on random sets with ties") {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<std::size_t> size(1, 500);
  std::uniform_real_distribution<double> shift(-1.0, 3.0);
  for (int trial = 0; trial < 300; ++trial) {
    const auto t = quantized_scores(rng, size(rng), shift(rng));
    const auto n = quantized_scores(rng, size(rng), 0.0);
    const double e = eer_of(t, n);
    CHECK(e == doctest::Approx(oracle::eer(t, n)).epsilon(1e-9));
    CHECK(e >= 0.0);
    CHECK(e <= 1.0);
  }
}

TEST_CASE("EER is invariant under strictly increasing transforms") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto t = quantized_scores(rng, 60, 1.0);
    const auto n = quantized_scores(rng, 80, 0.0);
    const double base = eer_of(t, n);
    for (int kind = 0; kind < 3; ++kind) {
      auto f = [kind](double s) { return kind == 0 ? std::exp(s) : kind == 1 ? 3.0 * s - 7.0 : std::atan(s); };
      std::vector<double> tt;
      std::vector<double> nn;
      for (double s : t) tt.push_back(f(s));
      for (double s : n) nn.push_back(f(s));
      CHECK(eer_of(tt, nn) == doctest::Approx(base).epsilon(1e-12));
    }
  }
}

TEST_CASE("C_avg") {
  SUBCASE("perfect separation costs nothing") {
    std::mt19937_64 rng(1);
    const auto t = random_trials(rng, 4, 10, 50.0);
    CHECK(compute_cavg(t) == 0.0);
    CHECK(compute_eer(t) == 0.0);
  }
  SUBCASE("identical logits, five languages") {
    TrialScores t;
    t.logits = Matrix::Constant(25, 5, 0.3);
    for (int i = 0; i < 25; ++i) t.labels.push_back(i % 5);
    CHECK(compute_cavg(t) == doctest::Approx(oracle::cavg(rows(t.logits), t.labels, 5)).epsilon(1e-9));
  }
  SUBCASE("two languages with 10% errors each way") {
    TrialScores t;
    t.logits.resize(20, 2);
    for (int i = 0; i < 20; ++i) {
      const int label = i < 10 ? 0 : 1;
      const bool wrong = i == 0 || i == 10;
      const int winner = wrong ? 1 - label : label;
      t.labels.push_back(label);
      t.logits(i, winner) = 1.0;
      t.logits(i, 1 - winner) = -1.0;
    }
    CHECK(compute_cavg(t) == doctest::Approx(0.1).epsilon(1e-12));
  }
  SUBCASE("matches the pairwise oracle on random sets") {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> langs(2, 6);
    std::uniform_real_distribution<double> margin(0.0, 3.0);
    for (int trial = 0; trial < 100; ++trial) {
      const int L = langs(rng);
      const auto t = random_trials(rng, L, 7, margin(rng));
      const double c = compute_cavg(t);
      CHECK(c == doctest::Approx(oracle::cavg(rows(t.logits), t.labels, L)).epsilon(1e-9));
      CHECK(c >= 0.0);
      CHECK(c <= 1.0);
    }
  }
  SUBCASE("errors") {
    TrialScores t;
    t.logits = Matrix::Zero(4, 3);
    CHECK_THROWS_AS(compute_cavg(t), std::invalid_argument);
    t.labels = {0, 1, 0, 1};
    CHECK_THROWS_AS(compute_cavg(t), std::invalid_argument);
    t.labels = {0, 1, 2, 3};
    CHECK_THROWS_AS(compute_cavg(t), std::invalid_argument);
  }
}

TEST_CASE("detection scores and log loss") {
  Matrix z(1, 3);
  z << 1.0, 2.0, 3.0;
  const Matrix d = detection_scores(z);
  CHECK(d(0, 0) == doctest::Approx(1.0 - std::log(std::exp(2.0) + std::exp(3.0))));
  CHECK(d(0, 2) == doctest::Approx(3.0 - std::log(std::exp(1.0) + std::exp(2.0))));
  TrialScores t;
  t.logits = z;
  t.labels = {2};
  CHECK(log_loss(t) == doctest::Approx(-(3.0 - std::log(std::exp(1.0) + std::exp(2.0) + std::exp(3.0)))));
}

TEST_CASE("linear classifier") {
  SUBCASE("separable two-class toy set") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix X(100, 2);
    std::vector<int> y;
    for (Eigen::Index i = 0; i < 100; ++i) {
      const int label = static_cast<int>(i % 2);
      X(i, 0) = u(rng) + (label ? 1.5 : -1.5);
      X(i, 1) = u(rng);
      y.push_back(label);
    }
    TrainingOptions o;
    o.epochs = 200;
    const auto m = train(X, y, 2, o);
    CHECK(m.final_loss <= m.initial_loss);
    const Matrix z = classify(m, X);
    int correct = 0;
    for (Eigen::Index i = 0; i < 100; ++i) {
      Eigen::Index best = 0;
      z.row(i).maxCoeff(&best);
      correct += best == y[static_cast<std::size_t>(i)] ? 1 : 0;
    }
    CHECK(correct == 100);
  }
  SUBCASE("analytic gradient matches central differences") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
      const Eigen::Index n = 30;
      const Eigen::Index d = 4;
      const int L = 3;
      Matrix X(n, d);
      for (Eigen::Index i = 0; i < n * d; ++i) X.data()[i] = g(rng);
      std::vector<int> y;
      for (Eigen::Index i = 0; i < n; ++i) y.push_back(static_cast<int>(rng() % L));
      std::vector<double> theta(static_cast<std::size_t>(L * d + L));
      for (auto& v : theta) v = g(rng);
      const double l2 = 0.1;
      auto unpack = [&](const std::vector<double>& p, Matrix& W, Eigen::VectorXd& b) {
        W.resize(L, d);
        b.resize(L);
        for (Eigen::Index l = 0; l < L; ++l) {
          for (Eigen::Index j = 0; j < d; ++j) W(l, j) = p[static_cast<std::size_t>(l * d + j)];
          b[l] = p[static_cast<std::size_t>(L * d + l)];
        }
      };
      auto f = [&](const std::vector<double>& p) {
        Matrix W;
        Eigen::VectorXd b;
        unpack(p, W, b);
        return softmax_objective(X, y, W, b, l2);
      };
      Matrix W;
      Eigen::VectorXd b;
      unpack(theta, W, b);
      Matrix gw;
      Eigen::VectorXd gb;
      softmax_objective(X, y, W, b, l2, &gw, &gb);
      std::vector<double> analytic;
      for (Eigen::Index l = 0; l < L; ++l) {
        for (Eigen::Index j = 0; j < d; ++j) analytic.push_back(gw(l, j));
      }
      for (Eigen::Index l = 0; l < L; ++l) analytic.push_back(gb[l]);
      CHECK(oracle::max_relative_error(analytic, oracle::numeric_gradient(f, theta)) < 1e-4);
    }
  }
  SUBCASE("identical features with balanced labels give uniform posteriors") {
    const Matrix X = Matrix::Constant(30, 3, 0.7);
    std::vector<int> y;
    for (int i = 0; i < 30; ++i) y.push_back(i % 3);
    const auto m = train(X, y, 3);
    const Eigen::VectorXd z = classify(m, std::vector<double>{0.7, 0.7, 0.7});
    CHECK(z.maxCoeff() - z.minCoeff() < 1e-3);
  }
  SUBCASE("errors") {
    const Matrix X = Matrix::Zero(4, 2);
    CHECK_THROWS_AS(train(X, {0, 0, 0, 0}, 2), std::invalid_argument);
    CHECK_THROWS_AS(train(X, {0, 1, 0}, 2), std::invalid_argument);
    CHECK_THROWS_AS(train(X, {0, 1, 0, 5}, 2), std::invalid_argument);
    LinearClassifier m;
    m.weights = Matrix::Zero(2, 3);
    m.bias = Eigen::VectorXd::Zero(2);
    CHECK_THROWS_AS(classify(m, std::vector<double>{1.0, 2.0}), std::invalid_argument);
  }
  SUBCASE("training is deterministic for a seed") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix X(40, 5);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = g(rng);
    std::vector<int> y;
    for (int i = 0; i < 40; ++i) y.push_back(i % 4);
    const auto a = train(X, y, 4);
    const auto b = train(X, y, 4);
    CHECK(a.weights == b.weights);
    CHECK(a.bias == b.bias);
  }
}

TEST_CASE("classify") {
  LinearClassifier m;
  m.weights = Matrix::Zero(3, 4);
  m.bias = Eigen::VectorXd(3);
  m.bias << 1.0, -2.0, 0.5;
  CHECK(classify(m, std::vector<double>{3.0, 1.0, -4.0, 9.0}) == m.bias);

  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    for (Eigen::Index i = 0; i < m.weights.size(); ++i) m.weights.data()[i] = g(rng);
    for (Eigen::Index i = 0; i < 3; ++i) m.bias[i] = g(rng);
    std::vector<double> f(4);
    for (auto& v : f) v = g(rng);
    const Eigen::VectorXd z = classify(m, f);
    for (Eigen::Index l = 0; l < 3; ++l) {
      double expect = m.bias[l];
      for (Eigen::Index j = 0; j < 4; ++j) expect += m.weights(l, j) * f[static_cast<std::size_t>(j)];
      CHECK(std::abs(z[l] - expect) < 1e-12);
    }
    LinearClassifier doubled = m;
    doubled.weights.row(1) *= 2.0;
    const Eigen::VectorXd z2 = classify(doubled, f);
    CHECK(z2[1] - m.bias[1] == doctest::Approx(2.0 * (z[1] - m.bias[1])));
    CHECK(z2[0] == z[0]);
  }
}

TEST_CASE("score fusion") {
  std::mt19937_64 rng(21);
  SUBCASE("single system keeps its EER and C_avg") {
    for (double margin : {0.5, 2.0, -1.0}) {
      const auto s = random_trials(rng, 3, 40, margin);
      const auto model = fuse({s});
      CHECK(model.weights[0] > 0.0);
      const auto fused = fuse_apply(model, {s});
      CHECK(compute_eer(fused) == doctest::Approx(compute_eer(s)).epsilon(1e-9));
      CHECK(fused.labels == s.labels);
    }
  }
  SUBCASE("two identical systems keep each language's trial ranking") {
    const auto s = random_trials(rng, 4, 25, 1.0);
    const auto model = fuse({s, s});
    CHECK(model.weights[0] + model.weights[1] > 0.0);
    const auto fused = fuse_apply(model, {s, s});
    for (Eigen::Index l = 0; l < 4; ++l) {
      for (Eigen::Index i = 0; i < s.logits.rows(); ++i) {
        for (Eigen::Index j = 0; j < s.logits.rows(); ++j) {
          if (s.logits(i, l) < s.logits(j, l)) CHECK(fused.logits(i, l) < fused.logits(j, l));
        }
      }
    }
    CHECK(compute_eer(fused) == doctest::Approx(compute_eer(s)).epsilon(1e-9));
  }
  SUBCASE("a perfect system dominates a random one") {
    auto a = random_trials(rng, 2, 100, 0.0);
    auto b = a;
    std::normal_distribution<double> g(0.0, 1.0);
    for (Eigen::Index i = 0; i < a.logits.rows(); ++i) {
      const int label = a.labels[static_cast<std::size_t>(i)];
      a.logits(i, label) = 1.0;
      a.logits(i, 1 - label) = -1.0;
      b.logits(i, 0) = g(rng);
      b.logits(i, 1) = g(rng);
    }
    const auto model = fuse({a, b});
    CHECK(std::abs(model.weights[0]) >= 5.0 * std::abs(model.weights[1]));
  }
  SUBCASE("fused log loss is no worse than the best calibrated single system") {
    for (int trial = 0; trial < 5; ++trial) {
      const auto a = random_trials(rng, 3, 30, 1.0);
      auto b = a;
      std::normal_distribution<double> g(0.0, 1.0);
      for (Eigen::Index i = 0; i < b.logits.size(); ++i) b.logits.data()[i] += g(rng);
      FusionOptions o;
      const double fa = fusion_objective(std::vector<TrialScores>{a}, fuse({a}).weights, fuse({a}).bias, o.l2);
      const double fb = fusion_objective(std::vector<TrialScores>{b}, fuse({b}).weights, fuse({b}).bias, o.l2);
      const auto both = fuse({a, b});
      const double fab = fusion_objective(std::vector<TrialScores>{a, b}, both.weights, both.bias, o.l2);
      CHECK(fab <= std::min(fa, fb) + 1e-6);
    }
  }
  SUBCASE("fusion gradient matches central differences") {
    const auto a = random_trials(rng, 3, 10, 1.0);
    const auto b = random_trials(rng, 3, 10, 0.5);
    const std::vector<TrialScores> sys = {a, b};
    const std::vector<double> theta = {0.7, -0.3, 0.1, 0.2, -0.4};
    auto f = [&](const std::vector<double>& p) {
      Eigen::VectorXd bias(3);
      bias << p[2], p[3], p[4];
      return fusion_objective(sys, std::vector<double>{p[0], p[1]}, bias, 0.01);
    };
    RealVector gw;
    Eigen::VectorXd gb;
    Eigen::VectorXd bias(3);
    bias << 0.1, 0.2, -0.4;
    fusion_objective(sys, std::vector<double>{0.7, -0.3}, bias, 0.01, &gw, &gb);
    const std::vector<double> analytic = {gw[0], gw[1], gb[0], gb[1], gb[2]};
    CHECK(oracle::max_relative_error(analytic, oracle::numeric_gradient(f, theta)) < 1e-4);
  }
  SUBCASE("apply_fusion") {
    const auto a = random_trials(rng, 3, 10, 1.0);
    const auto b = random_trials(rng, 3, 10, 0.2);
    FusionModel m;
    m.weights = {1.0, 0.0};
    m.bias = Eigen::VectorXd::Zero(3);
    CHECK(fuse_apply(m, {a, b}).logits == a.logits);
    m.weights = {0.5, 0.5};
    CHECK((fuse_apply(m, {a, a}).logits - a.logits).cwiseAbs().maxCoeff() == 0.0);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
      m.weights = {g(rng), g(rng)};
      m.bias = Eigen::VectorXd::NullaryExpr(3, [&] { return g(rng); });
      const auto f = fuse_apply(m, {a, b});
      for (Eigen::Index i = 0; i < a.logits.rows(); ++i) {
        for (Eigen::Index l = 0; l < 3; ++l) {
          const double expect = m.weights[0] * a.logits(i, l) + m.weights[1] * b.logits(i, l) + m.bias[l];
          CHECK(std::abs(f.logits(i, l) - expect) < 1e-12);
        }
      }
    }
    CHECK_THROWS_AS(fuse_apply(m, {a}), std::invalid_argument);
  }
  SUBCASE("misaligned systems are rejected") {
    const auto a = random_trials(rng, 3, 10, 1.0);
    auto b = a;
    std::swap(b.utterance_ids[0], b.utterance_ids[1]);
    CHECK_THROWS_AS(fuse({a, b}), std::invalid_argument);
    const auto c = random_trials(rng, 3, 11, 1.0);
    CHECK_THROWS_AS(fuse({a, c}), std::invalid_argument);
    auto d = a;
    d.labels.clear();
    CHECK_THROWS_AS(fuse({d}), std::invalid_argument);
  }
}

TEST_CASE("top-k selection") {
  const std::vector<SystemSummary> s = {{0.10, 1024, 4}, {0.05, 2048, 8}, {0.10, 512, 8},
                                        {0.10, 512, 4}, {0.20, 256, 1}};
  CHECK(select_top_k(s, 1) == std::vector<std::size_t>{1});
  CHECK(select_top_k(s, 3) == std::vector<std::size_t>{1, 3, 2});
  CHECK(select_top_k(s, 10).size() == 5);
}
