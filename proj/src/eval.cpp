// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The wstlid Authors

#include "wst/eval.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace wst {

void TrialScores::validate() const {
  if (!logits.allFinite()) throw std::invalid_argument("TrialScores: non-finite logits");
  if (!utterance_ids.empty() && utterance_ids.size() != trials()) {
    throw std::invalid_argument("TrialScores: id count does not match trial count");
  }
  if (!language_names.empty() && language_names.size() != languages()) {
    throw std::invalid_argument("TrialScores: language name count does not match logit width");
  }
  if (!labels.empty()) {
    if (labels.size() != trials()) {
      throw std::invalid_argument("TrialScores: label count does not match trial count");
    }
    for (int l : labels) {
      if (l < 0 || static_cast<std::size_t>(l) >= languages()) {
        throw std::invalid_argument("TrialScores: label out of range");
      }
    }
  }
}

double compute_eer(std::span<const double> target, std::span<const double> nontarget) {
  if (target.empty() || nontarget.empty()) {
    throw std::invalid_argument("compute_eer: target and nontarget scores must be non-empty");
  }
  std::vector<double> tgt(target.begin(), target.end());
  std::vector<double> non(nontarget.begin(), nontarget.end());
  std::sort(tgt.begin(), tgt.end());
  std::sort(non.begin(), non.end());
  std::vector<double> thresholds;
  thresholds.reserve(tgt.size() + non.size());
  std::merge(tgt.begin(), tgt.end(), non.begin(), non.end(), std::back_inserter(thresholds));
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  const auto nt = static_cast<double>(tgt.size());
  const auto nn = static_cast<double>(non.size());
  double prev_miss = 0.0;
  double prev_fa = 1.0;
  for (std::size_t i = 0; i <= thresholds.size(); ++i) {
    double miss = 1.0;
    double fa = 0.0;
    if (i < thresholds.size()) {
      const double t = thresholds[i];
      miss = static_cast<double>(std::lower_bound(tgt.begin(), tgt.end(), t) - tgt.begin()) / nt;
      fa = static_cast<double>(non.end() - std::lower_bound(non.begin(), non.end(), t)) / nn;
    }
    if (miss >= fa) {
      if (i == 0) return miss;
      const double d0 = prev_fa - prev_miss;
      const double d1 = fa - miss;
      const double a = d0 / (d0 - d1);
      return prev_miss + a * (miss - prev_miss);
    }
    prev_miss = miss;
    prev_fa = fa;
  }
  return 1.0;
}

double compute_eer(const TrialScores& scores) {
  scores.validate();
  if (!scores.has_labels()) throw std::invalid_argument("compute_eer: labels required");
  double sum = 0.0;
  const auto langs = static_cast<Eigen::Index>(scores.languages());
  for (Eigen::Index l = 0; l < langs; ++l) {
    RealVector tgt;
    RealVector non;
    for (std::size_t n = 0; n < scores.trials(); ++n) {
      const double s = scores.logits(static_cast<Eigen::Index>(n), l);
      (scores.labels[n] == l ? tgt : non).push_back(s);
    }
    if (tgt.empty() || non.empty()) {
      throw std::invalid_argument("compute_eer: language " + std::to_string(l) +
                                  " needs target and nontarget trials");
    }
    sum += compute_eer(tgt, non);
  }
  return sum / static_cast<double>(langs);
}

Matrix detection_scores(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index n = 0; n < logits.rows(); ++n) {
    for (Eigen::Index l = 0; l < logits.cols(); ++l) {
      double m = -std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < logits.cols(); ++j) {
        if (j != l) m = std::max(m, logits(n, j));
      }
      double acc = 0.0;
      for (Eigen::Index j = 0; j < logits.cols(); ++j) {
        if (j != l) acc += std::exp(logits(n, j) - m);
      }
      out(n, l) = logits(n, l) - (m + std::log(acc));
    }
  }
  return out;
}

double compute_cavg(const TrialScores& scores, double p_target) {
  scores.validate();
  if (!scores.has_labels()) throw std::invalid_argument("compute_cavg: labels required");
  if (!(p_target > 0.0 && p_target < 1.0)) {
    throw std::invalid_argument("compute_cavg: p_target must lie in (0, 1)");
  }
  const auto langs = static_cast<Eigen::Index>(scores.languages());
  if (langs < 2) throw std::invalid_argument("compute_cavg: need at least two languages");
  std::vector<double> count(static_cast<std::size_t>(langs), 0.0);
  for (int l : scores.labels) count[static_cast<std::size_t>(l)] += 1.0;
  for (Eigen::Index l = 0; l < langs; ++l) {
    if (count[static_cast<std::size_t>(l)] == 0.0) {
      throw std::invalid_argument("compute_cavg: language " + std::to_string(l) + " has no trials");
    }
  }
  const Matrix det = detection_scores(scores.logits);
  // accept(t, n): trials of language n accepted by the detector for t.
  Matrix accept = Matrix::Zero(langs, langs);
  for (std::size_t n = 0; n < scores.trials(); ++n) {
    const int truth = scores.labels[n];
    for (Eigen::Index t = 0; t < langs; ++t) {
      if (det(static_cast<Eigen::Index>(n), t) >= 0.0) accept(t, truth) += 1.0;
    }
  }
  double total = 0.0;
  for (Eigen::Index t = 0; t < langs; ++t) {
    const double miss = 1.0 - accept(t, t) / count[static_cast<std::size_t>(t)];
    double fa = 0.0;
    for (Eigen::Index n = 0; n < langs; ++n) {
      if (n != t) fa += accept(t, n) / count[static_cast<std::size_t>(n)];
    }
    total += p_target * miss + (1.0 - p_target) / static_cast<double>(langs - 1) * fa;
  }
  return total / static_cast<double>(langs);
}

namespace {

// Row-wise log-softmax cross-entropy; writes probabilities into p.
double cross_entropy(const Matrix& z, std::span<const int> labels, Matrix& p) {
  p.resize(z.rows(), z.cols());
  double loss = 0.0;
  for (Eigen::Index n = 0; n < z.rows(); ++n) {
    const double m = z.row(n).maxCoeff();
    double acc = 0.0;
    for (Eigen::Index l = 0; l < z.cols(); ++l) {
      p(n, l) = std::exp(z(n, l) - m);
      acc += p(n, l);
    }
    p.row(n) /= acc;
    loss -= z(n, labels[static_cast<std::size_t>(n)]) - m - std::log(acc);
  }
  return loss / static_cast<double>(z.rows());
}

void check_labels(std::span<const int> labels, Eigen::Index rows, int languages) {
  if (labels.size() != static_cast<std::size_t>(rows)) {
    throw std::invalid_argument("label count does not match the number of rows");
  }
  for (int l : labels) {
    if (l < 0 || l >= languages) throw std::invalid_argument("label out of range");
  }
}

}  // namespace

double log_loss(const TrialScores& scores) {
  scores.validate();
  if (!scores.has_labels() || scores.trials() == 0) {
    throw std::invalid_argument("log_loss: labelled trials required");
  }
  Matrix p;
  return cross_entropy(scores.logits, scores.labels, p);
}

double softmax_objective(const Matrix& X, std::span<const int> labels, const Matrix& W,
                         const Eigen::VectorXd& b, double l2, Matrix* grad_w,
                         Eigen::VectorXd* grad_b) {
  if (X.cols() != W.cols() || W.rows() != b.size() || X.rows() == 0) {
    throw std::invalid_argument("softmax_objective: dimension mismatch");
  }
  check_labels(labels, X.rows(), static_cast<int>(W.rows()));
  Matrix z = X * W.transpose();
  z.rowwise() += b.transpose();
  Matrix p;
  const double loss = cross_entropy(z, labels, p) + 0.5 * l2 * W.squaredNorm();
  if (grad_w != nullptr || grad_b != nullptr) {
    for (Eigen::Index n = 0; n < p.rows(); ++n) p(n, labels[static_cast<std::size_t>(n)]) -= 1.0;
    p /= static_cast<double>(X.rows());
    if (grad_w != nullptr) *grad_w = p.transpose() * X + l2 * W;
    if (grad_b != nullptr) *grad_b = p.colwise().sum().transpose();
  }
  return loss;
}

LinearClassifier train_linear_classifier(const Matrix& X, std::span<const int> labels,
                                         int languages, const TrainingOptions& options) {
  if (X.rows() == 0 || X.cols() == 0) throw std::invalid_argument("train_linear_classifier: no data");
  if (!X.allFinite()) throw std::invalid_argument("train_linear_classifier: non-finite features");
  if (languages < 2) throw std::invalid_argument("train_linear_classifier: need >= 2 languages");
  check_labels(labels, X.rows(), languages);
  std::vector<int> seen(labels.begin(), labels.end());
  std::sort(seen.begin(), seen.end());
  if (std::unique(seen.begin(), seen.end()) - seen.begin() < 2) {
    throw std::invalid_argument("train_linear_classifier: need at least two classes present");
  }
  if (options.epochs < 0 || !(options.learning_rate > 0.0) || options.l2 < 0.0) {
    throw std::invalid_argument("train_linear_classifier: invalid hyper-parameters");
  }

  const Eigen::RowVectorXd mean = X.colwise().mean();
  Eigen::RowVectorXd scale(X.cols());
  for (Eigen::Index d = 0; d < X.cols(); ++d) {
    const double sd = std::sqrt((X.col(d).array() - mean[d]).square().mean());
    scale[d] = sd > 1e-12 ? sd : 1.0;
  }
  Matrix Z = X;
  Z.rowwise() -= mean;
  Z.array().rowwise() /= scale.array();

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> init(0.0, 0.01);
  Matrix W(languages, X.cols());
  for (Eigen::Index i = 0; i < W.size(); ++i) W.data()[i] = init(rng);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(languages);

  Matrix gw;
  Eigen::VectorXd gb;
  double lr = options.learning_rate;
  double loss = softmax_objective(Z, labels, W, b, options.l2, &gw, &gb);
  LinearClassifier model;
  model.initial_loss = loss;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    bool moved = false;
    for (int attempt = 0; attempt < 40; ++attempt) {
      const Matrix W2 = W - lr * gw;
      const Eigen::VectorXd b2 = b - lr * gb;
      const double next = softmax_objective(Z, labels, W2, b2, options.l2);
      if (next <= loss) {
        W = W2;
        b = b2;
        loss = softmax_objective(Z, labels, W, b, options.l2, &gw, &gb);
        moved = true;
        break;
      }
      lr *= 0.5;
    }
    if (!moved) break;
  }

  model.weights = W.array().rowwise() / scale.array();
  model.bias = b - model.weights * mean.transpose();
  model.epochs = options.epochs;
  model.learning_rate = options.learning_rate;
  model.final_loss = loss;
  return model;
}

Eigen::VectorXd classify(const LinearClassifier& model, std::span<const double> features) {
  if (static_cast<Eigen::Index>(features.size()) != model.dimension()) {
    throw std::invalid_argument("classify: expected " + std::to_string(model.dimension()) +
                                " features, got " + std::to_string(features.size()));
  }
  const Eigen::Map<const Eigen::VectorXd> f(features.data(), model.dimension());
  return model.weights * f + model.bias;
}

Matrix classify(const LinearClassifier& model, const Matrix& X) {
  if (X.cols() != model.dimension()) throw std::invalid_argument("classify: dimension mismatch");
  Matrix z = X * model.weights.transpose();
  z.rowwise() += model.bias.transpose();
  return z;
}

void check_aligned(std::span<const TrialScores> systems) {
  if (systems.empty()) throw std::invalid_argument("fusion: no systems");
  const auto& ref = systems[0];
  ref.validate();
  for (const auto& s : systems) {
    s.validate();
    if (s.trials() != ref.trials() || s.languages() != ref.languages()) {
      throw std::invalid_argument("fusion: systems differ in trial or language count");
    }
    if (!s.utterance_ids.empty() && !ref.utterance_ids.empty() && s.utterance_ids != ref.utterance_ids) {
      throw std::invalid_argument("fusion: trial order differs between systems");
    }
    if (s.has_labels() && ref.has_labels() && s.labels != ref.labels) {
      throw std::invalid_argument("fusion: labels differ between systems");
    }
  }
}

namespace {

Matrix fused_logits(std::span<const TrialScores> systems, std::span<const double> w,
                    const Eigen::VectorXd& b) {
  Matrix z = Matrix::Zero(systems[0].logits.rows(), systems[0].logits.cols());
  for (std::size_t s = 0; s < systems.size(); ++s) z += w[s] * systems[s].logits;
  z.rowwise() += b.transpose();
  return z;
}

const std::vector<int>& fusion_labels(std::span<const TrialScores> systems) {
  for (const auto& s : systems) {
    if (s.has_labels()) return s.labels;
  }
  throw std::invalid_argument("fusion: labels required");
}

}  // namespace

double fusion_objective(std::span<const TrialScores> systems, std::span<const double> weights,
                        const Eigen::VectorXd& bias, double l2, RealVector* grad_w,
                        Eigen::VectorXd* grad_b) {
  check_aligned(systems);
  if (weights.size() != systems.size() ||
      bias.size() != static_cast<Eigen::Index>(systems[0].languages())) {
    throw std::invalid_argument("fusion_objective: parameter size mismatch");
  }
  const auto& labels = fusion_labels(systems);
  const Matrix z = fused_logits(systems, weights, bias);
  Matrix p;
  double loss = cross_entropy(z, labels, p);
  for (double w : weights) loss += 0.5 * l2 * w * w;
  if (grad_w != nullptr || grad_b != nullptr) {
    for (Eigen::Index n = 0; n < p.rows(); ++n) p(n, labels[static_cast<std::size_t>(n)]) -= 1.0;
    p /= static_cast<double>(p.rows());
    if (grad_w != nullptr) {
      grad_w->assign(systems.size(), 0.0);
      for (std::size_t s = 0; s < systems.size(); ++s) {
        (*grad_w)[s] = (p.array() * systems[s].logits.array()).sum() + l2 * weights[s];
      }
    }
    if (grad_b != nullptr) *grad_b = p.colwise().sum().transpose();
  }
  return loss;
}

FusionModel train_fusion(std::span<const TrialScores> systems, const FusionOptions& options) {
  check_aligned(systems);
  fusion_labels(systems);
  if (options.l2 < 0.0) throw std::invalid_argument("train_fusion: l2 must be non-negative");
  const auto S = static_cast<Eigen::Index>(systems.size());
  const auto L = static_cast<Eigen::Index>(systems[0].languages());
  const auto N = static_cast<Eigen::Index>(systems[0].trials());
  if (N == 0) throw std::invalid_argument("train_fusion: no trials");

  RealVector w(static_cast<std::size_t>(S), 1.0 / static_cast<double>(S));
  Eigen::VectorXd b = Eigen::VectorXd::Zero(L);

  auto solve = [&](bool optimize_weights) {
    const Eigen::Index dim = (optimize_weights ? S : 0) + L;
    double loss = fusion_objective(systems, w, b, options.l2);
    for (int it = 0; it < options.max_iterations; ++it) {
      RealVector gw;
      Eigen::VectorXd gb;
      fusion_objective(systems, w, b, options.l2, &gw, &gb);
      const Matrix z = fused_logits(systems, w, b);
      Eigen::VectorXd g(dim);
      Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
      const Eigen::Index off = optimize_weights ? S : 0;
      if (optimize_weights) {
        for (Eigen::Index s = 0; s < S; ++s) g[s] = gw[static_cast<std::size_t>(s)];
      }
      g.tail(L) = gb;
      Eigen::MatrixXd J(L, dim);
      for (Eigen::Index n = 0; n < N; ++n) {
        Eigen::VectorXd p = (z.row(n).array() - z.row(n).maxCoeff()).exp().transpose();
        p /= p.sum();
        if (optimize_weights) {
          for (Eigen::Index s = 0; s < S; ++s) {
            J.col(s) = systems[static_cast<std::size_t>(s)].logits.row(n).transpose();
          }
        }
        J.rightCols(L).setIdentity();
        const Eigen::MatrixXd A = Eigen::MatrixXd(p.asDiagonal()) - p * p.transpose();
        H.noalias() += J.transpose() * A * J;
      }
      H /= static_cast<double>(N);
      if (optimize_weights) H.topLeftCorner(S, S).diagonal().array() += options.l2;
      // The bias is only defined up to a common shift; the ridge fixes it.
      H.diagonal().array() += 1e-9;
      const Eigen::VectorXd step = H.ldlt().solve(g);
      double t = 1.0;
      bool improved = false;
      for (int k = 0; k < 50; ++k) {
        RealVector w2 = w;
        if (optimize_weights) {
          for (Eigen::Index s = 0; s < S; ++s) w2[static_cast<std::size_t>(s)] -= t * step[s];
        }
        const Eigen::VectorXd b2 = b - t * step.segment(off, L);
        const double next = fusion_objective(systems, w2, b2, options.l2);
        if (next <= loss) {
          const double gain = loss - next;
          w = w2;
          b = b2;
          loss = next;
          improved = gain > options.tolerance * std::max(1.0, std::abs(loss));
          break;
        }
        t *= 0.5;
      }
      if (!improved) break;
    }
  };

  solve(true);
  if (S == 1 && !(w[0] > 0.0)) {
    w[0] = 1e-6;
    solve(false);
  }
  b.array() -= b.mean();

  FusionModel model;
  model.weights = w;
  model.bias = b;
  model.l2_penalty = options.l2;
  return model;
}

TrialScores apply_fusion(const FusionModel& model, std::span<const TrialScores> systems) {
  if (systems.size() != model.weights.size()) {
    throw std::invalid_argument("apply_fusion: expected " + std::to_string(model.weights.size()) +
                                " systems, got " + std::to_string(systems.size()));
  }
  check_aligned(systems);
  if (model.bias.size() != static_cast<Eigen::Index>(systems[0].languages())) {
    throw std::invalid_argument("apply_fusion: bias length does not match language count");
  }
  TrialScores out;
  out.utterance_ids = systems[0].utterance_ids;
  out.labels = systems[0].labels;
  out.language_names = systems[0].language_names;
  out.logits = fused_logits(systems, model.weights, model.bias);
  return out;
}

std::vector<std::size_t> select_top_k(std::span<const SystemSummary> systems, std::size_t k) {
  std::vector<std::size_t> idx(systems.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = systems[a];
    const auto& y = systems[b];
    if (x.eer != y.eer) return x.eer < y.eer;
    if (x.T != y.T) return x.T < y.T;
    return x.Q < y.Q;
  });
  idx.resize(std::min(k, idx.size()));
  return idx;
}

}  // namespace wst
