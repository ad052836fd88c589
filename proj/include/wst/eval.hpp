// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The wstlid Authors

#pragma once

#include "wst/types.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace wst {

/// Per-trial logits over L languages. labels is either empty (blind) or holds
/// one index in [0, L) per trial.
struct TrialScores {
  std::vector<std::string> utterance_ids;
  Matrix logits;
  std::vector<int> labels;
  std::vector<std::string> language_names;

  std::size_t trials() const noexcept { return static_cast<std::size_t>(logits.rows()); }
  std::size_t languages() const noexcept { return static_cast<std::size_t>(logits.cols()); }
  bool has_labels() const noexcept { return !labels.empty(); }
  void validate() const;
};

/// Miss rate equals false-alarm rate, interpolated linearly between the two
/// operating points that bracket the crossing. Thresholds run over the sorted
/// union of scores; a score s is accepted at threshold t when s >= t.
double compute_eer(std::span<const double> target, std::span<const double> nontarget);

/// Mean over languages of the one-vs-rest EER on each logit column.
double compute_eer(const TrialScores& scores);

/// logit(l) - logsumexp(other logits), per trial and language.
Matrix detection_scores(const Matrix& logits);

/// Pairwise average detection cost with decisions at threshold 0 on
/// detection_scores.
double compute_cavg(const TrialScores& scores, double p_target = 0.5);

/// Mean multinomial cross-entropy of the labels under softmax(logits).
double log_loss(const TrialScores& scores);

struct TrainingOptions {
  int epochs = 300;
  double learning_rate = 0.5;
  double l2 = 1e-4;
  std::uint64_t seed = 0;
};

struct LinearClassifier {
  Matrix weights;         ///< L x D
  Eigen::VectorXd bias;   ///< L
  int epochs = 0;
  double learning_rate = 0.0;
  double initial_loss = 0.0;
  double final_loss = 0.0;

  Eigen::Index languages() const noexcept { return weights.rows(); }
  Eigen::Index dimension() const noexcept { return weights.cols(); }
};

/// Mean cross-entropy of softmax(X W^T + b) plus (l2 / 2) |W|^2, with optional
/// gradients. X is N x D, W is L x D.
double softmax_objective(const Matrix& X, std::span<const int> labels, const Matrix& W,
                         const Eigen::VectorXd& b, double l2, Matrix* grad_w = nullptr,
                         Eigen::VectorXd* grad_b = nullptr);

/// Full-batch gradient descent on standardized features; the step is halved
/// whenever it would raise the objective, so the loss never increases. The
/// standardization is folded back into the returned affine model.
LinearClassifier train_linear_classifier(const Matrix& X, std::span<const int> labels,
                                         int languages, const TrainingOptions& options = {});

Eigen::VectorXd classify(const LinearClassifier& model, std::span<const double> features);
Matrix classify(const LinearClassifier& model, const Matrix& X);

struct FusionModel {
  RealVector weights;    ///< one per system
  Eigen::VectorXd bias;  ///< one per language
  double l2_penalty = 1e-3;
};

struct FusionOptions {
  double l2 = 1e-3;
  int max_iterations = 200;
  double tolerance = 1e-12;
};

/// Mean cross-entropy of sum_s w_s logits_s + b plus (l2 / 2) |w|^2, with
/// optional gradients. Systems must be aligned and labelled.
double fusion_objective(std::span<const TrialScores> systems, std::span<const double> weights,
                        const Eigen::VectorXd& bias, double l2, RealVector* grad_w = nullptr,
                        Eigen::VectorXd* grad_b = nullptr);

/// Damped Newton minimization of fusion_objective. A single system keeps a
/// positive weight.
FusionModel train_fusion(std::span<const TrialScores> systems, const FusionOptions& options = {});

TrialScores apply_fusion(const FusionModel& model, std::span<const TrialScores> systems);

/// Throws unless all systems share trial ids, labels and language count.
void check_aligned(std::span<const TrialScores> systems);

struct SystemSummary {
  double eer = 0.0;
  int T = 0;
  int Q = 0;
};

/// Indices of the k systems with lowest EER; ties go to smaller T, then Q.
std::vector<std::size_t> select_top_k(std::span<const SystemSummary> systems, std::size_t k);

}  // namespace wst
