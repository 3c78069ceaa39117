/*
 * Copyright 2026 The LCL Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "lcl/matrix.hpp"

namespace lcl {

enum class Architecture { Linear, Mlp1 };

std::string_view to_string(Architecture arch) noexcept;
Architecture parse_architecture(std::string_view text);

/// Softmax classifier parameters.
///   linear: p = softmax(W_out^T x + b_out),                 W_out is d x C
///   mlp1:   p = softmax(W_out^T relu(W1^T x + b1) + b_out), W1 is d x h, W_out is h x C
/// For linear models w1/b1 are empty.
struct ClassifierParams {
  Architecture arch = Architecture::Linear;
  Matrix w1;
  std::vector<double> b1;
  Matrix w_out;
  std::vector<double> b_out;

  std::size_t input_dim() const noexcept { return arch == Architecture::Linear ? w_out.rows() : w1.rows(); }
  std::size_t hidden() const noexcept { return arch == Architecture::Linear ? 0 : w1.cols(); }
  std::size_t num_classes() const noexcept { return w_out.cols(); }

  friend bool operator==(const ClassifierParams&, const ClassifierParams&) = default;
};

/// d(objective)/d(params), shape-matched to the params it was taken at.
struct GradientBundle {
  Matrix w1;
  std::vector<double> b1;
  Matrix w_out;
  std::vector<double> b_out;
};

/// Glorot-uniform weights, zero biases, deterministic in `seed`.
ClassifierParams init_params(Architecture arch, std::size_t input_dim, std::size_t hidden,
                             std::size_t num_classes, std::uint64_t seed);

/// Zero-filled params; handy for hand-built test cases.
ClassifierParams zero_params(Architecture arch, std::size_t input_dim, std::size_t hidden, std::size_t num_classes);

/// Throws ShapeMismatch / NonFinite.
void validate(const ClassifierParams& params);

/// Pre-softmax outputs.
std::vector<double> logits(const ClassifierParams& params, std::span<const double> x);

/// Max-shifted softmax of logits / temperature.
std::vector<double> softmax(std::span<const double> logits, double temperature = 1.0);

std::vector<double> forward(const ClassifierParams& params, std::span<const double> x, double temperature = 1.0);

/// Floor applied to predicted probabilities inside logarithms.
inline constexpr double kProbFloor = 1e-12;

double cross_entropy(std::span<const double> pred, std::span<const double> target);
double kl_divergence(std::span<const double> p, std::span<const double> q);

/// One training example: features and its target distribution.
struct Example {
  std::span<const double> x;
  std::span<const double> target;
};

/// Mean cross-entropy over the batch + lambda * 0.5 * sum of squared weights
/// (biases excluded).
double objective(const ClassifierParams& params, std::span<const Example> batch, double lambda);

/// Analytic gradient of `objective`. ReLU subgradient at 0 is 0.
GradientBundle gradient(const ClassifierParams& params, std::span<const Example> batch, double lambda);

/// Mutual-learning gradient for one of a model pair: the loss per example is
/// CE(p, target) + KL(peer || p) with the peer prediction held constant, so
/// the output error signal is (p - target) + (p - peer).
GradientBundle mutual_gradient(const ClassifierParams& params, std::span<const Example> batch,
                               std::span<const std::vector<double>> peer_preds, double lambda);

/// Objective value matching `mutual_gradient`.
double mutual_objective(const ClassifierParams& params, std::span<const Example> batch,
                        std::span<const std::vector<double>> peer_preds, double lambda);

struct LossAndGradient {
  double loss = 0.0;
  GradientBundle grad;
};

/// `objective` and `gradient` from a single forward pass per example.
LossAndGradient loss_and_gradient(const ClassifierParams& params, std::span<const Example> batch, double lambda);
LossAndGradient mutual_loss_and_gradient(const ClassifierParams& params, std::span<const Example> batch,
                                         std::span<const std::vector<double>> peer_preds, double lambda);

/// params - lr * grads, every field. Throws ShapeMismatch.
ClassifierParams sgd_step(const ClassifierParams& params, const GradientBundle& grads, double lr);

/// (CE(p1, t1) + KL(p2 || p1), CE(p2, t2) + KL(p1 || p2)).
std::pair<double, double> dml_pair_losses(std::span<const double> pred1, std::span<const double> pred2,
                                          std::span<const double> target1, std::span<const double> target2);

/// Euclidean norm over every parameter array.
double param_distance(const ClassifierParams& a, const ClassifierParams& b);

// Checkpoint format (text):
//   LCLM1
//   arch <linear|mlp1>
//   dims <d> <h> <C>
//   w1 <rows> <cols>      then the values, one matrix row per line
//   b1 <n>                then n values
//   w_out <rows> <cols>   then values
//   b_out <n>             then values
// Values are written in shortest round-trip form so a load reproduces them exactly.
void write_checkpoint(std::ostream& out, const ClassifierParams& params);
ClassifierParams read_checkpoint(std::istream& in);
void save_checkpoint(const std::filesystem::path& path, const ClassifierParams& params);
ClassifierParams load_checkpoint(const std::filesystem::path& path);

}  // namespace lcl
