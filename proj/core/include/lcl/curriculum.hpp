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

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lcl/matrix.hpp"
#include "lcl/similarity.hpp"

namespace lcl {

/// A target distribution over C classes for one example.
struct TargetVector {
  std::vector<double> probs;
  std::size_t true_class = 0;
};

/// Per-class soft targets V(t): row i is the target distribution for every
/// example whose true class is i. Rows stay on the simplex with the strict
/// argmax on the diagonal, and the off-diagonal mass shrinks geometrically
/// as the step counter advances.
///
/// Values are immutable; `step` and `advance_to` return new schedules.
class TargetSchedule {
 public:
  /// Validated construction: rows on the simplex (1e-12), strict diagonal argmax.
  TargetSchedule(Matrix targets, double epsilon, std::size_t step = 0);

  /// Adopts `targets` without checking row invariants so a broken schedule
  /// can still be handed to verify_curriculum. Epsilon is still checked.
  static TargetSchedule unchecked(Matrix targets, double epsilon, std::size_t step = 0);

  const Matrix& targets() const noexcept { return targets_; }
  double epsilon() const noexcept { return epsilon_; }
  std::size_t step() const noexcept { return step_; }
  std::size_t num_classes() const noexcept { return targets_.rows(); }
  std::span<const double> row(std::size_t i) const { return targets_.row(i); }

 private:
  struct Unchecked {};
  TargetSchedule(Unchecked, Matrix targets, double epsilon, std::size_t step);

  Matrix targets_;
  double epsilon_;
  std::size_t step_;
};

/// Row-normalized similarity: V(0)[i][j] = s(i, j) / sum_k s(i, k).
TargetSchedule init_targets(const SimilarityMatrix& sim, double epsilon);

/// One cooling update. With S = off-diagonal mass of row i:
///   diagonal  -> 1 / (1 + eps*S)
///   other j   -> eps * v_j / (1 + eps*S)
TargetSchedule step(const TargetSchedule& schedule);

/// Applies `step` until the counter reaches `t`. Throws OutOfRange if t is
/// behind the current step.
TargetSchedule advance_to(const TargetSchedule& schedule, std::size_t t);

/// In-place row update shared by `step` and the tests' scalar oracles.
void cool_row(std::span<double> row, std::size_t true_class, double epsilon);

TargetVector target_for(const TargetSchedule& schedule, std::size_t class_index);
TargetVector one_hot(std::size_t class_index, std::size_t num_classes);
TargetVector label_smoothing(std::size_t class_index, std::size_t num_classes, double alpha);

/// Shannon entropy in nats with 0 ln 0 = 0.
double entropy(std::span<const double> probs);
inline double entropy(const TargetVector& v) { return entropy(v.probs); }

/// Sum of every entry except `true_class`.
double off_diagonal_mass(std::span<const double> row, std::size_t true_class);

enum class Axiom {
  EntropyDecrease,  // entropy falls every step while the row is not one-hot
  Simplex,          // rows stay non-negative and sum to 1
  ArgmaxFixed,      // the true class keeps the strict argmax
  GeometricDecay,   // off-diagonal entries stay below eps^t times their start value
};

std::string_view to_string(Axiom axiom) noexcept;

struct AxiomViolation {
  std::size_t row = 0;
  std::size_t step = 0;  // offset from the schedule's own step
  Axiom axiom = Axiom::Simplex;
  std::string detail;
};

struct RowStepRecord {
  double simplex_residual = 0.0;
  std::size_t argmax = 0;
  double entropy = 0.0;
};

struct CurriculumReport {
  std::size_t num_classes = 0;
  std::size_t horizon = 0;
  double epsilon = 0.0;
  /// trace[row][k] describes row `row` after k steps, k = 0..horizon.
  std::vector<std::vector<RowStepRecord>> trace;
  std::vector<AxiomViolation> violations;

  bool passed() const noexcept { return violations.empty(); }
};

struct VerifyTolerances {
  double simplex = 1e-12;
  double one_hot = 1e-12;   // rows with off-diagonal mass at or below this are treated as one-hot
  double entropy = 1e-14;   // allowed entropy increase on one-hot rows
  double decay = 1e-12;
};

/// Iterates the schedule `horizon` steps and checks the curriculum axioms
/// on every row at every step. Violations are report content, not errors.
/// `keep_trace = false` skips the per-step records.
CurriculumReport verify_curriculum(const TargetSchedule& schedule, std::size_t horizon,
                                   const VerifyTolerances& tol = {}, bool keep_trace = true);

void write_report(std::ostream& out, const CurriculumReport& report, std::size_t max_violations = 20);

// CSV dump: "# epsilon=<e> step=<t>" then one row per class.
void write_schedule_csv(std::ostream& out, const TargetSchedule& schedule);
void save_schedule_csv(const std::filesystem::path& path, const TargetSchedule& schedule);
/// Reads without row validation so broken schedules can be verified.
TargetSchedule parse_schedule_csv(std::istream& in);
TargetSchedule load_schedule_csv(const std::filesystem::path& path);

}  // namespace lcl
