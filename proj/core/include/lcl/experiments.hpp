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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lcl/data.hpp"
#include "lcl/matrix.hpp"
#include "lcl/model.hpp"
#include "lcl/similarity.hpp"

namespace lcl {

enum class Encoding { SL, LS, LCL, KD, DML };

std::string_view to_string(Encoding encoding) noexcept;
Encoding parse_encoding(std::string_view text);

enum class SimilarityKind { Embedding, Attribute, Hierarchy, File };

std::string_view to_string(SimilarityKind kind) noexcept;
SimilarityKind parse_similarity_kind(std::string_view text);

/// One point of the experiment grid. Seeds are carried along but are not
/// part of the fingerprint: trials of the same config with different seeds
/// aggregate together.
struct ExperimentConfig {
  Encoding encoding = Encoding::SL;
  std::optional<double> epsilon;         // LCL only
  std::optional<double> alpha;           // LS only
  std::optional<double> kd_temperature;  // KD only
  double dr = 1.0;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3};

  std::size_t epochs = 30;
  std::size_t batch_size = 16;
  double lr = 0.1;
  double lr_decay = 1.0;           // multiplicative step decay
  std::size_t lr_decay_every = 0;  // epochs between decays; 0 disables
  double lambda = 1e-4;
  Architecture arch = Architecture::Linear;
  std::size_t hidden = 64;         // ignored for linear
  SimilarityKind similarity_source = SimilarityKind::Embedding;

  /// Fills the per-encoding defaults (alpha 0.1, temperature 1) when unset.
  static ExperimentConfig make(Encoding encoding);

  /// Throws InvalidArgument when an encoding-specific field is missing or
  /// present for the wrong encoding, or a hyperparameter is out of range.
  void validate() const;

  /// Canonical text of every result-affecting field except the seeds.
  std::string fingerprint() const;
  /// Short readable id: encoding, its parameter, dr, and a fingerprint hash.
  std::string config_id() const;

  double learning_rate(std::size_t epoch) const;
};

struct TrialResult {
  std::string config_id;
  std::string encoding;  // "DML2" marks the companion model of a DML pair
  std::optional<double> epsilon;
  std::optional<double> alpha;
  double dr = 1.0;
  std::uint64_t seed = 0;
  double top1 = 0.0;
  double top5 = 0.0;
  double final_loss = 0.0;
  std::vector<double> loss_history;
  std::size_t epochs = 0;
  double wall_ms = 0.0;
};

struct TrialOptions {
  /// Re-checks the curriculum axioms on the LCL schedule before training.
  bool debug_verify_curriculum = false;
};

struct TrialOutcome {
  TrialResult result;
  ClassifierParams params;
  std::optional<TrialResult> companion;  // DML second model
  std::optional<ClassifierParams> companion_params;
};

/// Trains and evaluates one (config, seed). `sim` is required for LCL and
/// ignored otherwise. Deterministic in (config, seed, data).
TrialOutcome run_trial(const ExperimentConfig& config, std::uint64_t seed, const Dataset& train,
                       const Dataset& test, const SimilarityMatrix* sim = nullptr,
                       const TrialOptions& options = {});

/// Fraction of rows whose label ranks within the top k; ties between equal
/// probabilities go to the lower class index.
double topk_accuracy(std::span<const std::vector<double>> pred_probs, std::span<const std::size_t> labels,
                     std::size_t k);

/// Mean and population (divisor n) standard deviation per config.
struct AggregateRow {
  std::string config_id;
  std::string encoding;
  std::optional<double> epsilon;
  std::optional<double> alpha;
  double dr = 1.0;
  std::size_t n_trials = 0;
  double top1_mean = 0.0;
  double top1_std = 0.0;
  double top5_mean = 0.0;
  double top5_std = 0.0;
};

/// Groups by config_id; output sorted by config_id.
std::vector<AggregateRow> aggregate(std::span<const TrialResult> results);

struct FriedmanResult {
  std::size_t num_rows = 0;     // N
  std::size_t num_methods = 0;  // k
  std::vector<double> avg_ranks;
  std::vector<std::size_t> order;  // method indices, best average rank first
  double chi2_f = 0.0;
  std::optional<double> f_f;      // unset when N(k-1) == chi2_f
  std::optional<double> p_value;  // upper tail of F(k-1, (k-1)(N-1))
};

/// Friedman rank statistic with the Iman-Davenport correction. Rows are
/// settings, columns methods; higher scores rank better (rank 1).
FriedmanResult friedman_iman_davenport(const Matrix& scores);

struct RankReport {
  std::vector<std::string> methods;
  std::vector<std::string> settings;
  Matrix scores;  // settings x methods, mean top-1
  std::optional<FriedmanResult> test;
  std::vector<std::string> notices;
};

/// Method = encoding plus its parameter; setting = optional tag + dr.
/// Settings missing any method are dropped with a notice; the test is
/// skipped when fewer than two settings or two methods remain.
RankReport rank_methods(std::span<const AggregateRow> rows, std::span<const std::string> setting_tags = {});

void write_raw_csv(std::ostream& out, std::span<const TrialResult> results);
void write_aggregate_csv(std::ostream& out, std::span<const AggregateRow> rows);
void write_curves_csv(std::ostream& out, std::span<const TrialResult> results);
void write_rank_report(std::ostream& out, const RankReport& report);
void print_aggregate_table(std::ostream& out, std::span<const AggregateRow> rows);

/// Reads a raw results CSV back. Throws Parse on a missing column.
std::vector<TrialResult> parse_raw_csv(std::istream& in);
std::vector<TrialResult> load_raw_csv(const std::filesystem::path& path);

struct SuiteInputs {
  const Dataset* train = nullptr;
  const Dataset* test = nullptr;
  std::map<SimilarityKind, SimilarityMatrix> similarities;
};

struct SuiteOptions {
  std::size_t jobs = 1;
  std::optional<std::filesystem::path> out_dir;
  TrialOptions trial;
};

struct TrialFailure {
  std::string config_id;
  std::uint64_t seed = 0;
  std::string message;
};

struct SuiteResult {
  std::vector<TrialResult> trials;  // sorted by config_id, then seed
  std::vector<AggregateRow> aggregates;
  RankReport ranks;
  std::vector<TrialFailure> failures;
};

/// Runs every (config, seed) on up to `jobs` worker threads. A failing trial
/// is recorded and the rest continue. With out_dir set, writes raw.csv,
/// aggregate.csv, curves.csv, ranks.txt and (if any) failures.txt.
SuiteResult run_suite(std::span<const ExperimentConfig> grid, const SuiteInputs& inputs,
                      const SuiteOptions& options = {});

}  // namespace lcl
