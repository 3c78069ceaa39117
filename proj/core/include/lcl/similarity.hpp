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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lcl/matrix.hpp"

namespace lcl {

/// Class identifiers with one embedding (or attribute) vector per class.
/// Row order defines the class index used everywhere else.
class EmbeddingTable {
 public:
  /// Throws DuplicateClass, DimensionMismatch or ZeroVector when the rows
  /// do not form a valid table.
  EmbeddingTable(std::vector<std::string> class_names, Matrix vectors);

  const std::vector<std::string>& class_names() const noexcept { return class_names_; }
  const Matrix& vectors() const noexcept { return vectors_; }
  std::size_t size() const noexcept { return class_names_.size(); }
  std::size_t dim() const noexcept { return vectors_.cols(); }

 private:
  std::vector<std::string> class_names_;
  Matrix vectors_;
};

enum class SimilaritySource { EmbeddingCosine, AttributeCosine, Simrank, External };

std::string_view to_string(SimilaritySource source) noexcept;

/// Symmetric C x C class similarity with unit diagonal, entries in [0, 1],
/// and every off-diagonal entry strictly below its row's diagonal.
/// Immutable once built.
class SimilarityMatrix {
 public:
  /// Validates every invariant; throws InvalidMatrix / StrictDominance.
  SimilarityMatrix(Matrix entries, std::vector<std::string> class_names, SimilaritySource source);

  static SimilarityMatrix identity(std::size_t num_classes);

  const Matrix& entries() const noexcept { return entries_; }
  const std::vector<std::string>& class_names() const noexcept { return class_names_; }
  SimilaritySource source() const noexcept { return source_; }
  std::size_t size() const noexcept { return entries_.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return entries_(i, j); }

 private:
  Matrix entries_;
  std::vector<std::string> class_names_;
  SimilaritySource source_;
};

/// Returns a human-readable description of the first invariant that
/// `entries` violates as a similarity matrix, or nullopt when it is valid.
std::optional<std::string> find_similarity_violation(const Matrix& entries);

/// Parent -> child edges over named nodes. `leaves` fixes class order.
struct HierarchyGraph {
  std::vector<std::string> nodes;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // (parent, child) node indices
  std::vector<std::size_t> leaves;                         // node indices, class order

  /// Throws InvalidGraph on self-loops, cycles, or a leaf set that does
  /// not match the childless nodes.
  void validate() const;
};

EmbeddingTable parse_embeddings(std::istream& in, std::optional<std::size_t> expected_dim = {});
EmbeddingTable load_embeddings(const std::filesystem::path& path,
                               std::optional<std::size_t> expected_dim = {});

/// Writes the table back in the whitespace-separated embedding format.
void write_embeddings(std::ostream& out, const EmbeddingTable& table);
void save_embeddings(const std::filesystem::path& path, const EmbeddingTable& table);

HierarchyGraph parse_hierarchy(std::istream& in);
HierarchyGraph load_hierarchy(const std::filesystem::path& path);

/// <u, v> / (|u| |v|). Throws ZeroNorm or DimensionMismatch.
double cosine(std::span<const double> u, std::span<const double> v);

struct CosineBuild {
  SimilarityMatrix matrix;
  std::size_t clamped_entries = 0;  // off-diagonal pairs (i < j) replaced by 0
};

/// Pairwise cosine similarity of the table rows. Negative cosines are
/// clamped to zero when `clamp_negative` is set and rejected otherwise.
/// Off-diagonal cosines within 1e-12 of 1 are rejected as duplicates.
CosineBuild build_cosine_similarity(const EmbeddingTable& table, bool clamp_negative = true,
                                    SimilaritySource source = SimilaritySource::EmbeddingCosine);

struct SimrankOptions {
  double decay = 0.8;
  double tol = 1e-6;
  std::size_t max_iter = 100;
};

/// In-neighbour (parent-side) simrank over the whole graph, restricted to
/// the leaves. Throws NonConvergence with the final residual.
SimilarityMatrix simrank(const HierarchyGraph& graph, const SimrankOptions& options = {});

/// Eigenvalues of a symmetric matrix, descending. The Matrix overload skips
/// similarity invariants so arbitrary symmetric inputs can be analysed.
std::vector<double> eigenspectrum(const SimilarityMatrix& sim);
std::vector<double> eigenspectrum(const Matrix& symmetric);

/// exp of the Shannon entropy of the normalized nonnegative spectrum.
double effective_rank(std::span<const double> eigenvalues);

/// Entrywise 1 - s.
Matrix dissimilarity(const SimilarityMatrix& sim);

// CSV: header row of class names, then C rows in shortest round-trip form.
void write_similarity_csv(std::ostream& out, const Matrix& entries,
                          const std::vector<std::string>& class_names);
void write_similarity_csv(std::ostream& out, const SimilarityMatrix& sim);
void save_similarity_csv(const std::filesystem::path& path, const SimilarityMatrix& sim);

/// Raw parse without invariant checks; throws Parse on malformed input.
std::pair<Matrix, std::vector<std::string>> parse_similarity_csv(std::istream& in);
std::pair<Matrix, std::vector<std::string>> read_similarity_csv(const std::filesystem::path& path);

/// Parse and validate as an externally supplied similarity matrix.
SimilarityMatrix load_similarity_csv(const std::filesystem::path& path);

}  // namespace lcl
