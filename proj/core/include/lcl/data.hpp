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
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "lcl/matrix.hpp"
#include "lcl/similarity.hpp"

namespace lcl {

enum class Split { Train, Test };

std::string_view to_string(Split split) noexcept;

/// Dense features with integer labels in [0, C). A training split must
/// contain every class at least once.
class Dataset {
 public:
  Dataset(Matrix features, std::vector<std::size_t> labels, std::size_t num_classes, Split split);

  const Matrix& features() const noexcept { return features_; }
  const std::vector<std::size_t>& labels() const noexcept { return labels_; }
  std::size_t num_classes() const noexcept { return num_classes_; }
  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t dim() const noexcept { return features_.cols(); }
  Split split() const noexcept { return split_; }

  std::span<const double> x(std::size_t i) const { return features_.row(i); }
  std::size_t label(std::size_t i) const { return labels_[i]; }

  std::vector<std::size_t> class_counts() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  Matrix features_;
  std::vector<std::size_t> labels_;
  std::size_t num_classes_;
  Split split_;
};

// File layout:
//   # classes=<C> split=<train|test>
//   label,f1,...,fd
//   <label>,<x1>,...,<xd>
Dataset parse_dataset(std::istream& in);
Dataset load_dataset(const std::filesystem::path& path);
void write_dataset(std::ostream& out, const Dataset& ds);
void save_dataset(const std::filesystem::path& path, const Dataset& ds);

/// Stratified subsample keeping ceil(dr * n_c) examples of every class,
/// chosen without replacement by `seed`. Survivors keep their original
/// relative order. dr == 1 returns the dataset unchanged.
Dataset subsample(const Dataset& ds, double dr, std::uint64_t seed);

struct SyntheticSpec {
  std::size_t num_superclusters = 4;
  std::size_t classes_per_supercluster = 5;
  std::size_t dim = 32;
  std::size_t train_per_class = 100;
  std::size_t test_per_class = 50;
  double intra_spread = 0.5;
  double inter_spread = 1.0;
  double noise_sigma = 1.0;
  std::uint64_t seed = 0;

  std::size_t num_classes() const noexcept { return num_superclusters * classes_per_supercluster; }
  void validate() const;
};

struct SyntheticData {
  Dataset train;
  Dataset test;
  /// One row per class: the class centre, so cosine similarity follows the
  /// supercluster structure.
  EmbeddingTable class_embeddings;
};

/// Supercluster centres ~ N(0, inter^2 I), class centres = supercluster
/// centre + N(0, intra^2 I), samples = class centre + N(0, noise^2 I).
/// Deterministic in spec.seed. Class k belongs to supercluster k / classes_per_supercluster.
SyntheticData generate_synthetic(const SyntheticSpec& spec);

}  // namespace lcl
