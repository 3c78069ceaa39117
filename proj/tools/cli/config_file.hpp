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

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "lcl/data.hpp"
#include "lcl/experiments.hpp"
#include "lcl/similarity.hpp"

namespace lcl::cli {

/// Where one similarity matrix comes from.
struct SimilaritySpec {
  SimilarityKind kind = SimilarityKind::Embedding;
  std::optional<std::filesystem::path> path;  // unset: use the synthetic class embeddings
  bool clamp_negative = true;
  SimrankOptions simrank;
};

/// A parsed run configuration. INI-style text:
///
///   [data]            train = <csv>, test = <csv>
///   [synthetic]       superclusters, classes_per_supercluster, dim,
///                     train_per_class, test_per_class, intra_spread,
///                     inter_spread, noise_sigma, seed
///   [similarity.<embedding|attribute|hierarchy|file>]
///                     path, clamp_negative, decay, tol, max_iter
///   [suite]           seeds = 0,1,2,3   out_dir   jobs
///   [train]           epochs, batch_size, lr, lr_decay, lr_decay_every,
///                     lambda, arch, hidden  (defaults for every config)
///   [grid]            encodings, epsilons, alphas, kd_temperatures, drs,
///                     similarity
///   [config.<name>]   one explicit config: encoding, epsilon, alpha,
///                     kd_temperature, dr, similarity, plus any [train] key
///
/// Exactly one of [data] and [synthetic] is required. Relative paths are
/// resolved against the config file's directory.
struct RunConfig {
  std::vector<ExperimentConfig> grid;
  std::optional<std::filesystem::path> train_path;
  std::optional<std::filesystem::path> test_path;
  std::optional<SyntheticSpec> synthetic;
  std::vector<SimilaritySpec> similarities;
  std::filesystem::path out_dir = "results";
  std::size_t jobs = 1;
};

/// Throws lcl::Error(Parse / InvalidArgument) on any malformed input.
RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

std::vector<std::uint64_t> parse_seed_list(std::string_view text);

}  // namespace lcl::cli
