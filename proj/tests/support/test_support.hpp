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

// Reference computations written independently of the library code paths
// they check, plus small fixtures shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "lcl/data.hpp"
#include "lcl/matrix.hpp"
#include "lcl/model.hpp"

namespace lcl::testing {

/// Random row on the simplex with its strict argmax at `true_class`.
inline std::vector<double> random_dominant_row(std::mt19937_64& rng, std::size_t c, std::size_t true_class) {
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> row(c);
  for (auto& v : row) v = expo(rng);
  const auto top = std::max_element(row.begin(), row.end());
  std::iter_swap(top, row.begin() + static_cast<std::ptrdiff_t>(true_class));
  // Widen the margin so the argmax is strict.
  row[true_class] *= 1.5;
  if (c > 1) row[true_class] += 1e-3;
  double sum = 0.0;
  for (double v : row) sum += v;
  for (auto& v : row) v /= sum;
  return row;
}

/// One cooling update evaluated in extended precision from the textbook form.
inline std::vector<long double> cool_oracle(const std::vector<long double>& row, std::size_t true_class,
                                            long double eps) {
  long double off = 0.0L;
  for (std::size_t j = 0; j < row.size(); ++j)
    if (j != true_class) off += row[j];
  const long double denom = 1.0L + eps * off;
  std::vector<long double> out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) out[j] = (j == true_class ? 1.0L : eps * row[j]) / denom;
  return out;
}

/// Off-diagonal mass after t updates from s0: 1/S_t = e^-t/S_0 + (e^-t - 1)/(e^-1 - 1).
inline long double closed_form_mass(long double s0, long double eps, std::size_t t) {
  const long double inv = std::pow(1.0L / eps, static_cast<long double>(t));
  return 1.0L / (inv / s0 + (inv - 1.0L) / (1.0L / eps - 1.0L));
}

/// Per-row ranks (1 = highest score), ties sharing the mean rank, by counting.
inline Matrix rank_oracle(const Matrix& scores) {
  Matrix ranks(scores.rows(), scores.cols());
  for (std::size_t i = 0; i < scores.rows(); ++i)
    for (std::size_t j = 0; j < scores.cols(); ++j) {
      double greater = 0.0, ties = 0.0;
      for (std::size_t k = 0; k < scores.cols(); ++k) {
        if (k == j) continue;
        if (scores(i, k) > scores(i, j)) greater += 1.0;
        else if (scores(i, k) == scores(i, j)) ties += 1.0;
      }
      ranks(i, j) = 1.0 + greater + 0.5 * ties;
    }
  return ranks;
}

struct FriedmanOracle {
  std::vector<double> avg_ranks;
  double chi2 = 0.0;
  double ff = 0.0;
};

/// Rank-sum form: chi2 = 12 / (N k (k+1)) * sum_j T_j^2 - 3 N (k+1), T_j the rank sums.
inline FriedmanOracle friedman_oracle(const Matrix& scores) {
  const auto ranks = rank_oracle(scores);
  const double n = static_cast<double>(scores.rows());
  const double k = static_cast<double>(scores.cols());
  FriedmanOracle out;
  double sum_sq = 0.0;
  for (std::size_t j = 0; j < scores.cols(); ++j) {
    double t = 0.0;
    for (std::size_t i = 0; i < scores.rows(); ++i) t += ranks(i, j);
    out.avg_ranks.push_back(t / n);
    sum_sq += t * t;
  }
  out.chi2 = 12.0 / (n * k * (k + 1.0)) * sum_sq - 3.0 * n * (k + 1.0);
  out.ff = (n - 1.0) * out.chi2 / (n * (k - 1.0) - out.chi2);
  return out;
}

/// Flattened view over every parameter array, in a fixed order.
inline std::vector<double*> param_slots(ClassifierParams& p) {
  std::vector<double*> out;
  for (auto& v : p.w1.data()) out.push_back(&v);
  for (auto& v : p.b1) out.push_back(&v);
  for (auto& v : p.w_out.data()) out.push_back(&v);
  for (auto& v : p.b_out) out.push_back(&v);
  return out;
}

inline std::vector<double> flatten(const GradientBundle& g) {
  std::vector<double> out;
  out.insert(out.end(), g.w1.data().begin(), g.w1.data().end());
  out.insert(out.end(), g.b1.begin(), g.b1.end());
  out.insert(out.end(), g.w_out.data().begin(), g.w_out.data().end());
  out.insert(out.end(), g.b_out.begin(), g.b_out.end());
  return out;
}

/// Central differences of an arbitrary scalar function of the params.
template <class F>
std::vector<double> finite_difference(ClassifierParams params, F&& f, double h = 1e-5) {
  std::vector<double> out;
  for (double* slot : param_slots(params)) {
    const double saved = *slot;
    *slot = saved + h;
    const double up = f(params);
    *slot = saved - h;
    const double down = f(params);
    *slot = saved;
    out.push_back((up - down) / (2.0 * h));
  }
  return out;
}

/// Largest elementwise |a - b| relative to the larger magnitude (floored at 1e-6).
inline double max_relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double scale = std::max({std::abs(a[i]), std::abs(b[i]), 1e-6});
    worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
  }
  return worst;
}

/// A small random gradient-check instance: params, features and soft targets.
struct GradInstance {
  ClassifierParams params;
  Matrix x;
  Matrix targets;
  double lambda = 0.0;

  std::vector<Example> batch() const {
    std::vector<Example> b;
    for (std::size_t i = 0; i < x.rows(); ++i) b.push_back({x.row(i), targets.row(i)});
    return b;
  }
};

inline GradInstance random_grad_instance(Architecture arch, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> dim(2, 6), cls(2, 5), hid(2, 6), rows(1, 6);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> lam(0.0, 0.1);
  const std::size_t d = dim(rng), c = cls(rng), h = hid(rng), n = rows(rng);
  GradInstance inst;
  inst.params = init_params(arch, d, h, c, rng());
  for (auto& b : inst.params.b_out) b = 0.5 * normal(rng);
  for (auto& b : inst.params.b1) b = 0.5 * normal(rng);
  inst.x = Matrix(n, d);
  for (auto& v : inst.x.data()) v = normal(rng);
  inst.targets = Matrix(n, c);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = random_dominant_row(rng, c, i % c);
    std::copy(row.begin(), row.end(), inst.targets.row(i).begin());
  }
  inst.lambda = lam(rng);
  return inst;
}

/// The small hierarchical task used by the fast end-to-end tests.
inline SyntheticSpec small_synthetic_spec(std::uint64_t seed = 0) {
  SyntheticSpec s;
  s.num_superclusters = 2;
  s.classes_per_supercluster = 3;
  s.dim = 8;
  s.train_per_class = 12;
  s.test_per_class = 6;
  s.seed = seed;
  return s;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("lcl_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace lcl::testing
