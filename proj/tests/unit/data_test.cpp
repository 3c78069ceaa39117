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
#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "lcl/data.hpp"
#include "lcl/error.hpp"
#include "test_support.hpp"

using namespace lcl;

namespace {

Dataset balanced(std::size_t classes, std::size_t per_class) {
  Matrix x(classes * per_class, 2);
  std::vector<std::size_t> y;
  for (std::size_t i = 0; i < classes * per_class; ++i) {
    x(i, 0) = static_cast<double>(i);
    x(i, 1) = -static_cast<double>(i);
    y.push_back(i % classes);
  }
  return Dataset(std::move(x), std::move(y), classes, Split::Train);
}

double mean_cosine(const EmbeddingTable& t, std::size_t per_group, bool within) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < t.size(); ++i)
    for (std::size_t j = i + 1; j < t.size(); ++j) {
      if ((i / per_group == j / per_group) != within) continue;
      sum += cosine(t.vectors().row(i), t.vectors().row(j));
      ++n;
    }
  return sum / static_cast<double>(n);
}

}  // namespace

TEST_SUITE("data") {
  TEST_CASE("dataset file round trip") {
    std::istringstream in("# classes=2 split=train\nlabel,f1,f2\n0,1.5,2\n1,-1,0.25\n");
    const auto ds = parse_dataset(in);
    CHECK(ds.size() == 2);
    CHECK(ds.num_classes() == 2);
    CHECK(ds.dim() == 2);
    CHECK(ds.label(1) == 1);
    CHECK(ds.x(0)[0] == 1.5);
    std::ostringstream out;
    write_dataset(out, ds);
    std::istringstream again(out.str());
    CHECK(parse_dataset(again) == ds);
  }

  TEST_CASE("dataset errors") {
    std::istringstream bad_label("# classes=3 split=test\nlabel,f1\n5,1\n");
    CHECK_THROWS_AS(parse_dataset(bad_label), Error);
    std::istringstream empty("");
    CHECK_THROWS_AS(parse_dataset(empty), Error);
    std::istringstream missing("# classes=3 split=train\nlabel,f1\n0,1\n1,2\n");
    CHECK_THROWS_AS(parse_dataset(missing), Error);
    std::istringstream ragged("# classes=2 split=test\nlabel,f1,f2\n0,1\n");
    CHECK_THROWS_AS(parse_dataset(ragged), Error);
    CHECK_THROWS_AS(load_dataset("/nonexistent/train.csv"), Error);
  }

  TEST_CASE("subsample") {
    const auto ds = balanced(4, 10);
    CHECK(subsample(ds, 1.0, 3) == ds);
    const auto half = subsample(ds, 0.5, 3);
    for (auto c : half.class_counts()) CHECK(c == 5);
    CHECK(subsample(ds, 0.5, 3) == half);
    CHECK_FALSE(subsample(ds, 0.5, 4) == half);
    for (std::size_t i = 1; i < half.size(); ++i) CHECK(half.x(i - 1)[0] < half.x(i)[0]);
    CHECK_THROWS_AS(subsample(ds, 0.0, 1), Error);
    CHECK_THROWS_AS(subsample(ds, 1.5, 1), Error);
  }

  TEST_CASE("subsample keeps ceil(dr * n_c) per class") {
    Matrix x(3 + 7 + 20, 1);
    std::vector<std::size_t> y;
    for (std::size_t i = 0; i < 3; ++i) y.push_back(0);
    for (std::size_t i = 0; i < 7; ++i) y.push_back(1);
    for (std::size_t i = 0; i < 20; ++i) y.push_back(2);
    const Dataset ds(x, y, 3, Split::Train);
    // Expected per-class counts for class sizes (3, 7, 20), worked out by hand.
    const struct {
      double dr;
      std::size_t counts[3];
    } table[] = {{0.05, {1, 1, 1}}, {0.1, {1, 1, 2}}, {0.3, {1, 3, 6}},
                 {0.5, {2, 4, 10}}, {0.7, {3, 5, 14}}, {0.99, {3, 7, 20}}};
    for (const auto& row : table) {
      const auto counts = subsample(ds, row.dr, 11).class_counts();
      for (std::size_t c = 0; c < 3; ++c) CHECK(counts[c] == row.counts[c]);
    }
  }

  TEST_CASE("synthetic generation") {
    SyntheticSpec one;
    one.num_superclusters = 1;
    one.classes_per_supercluster = 1;
    const auto single = generate_synthetic(one);
    for (auto y : single.train.labels()) CHECK(y == 0);

    const auto spec = lcl::testing::small_synthetic_spec(4);
    const auto a = generate_synthetic(spec);
    const auto b = generate_synthetic(spec);
    CHECK(a.train == b.train);
    CHECK(a.test == b.test);
    CHECK(a.class_embeddings.vectors() == b.class_embeddings.vectors());
    CHECK(a.train.size() == spec.num_classes() * spec.train_per_class);
    CHECK(a.test.split() == Split::Test);

    SyntheticSpec bad;
    bad.dim = 0;
    CHECK_THROWS_AS(generate_synthetic(bad), Error);
  }

  TEST_CASE("synthetic class embeddings cluster by supercluster") {
    SyntheticSpec spec;
    spec.num_superclusters = 2;
    spec.classes_per_supercluster = 2;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      spec.seed = seed;
      const auto data = generate_synthetic(spec);
      CHECK(mean_cosine(data.class_embeddings, 2, true) > mean_cosine(data.class_embeddings, 2, false));
    }
  }

  TEST_CASE("synthetic class embeddings always give a valid similarity") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      SyntheticSpec spec;
      spec.seed = seed;
      CHECK_NOTHROW(build_cosine_similarity(generate_synthetic(spec).class_embeddings));
    }
  }

  TEST_CASE("noise-free data is separable by nearest class centre") {
    auto spec = lcl::testing::small_synthetic_spec(9);
    spec.noise_sigma = 0.0;
    const auto data = generate_synthetic(spec);
    const auto& centres = data.class_embeddings.vectors();
    for (std::size_t i = 0; i < data.train.size(); ++i) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < centres.rows(); ++c) {
        double d = 0.0;
        for (std::size_t k = 0; k < centres.cols(); ++k) d += std::pow(data.train.x(i)[k] - centres(c, k), 2);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      CHECK(best == data.train.label(i));
    }
  }
}
