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
#include <random>
#include <sstream>

#include "lcl/error.hpp"
#include "lcl/similarity.hpp"
#include "test_support.hpp"

using namespace lcl;

namespace {

EmbeddingTable table_of(std::vector<std::vector<double>> rows) {
  Matrix m(rows.size(), rows.front().size());
  std::vector<std::string> names;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    names.push_back("c" + std::to_string(i));
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return EmbeddingTable(std::move(names), std::move(m));
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected lcl::Error");
  return ErrorKind::Io;
}

HierarchyGraph parse_graph(const std::string& text) {
  std::istringstream in(text);
  return parse_hierarchy(in);
}

}  // namespace

TEST_SUITE("similarity") {
  TEST_CASE("embedding file round trip") {
    std::istringstream in("# two classes\na 1 0\nb 0 1\n");
    const auto t = parse_embeddings(in);
    CHECK(t.size() == 2);
    CHECK(t.dim() == 2);
    CHECK(t.class_names() == std::vector<std::string>{"a", "b"});
    std::ostringstream out;
    write_embeddings(out, t);
    std::istringstream again(out.str());
    const auto t2 = parse_embeddings(again);
    CHECK(t2.vectors() == t.vectors());
  }

  TEST_CASE("embedding errors") {
    CHECK(kind_of([] {
            std::istringstream in("a 1 0\na 0 1\n");
            parse_embeddings(in);
          }) == ErrorKind::DuplicateClass);
    CHECK(kind_of([] {
            std::istringstream in("a 1 0 0\nb 0 1 0\n");
            parse_embeddings(in, 100);
          }) == ErrorKind::DimensionMismatch);
    CHECK(kind_of([] {
            std::istringstream in("a 1 0\nb 0 1 2\n");
            parse_embeddings(in);
          }) == ErrorKind::DimensionMismatch);
    CHECK(kind_of([] {
            std::istringstream in("a 0 0\nb 0 1\n");
            parse_embeddings(in);
          }) == ErrorKind::ZeroVector);
    CHECK(kind_of([] { load_embeddings("/nonexistent/emb.txt"); }) == ErrorKind::Io);
  }

  TEST_CASE("cosine hand values") {
    const std::vector<double> a{3, 4}, e0{1, 0}, e1{0, 1}, d{1, 1};
    CHECK(cosine(a, a) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(cosine(e0, e1) == 0.0);
    CHECK(cosine(d, e0) == doctest::Approx(0.7071067811865475).epsilon(1e-15));
    const std::vector<double> z{0, 0};
    CHECK(kind_of([&] { cosine(z, e0); }) == ErrorKind::ZeroNorm);
    const std::vector<double> three{1, 2, 3};
    CHECK(kind_of([&] { cosine(three, e0); }) == ErrorKind::DimensionMismatch);
  }

  TEST_CASE("cosine similarity matrix") {
    const auto ortho = build_cosine_similarity(table_of({{1, 0}, {0, 1}}));
    CHECK(ortho.matrix.entries() == Matrix::identity(2));

    const auto diag = build_cosine_similarity(table_of({{1, 0}, {1, 1}}));
    CHECK(diag.matrix(0, 1) == doctest::Approx(0.70710678).epsilon(1e-8));
    CHECK(diag.matrix(0, 1) == diag.matrix(1, 0));
    CHECK(diag.matrix(0, 0) == 1.0);

    CHECK(kind_of([] { build_cosine_similarity(table_of({{1, 0}, {2, 0}})); }) == ErrorKind::StrictDominance);
  }

  TEST_CASE("negative cosines are clamped or rejected") {
    const auto t = table_of({{1, 0}, {-1, 0.5}, {0, 1}});
    const auto built = build_cosine_similarity(t, true);
    CHECK(built.clamped_entries == 1);
    CHECK(built.matrix(0, 1) == 0.0);
    CHECK(kind_of([&] { build_cosine_similarity(t, false); }) == ErrorKind::NegativeEntry);
  }

  TEST_CASE("cosine matrix is bitwise symmetric and PSD without clamping") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<std::vector<double>> rows(8, std::vector<double>(5));
      for (auto& r : rows)
        for (auto& v : r) v = u(rng);
      const auto built = build_cosine_similarity(table_of(rows));
      REQUIRE(built.clamped_entries == 0);
      const auto& m = built.matrix.entries();
      for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j) CHECK(m(i, j) == m(j, i));
      const auto spec = eigenspectrum(built.matrix);
      CHECK(spec.back() >= -1e-9);
      double sum = 0.0;
      for (double v : spec) sum += v;
      CHECK(std::abs(sum - 8.0) <= 1e-8 * 8.0);
    }
  }

  TEST_CASE("similarity matrix invariants") {
    Matrix asym = Matrix::identity(2);
    asym(0, 1) = 0.5;
    CHECK(kind_of([&] { SimilarityMatrix(asym, {"a", "b"}, SimilaritySource::External); }) ==
          ErrorKind::InvalidMatrix);
    Matrix ones(2, 2, 1.0);
    CHECK(kind_of([&] { SimilarityMatrix(ones, {"a", "b"}, SimilaritySource::External); }) ==
          ErrorKind::StrictDominance);
    Matrix neg = Matrix::identity(2);
    neg(0, 1) = neg(1, 0) = -0.1;
    CHECK(find_similarity_violation(neg).has_value());
    Matrix diag = Matrix::identity(2);
    diag(1, 1) = 0.9;
    CHECK(find_similarity_violation(diag).has_value());
    CHECK_FALSE(find_similarity_violation(Matrix::identity(3)).has_value());
  }

  TEST_CASE("simrank hand cases") {
    const auto siblings = simrank(parse_graph("root a\nroot b\n@leaves a b\n"));
    CHECK(siblings(0, 1) == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(siblings(0, 0) == 1.0);
    CHECK(siblings.source() == SimilaritySource::Simrank);

    const auto disjoint = simrank(parse_graph("r1 a\nr2 b\n@leaves a b\n"));
    CHECK(disjoint(0, 1) == 0.0);

    const auto other_decay = simrank(parse_graph("root a\nroot b\n@leaves a b\n"), {0.6, 1e-9, 100});
    CHECK(other_decay(0, 1) == doctest::Approx(0.6).epsilon(1e-12));
  }

  TEST_CASE("simrank on a two-level tree") {
    // Cousins: s = C * s(p1, p2) = C * C * s(root, root) = C^2.
    const auto s = simrank(parse_graph("root p1\nroot p2\np1 a\np1 b\np2 c\n@leaves a b c\n"));
    CHECK(s(0, 1) == doctest::Approx(0.8).epsilon(1e-9));
    CHECK(s(0, 2) == doctest::Approx(0.64).epsilon(1e-6));
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) {
        CHECK(s(i, j) == s(j, i));
        CHECK(s(i, j) >= 0.0);
        CHECK(s(i, j) <= 1.0);
      }
  }

  TEST_CASE("simrank iteration limit") {
    const auto g = parse_graph("root p1\nroot p2\np1 a\np2 b\n@leaves a b\n");
    CHECK(kind_of([&] { simrank(g, {0.8, 1e-12, 1}); }) == ErrorKind::NonConvergence);
  }

  TEST_CASE("hierarchy validation") {
    CHECK(kind_of([] { parse_graph("a a\n@leaves a\n"); }) == ErrorKind::InvalidGraph);
    CHECK(kind_of([] { parse_graph("a b\nb a\n@leaves a\n"); }) == ErrorKind::InvalidGraph);
    CHECK(kind_of([] { parse_graph("r a\na b\n@leaves a b\n"); }) == ErrorKind::InvalidGraph);
    CHECK(kind_of([] { parse_graph("r a\nr b\n@leaves a\n"); }) == ErrorKind::InvalidGraph);
    const auto g = parse_graph("# comment\nr a\nr a\nr b\n@leaves b a\n");
    CHECK(g.edges.size() == 2);
    CHECK(g.nodes[g.leaves[0]] == "b");
  }

  TEST_CASE("eigenspectrum hand cases") {
    const auto id = eigenspectrum(SimilarityMatrix::identity(4));
    for (double v : id) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
    const auto ones = eigenspectrum(Matrix(3, 3, 1.0));
    CHECK(ones[0] == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(std::abs(ones[1]) < 1e-14);
    CHECK(std::abs(ones[2]) < 1e-14);
    Matrix half = Matrix::identity(2);
    half(0, 1) = half(1, 0) = 0.5;
    const auto two = eigenspectrum(SimilarityMatrix(half, {"a", "b"}, SimilaritySource::External));
    CHECK(two[0] == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(two[1] == doctest::Approx(0.5).epsilon(1e-14));
  }

  TEST_CASE("effective rank") {
    const std::vector<double> flat{1, 1, 1, 1};
    CHECK(effective_rank(flat) == doctest::Approx(4.0).epsilon(1e-14));
    const std::vector<double> spike{3, 0, 0};
    CHECK(effective_rank(spike) == doctest::Approx(1.0).epsilon(1e-14));
  }

  TEST_CASE("dissimilarity") {
    const auto d = dissimilarity(SimilarityMatrix::identity(3));
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) CHECK(d(i, j) == (i == j ? 0.0 : 1.0));
    Matrix m = Matrix::identity(2);
    m(0, 1) = m(1, 0) = 0.7;
    const SimilarityMatrix s(m, {"a", "b"}, SimilaritySource::External);
    const auto d2 = dissimilarity(s);
    CHECK(d2(0, 1) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(d2(0, 1) == d2(1, 0));
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) CHECK(d2(i, j) + s(i, j) == 1.0);
  }

  TEST_CASE("similarity CSV round trip keeps every bit") {
    const auto built = build_cosine_similarity(table_of({{1, 0.3, 0.2}, {0.1, 1, 0.4}, {0.5, 0.5, 1}}));
    std::ostringstream out;
    write_similarity_csv(out, built.matrix);
    std::istringstream in(out.str());
    const auto [m, names] = parse_similarity_csv(in);
    CHECK(m == built.matrix.entries());
    CHECK(names == built.matrix.class_names());
    std::istringstream bad("a,b\n1,0\n");
    CHECK(kind_of([&] { parse_similarity_csv(bad); }) == ErrorKind::Parse);
  }
}
