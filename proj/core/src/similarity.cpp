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
#include "lcl/similarity.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "lcl/error.hpp"
#include "text_io.hpp"

namespace lcl {
namespace {

constexpr double kDuplicateDirectionTol = 1e-12;

std::string pair_name(const std::vector<std::string>& names, std::size_t i, std::size_t j) {
  return "(" + names[i] + ", " + names[j] + ")";
}

}  // namespace

std::string_view to_string(SimilaritySource source) noexcept {
  switch (source) {
    case SimilaritySource::EmbeddingCosine: return "embedding-cosine";
    case SimilaritySource::AttributeCosine: return "attribute-cosine";
    case SimilaritySource::Simrank: return "simrank";
    case SimilaritySource::External: return "external";
  }
  return "unknown";
}

EmbeddingTable::EmbeddingTable(std::vector<std::string> class_names, Matrix vectors)
    : class_names_(std::move(class_names)), vectors_(std::move(vectors)) {
  LCL_CHECK(!class_names_.empty(), ErrorKind::EmptyInput, "embedding table has no classes");
  LCL_CHECK(vectors_.rows() == class_names_.size(), ErrorKind::DimensionMismatch,
            "row count does not match class count");
  LCL_CHECK(vectors_.cols() >= 1, ErrorKind::DimensionMismatch, "embedding dimension must be >= 1");
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < class_names_.size(); ++i) {
    LCL_CHECK(seen.insert(class_names_[i]).second, ErrorKind::DuplicateClass,
              "class '" + class_names_[i] + "' appears more than once");
    const auto row = vectors_.row(i);
    LCL_CHECK(std::any_of(row.begin(), row.end(), [](double v) { return v != 0.0; }),
              ErrorKind::ZeroVector, "class '" + class_names_[i] + "' has an all-zero vector");
    LCL_CHECK(std::all_of(row.begin(), row.end(), [](double v) { return std::isfinite(v); }),
              ErrorKind::NonFinite, "class '" + class_names_[i] + "' has a non-finite component");
  }
}

std::optional<std::string> find_similarity_violation(const Matrix& s) {
  if (s.rows() != s.cols() || s.rows() == 0) return "matrix must be square and non-empty";
  const std::size_t n = s.rows();
  for (std::size_t i = 0; i < n; ++i) {
    if (s(i, i) != 1.0) return "diagonal entry " + std::to_string(i) + " is not 1";
    for (std::size_t j = 0; j < n; ++j) {
      const double v = s(i, j);
      const std::string at = "(" + std::to_string(i) + ", " + std::to_string(j) + ")";
      if (i != j && v >= s(i, i)) return "strict dominance violated at " + at;
      if (!(v >= 0.0 && v <= 1.0)) return "entry " + at + " outside [0, 1]";
      if (v != s(j, i)) return "entry " + at + " is not symmetric";
    }
  }
  return std::nullopt;
}

SimilarityMatrix::SimilarityMatrix(Matrix entries, std::vector<std::string> class_names,
                                   SimilaritySource source)
    : entries_(std::move(entries)), class_names_(std::move(class_names)), source_(source) {
  LCL_CHECK(class_names_.size() == entries_.rows(), ErrorKind::DimensionMismatch,
            "class name count does not match matrix size");
  if (auto violation = find_similarity_violation(entries_)) {
    const bool dominance = violation->rfind("strict dominance", 0) == 0;
    throw Error(dominance ? ErrorKind::StrictDominance : ErrorKind::InvalidMatrix, *violation);
  }
}

SimilarityMatrix SimilarityMatrix::identity(std::size_t num_classes) {
  std::vector<std::string> names;
  names.reserve(num_classes);
  for (std::size_t i = 0; i < num_classes; ++i) names.push_back("c" + std::to_string(i));
  return {Matrix::identity(num_classes), std::move(names), SimilaritySource::External};
}

EmbeddingTable parse_embeddings(std::istream& in, std::optional<std::size_t> expected_dim) {
  std::vector<std::string> names;
  std::vector<double> values;
  std::size_t dim = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = detail::trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto tokens = detail::split_ws(text);
    const std::string where = "line " + std::to_string(line_no);
    LCL_CHECK(tokens.size() >= 2, ErrorKind::Parse, where + ": expected a name and at least one value");
    const std::size_t row_dim = tokens.size() - 1;
    if (names.empty()) {
      dim = row_dim;
      if (expected_dim) {
        LCL_CHECK(dim == *expected_dim, ErrorKind::DimensionMismatch,
                  where + ": expected dimension " + std::to_string(*expected_dim) + ", found " +
                      std::to_string(dim));
      }
    }
    LCL_CHECK(row_dim == dim, ErrorKind::DimensionMismatch,
              where + ": expected " + std::to_string(dim) + " values, found " + std::to_string(row_dim));
    names.emplace_back(tokens[0]);
    for (std::size_t k = 1; k < tokens.size(); ++k) values.push_back(detail::parse_double(tokens[k], where));
  }
  LCL_CHECK(!names.empty(), ErrorKind::EmptyInput, "no embedding rows found");
  Matrix vectors(names.size(), dim);
  std::copy(values.begin(), values.end(), vectors.data().begin());
  return EmbeddingTable(std::move(names), std::move(vectors));
}

EmbeddingTable load_embeddings(const std::filesystem::path& path, std::optional<std::size_t> expected_dim) {
  auto in = detail::open_input(path);
  return parse_embeddings(in, expected_dim);
}

void write_embeddings(std::ostream& out, const EmbeddingTable& table) {
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << table.class_names()[i];
    for (const double v : table.vectors().row(i)) out << ' ' << detail::format_double(v);
    out << '\n';
  }
}

void save_embeddings(const std::filesystem::path& path, const EmbeddingTable& table) {
  auto out = detail::open_output(path);
  write_embeddings(out, table);
}

void HierarchyGraph::validate() const {
  const std::size_t n = nodes.size();
  std::vector<std::size_t> indegree(n, 0);
  std::vector<std::vector<std::size_t>> children(n);
  for (const auto& [parent, child] : edges) {
    LCL_CHECK(parent < n && child < n, ErrorKind::InvalidGraph, "edge references unknown node");
    LCL_CHECK(parent != child, ErrorKind::InvalidGraph, "self-loop at '" + nodes[parent] + "'");
    children[parent].push_back(child);
    ++indegree[child];
  }
  // Kahn's algorithm: every node must be popped, otherwise a cycle exists.
  std::queue<std::size_t> ready;
  for (std::size_t v = 0; v < n; ++v)
    if (indegree[v] == 0) ready.push(v);
  std::size_t visited = 0;
  while (!ready.empty()) {
    const auto v = ready.front();
    ready.pop();
    ++visited;
    for (const auto c : children[v])
      if (--indegree[c] == 0) ready.push(c);
  }
  LCL_CHECK(visited == n, ErrorKind::InvalidGraph, "hierarchy contains a cycle");

  LCL_CHECK(!leaves.empty(), ErrorKind::InvalidGraph, "hierarchy declares no leaves");
  std::vector<char> is_leaf(n, 0);
  for (const auto leaf : leaves) {
    LCL_CHECK(leaf < n, ErrorKind::InvalidGraph, "leaf references unknown node");
    LCL_CHECK(!is_leaf[leaf], ErrorKind::InvalidGraph, "leaf '" + nodes[leaf] + "' listed twice");
    is_leaf[leaf] = 1;
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (is_leaf[v]) {
      LCL_CHECK(children[v].empty(), ErrorKind::InvalidGraph,
                "leaf '" + nodes[v] + "' has children");
    } else {
      LCL_CHECK(!children[v].empty(), ErrorKind::InvalidGraph,
                "childless node '" + nodes[v] + "' is not listed in @leaves");
    }
  }
}

HierarchyGraph parse_hierarchy(std::istream& in) {
  HierarchyGraph graph;
  std::unordered_map<std::string, std::size_t> index;
  auto node_id = [&](std::string_view name) {
    auto [it, inserted] = index.emplace(std::string(name), graph.nodes.size());
    if (inserted) graph.nodes.emplace_back(name);
    return it->second;
  };
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  bool have_leaves = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = detail::trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto tokens = detail::split_ws(text);
    const std::string where = "line " + std::to_string(line_no);
    if (tokens[0] == "@leaves") {
      LCL_CHECK(!have_leaves, ErrorKind::Parse, where + ": duplicate @leaves directive");
      LCL_CHECK(tokens.size() >= 2, ErrorKind::Parse, where + ": @leaves lists no classes");
      have_leaves = true;
      for (std::size_t k = 1; k < tokens.size(); ++k) graph.leaves.push_back(node_id(tokens[k]));
      continue;
    }
    LCL_CHECK(tokens.size() == 2, ErrorKind::Parse, where + ": expected '<parent> <child>'");
    const auto parent = node_id(tokens[0]);
    const auto child = node_id(tokens[1]);
    if (std::find(edges.begin(), edges.end(), std::pair{parent, child}) == edges.end())
      edges.emplace_back(parent, child);
  }
  LCL_CHECK(have_leaves, ErrorKind::Parse, "missing @leaves directive");
  graph.edges = std::move(edges);
  graph.validate();
  return graph;
}

HierarchyGraph load_hierarchy(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return parse_hierarchy(in);
}

double cosine(std::span<const double> u, std::span<const double> v) {
  LCL_CHECK(u.size() == v.size(), ErrorKind::DimensionMismatch, "cosine of vectors with different lengths");
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    dot += u[k] * v[k];
    uu += u[k] * u[k];
    vv += v[k] * v[k];
  }
  LCL_CHECK(uu > 0.0 && vv > 0.0, ErrorKind::ZeroNorm, "cosine of a zero-norm vector");
  return std::clamp(dot / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

CosineBuild build_cosine_similarity(const EmbeddingTable& table, bool clamp_negative, SimilaritySource source) {
  const std::size_t n = table.size();
  const auto& names = table.class_names();
  Matrix s(n, n);
  std::size_t clamped = 0;
  for (std::size_t i = 0; i < n; ++i) {
    s(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      double c = cosine(table.vectors().row(i), table.vectors().row(j));
      LCL_CHECK(c < 1.0 - kDuplicateDirectionTol, ErrorKind::StrictDominance,
                "classes " + pair_name(names, i, j) + " have identical directions");
      if (c < 0.0) {
        LCL_CHECK(clamp_negative, ErrorKind::NegativeEntry,
                  "negative cosine " + detail::format_double(c) + " for " + pair_name(names, i, j));
        c = 0.0;
        ++clamped;
      }
      s(i, j) = c;
      s(j, i) = c;
    }
  }
  return {SimilarityMatrix(std::move(s), names, source), clamped};
}

SimilarityMatrix simrank(const HierarchyGraph& graph, const SimrankOptions& options) {
  LCL_CHECK(options.decay > 0.0 && options.decay < 1.0, ErrorKind::InvalidArgument, "decay must lie in (0, 1)");
  LCL_CHECK(options.tol > 0.0, ErrorKind::InvalidArgument, "tol must be positive");
  graph.validate();

  const std::size_t n = graph.nodes.size();
  std::vector<std::vector<std::size_t>> parents(n);
  for (const auto& [parent, child] : graph.edges) parents[child].push_back(parent);

  Matrix current = Matrix::identity(n);
  Matrix next(n, n);
  double residual = 0.0;
  bool converged = false;
  for (std::size_t iter = 0; iter < options.max_iter; ++iter) {
    residual = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      next(a, a) = 1.0;
      for (std::size_t b = a + 1; b < n; ++b) {
        double value = 0.0;
        if (!parents[a].empty() && !parents[b].empty()) {
          double sum = 0.0;
          for (const auto p : parents[a])
            for (const auto q : parents[b]) sum += current(p, q);
          value = options.decay * sum / static_cast<double>(parents[a].size() * parents[b].size());
        }
        next(a, b) = value;
        next(b, a) = value;
        residual = std::max(residual, std::abs(value - current(a, b)));
      }
    }
    std::swap(current, next);
    if (residual < options.tol) {
      converged = true;
      break;
    }
  }
  LCL_CHECK(converged, ErrorKind::NonConvergence,
            "simrank did not converge in " + std::to_string(options.max_iter) +
                " iterations; last residual " + detail::format_double(residual));

  const std::size_t c = graph.leaves.size();
  Matrix leaves(c, c);
  std::vector<std::string> names;
  names.reserve(c);
  for (std::size_t i = 0; i < c; ++i) {
    names.push_back(graph.nodes[graph.leaves[i]]);
    for (std::size_t j = 0; j < c; ++j) leaves(i, j) = current(graph.leaves[i], graph.leaves[j]);
  }
  return {std::move(leaves), std::move(names), SimilaritySource::Simrank};
}

std::vector<double> eigenspectrum(const Matrix& symmetric) {
  LCL_CHECK(symmetric.rows() == symmetric.cols(), ErrorKind::ShapeMismatch, "eigenspectrum needs a square matrix");
  const auto n = static_cast<Eigen::Index>(symmetric.rows());
  if (n == 0) return {};
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      m(i, j) = symmetric(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  LCL_CHECK(solver.info() == Eigen::Success, ErrorKind::NonConvergence, "symmetric eigensolver failed");
  std::vector<double> values(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
  std::sort(values.begin(), values.end(), std::greater<>());
  return values;
}

std::vector<double> eigenspectrum(const SimilarityMatrix& sim) { return eigenspectrum(sim.entries()); }

double effective_rank(std::span<const double> eigenvalues) {
  double total = 0.0;
  for (const double v : eigenvalues) total += std::max(v, 0.0);
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (const double v : eigenvalues) {
    const double p = std::max(v, 0.0) / total;
    if (p > 0.0) h -= p * std::log(p);
  }
  return std::exp(h);
}

Matrix dissimilarity(const SimilarityMatrix& sim) {
  const auto& s = sim.entries();
  Matrix d(s.rows(), s.cols());
  for (std::size_t i = 0; i < s.rows(); ++i)
    for (std::size_t j = 0; j < s.cols(); ++j) d(i, j) = 1.0 - s(i, j);
  return d;
}

void write_similarity_csv(std::ostream& out, const Matrix& entries, const std::vector<std::string>& class_names) {
  for (std::size_t j = 0; j < class_names.size(); ++j) {
    if (j) out << ',';
    out << detail::csv_field(class_names[j]);
  }
  out << '\n';
  for (std::size_t i = 0; i < entries.rows(); ++i) {
    for (std::size_t j = 0; j < entries.cols(); ++j) {
      if (j) out << ',';
      out << detail::format_double(entries(i, j));
    }
    out << '\n';
  }
}

void write_similarity_csv(std::ostream& out, const SimilarityMatrix& sim) {
  write_similarity_csv(out, sim.entries(), sim.class_names());
}

void save_similarity_csv(const std::filesystem::path& path, const SimilarityMatrix& sim) {
  auto out = detail::open_output(path);
  write_similarity_csv(out, sim);
  LCL_CHECK(out.good(), ErrorKind::Io, "failed writing '" + path.string() + "'");
}

std::pair<Matrix, std::vector<std::string>> parse_similarity_csv(std::istream& in) {
  std::string line;
  LCL_CHECK(static_cast<bool>(std::getline(in, line)), ErrorKind::EmptyInput, "similarity CSV is empty");
  auto names = detail::split_csv(line);
  const std::size_t n = names.size();
  Matrix m(n, n);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    const std::string where = "similarity row " + std::to_string(row + 1);
    LCL_CHECK(row < n, ErrorKind::Parse, "similarity CSV has more rows than classes");
    const auto fields = detail::split_csv(line);
    LCL_CHECK(fields.size() == n, ErrorKind::Parse, where + ": expected " + std::to_string(n) + " fields");
    for (std::size_t j = 0; j < n; ++j) m(row, j) = detail::parse_double(fields[j], where);
    ++row;
  }
  LCL_CHECK(row == n, ErrorKind::Parse,
            "similarity CSV has " + std::to_string(row) + " rows for " + std::to_string(n) + " classes");
  return {std::move(m), std::move(names)};
}

std::pair<Matrix, std::vector<std::string>> read_similarity_csv(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return parse_similarity_csv(in);
}

SimilarityMatrix load_similarity_csv(const std::filesystem::path& path) {
  auto [m, names] = read_similarity_csv(path);
  return {std::move(m), std::move(names), SimilaritySource::External};
}

}  // namespace lcl
