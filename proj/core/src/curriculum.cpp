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
#include "lcl/curriculum.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include "lcl/error.hpp"
#include "text_io.hpp"

namespace lcl {
namespace {

constexpr double kRowSumTol = 1e-12;

void check_epsilon(double epsilon) {
  LCL_CHECK(epsilon > 0.0 && epsilon < 1.0, ErrorKind::InvalidArgument,
            "epsilon must lie in (0, 1), got " + detail::format_double(epsilon));
}

bool strict_argmax_at(std::span<const double> row, std::size_t i) {
  for (std::size_t j = 0; j < row.size(); ++j)
    if (j != i && !(row[j] < row[i])) return false;
  return true;
}

std::size_t argmax(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < row.size(); ++j)
    if (row[j] > row[best]) best = j;
  return best;
}

double simplex_residual(std::span<const double> row) {
  double sum = 0.0;
  double most_negative = 0.0;
  for (const double v : row) {
    sum += v;
    most_negative = std::min(most_negative, v);
  }
  return std::max(std::abs(sum - 1.0), -most_negative);
}

}  // namespace

TargetSchedule::TargetSchedule(Unchecked, Matrix targets, double epsilon, std::size_t step)
    : targets_(std::move(targets)), epsilon_(epsilon), step_(step) {
  check_epsilon(epsilon_);
  LCL_CHECK(targets_.rows() == targets_.cols() && targets_.rows() > 0, ErrorKind::ShapeMismatch,
            "schedule must be a non-empty square matrix");
}

TargetSchedule::TargetSchedule(Matrix targets, double epsilon, std::size_t step)
    : TargetSchedule(Unchecked{}, std::move(targets), epsilon, step) {
  for (std::size_t i = 0; i < targets_.rows(); ++i) {
    const auto r = targets_.row(i);
    LCL_CHECK(simplex_residual(r) <= kRowSumTol, ErrorKind::InvalidMatrix,
              "schedule row " + std::to_string(i) + " is not on the simplex");
    LCL_CHECK(strict_argmax_at(r, i), ErrorKind::StrictDominance,
              "schedule row " + std::to_string(i) + " does not have its strict argmax on the diagonal");
  }
}

TargetSchedule TargetSchedule::unchecked(Matrix targets, double epsilon, std::size_t step) {
  return TargetSchedule(Unchecked{}, std::move(targets), epsilon, step);
}

TargetSchedule init_targets(const SimilarityMatrix& sim, double epsilon) {
  check_epsilon(epsilon);
  const std::size_t c = sim.size();
  Matrix v(c, c);
  for (std::size_t i = 0; i < c; ++i) {
    double total = 0.0;
    for (std::size_t k = 0; k < c; ++k) total += sim(i, k);
    for (std::size_t j = 0; j < c; ++j) v(i, j) = sim(i, j) / total;
    LCL_CHECK(strict_argmax_at(v.row(i), i), ErrorKind::StrictDominance,
              "normalized similarity row " + std::to_string(i) + " loses its diagonal argmax");
  }
  return {std::move(v), epsilon, 0};
}

double off_diagonal_mass(std::span<const double> row, std::size_t true_class) {
  double s = 0.0;
  for (std::size_t k = 0; k < row.size(); ++k)
    if (k != true_class) s += row[k];
  return s;
}

void cool_row(std::span<double> row, std::size_t true_class, double epsilon) {
  const double denom = 1.0 + epsilon * off_diagonal_mass(row, true_class);
  for (std::size_t j = 0; j < row.size(); ++j)
    row[j] = (j == true_class) ? 1.0 / denom : epsilon * row[j] / denom;
}

TargetSchedule step(const TargetSchedule& schedule) {
  Matrix next = schedule.targets();
  for (std::size_t i = 0; i < next.rows(); ++i) cool_row(next.row(i), i, schedule.epsilon());
  return TargetSchedule::unchecked(std::move(next), schedule.epsilon(), schedule.step() + 1);
}

TargetSchedule advance_to(const TargetSchedule& schedule, std::size_t t) {
  LCL_CHECK(t >= schedule.step(), ErrorKind::OutOfRange,
            "cannot rewind schedule from step " + std::to_string(schedule.step()) + " to " + std::to_string(t));
  Matrix v = schedule.targets();
  for (std::size_t k = schedule.step(); k < t; ++k)
    for (std::size_t i = 0; i < v.rows(); ++i) cool_row(v.row(i), i, schedule.epsilon());
  return TargetSchedule::unchecked(std::move(v), schedule.epsilon(), t);
}

TargetVector target_for(const TargetSchedule& schedule, std::size_t class_index) {
  LCL_CHECK(class_index < schedule.num_classes(), ErrorKind::OutOfRange,
            "class index " + std::to_string(class_index) + " out of range");
  const auto r = schedule.row(class_index);
  return {std::vector<double>(r.begin(), r.end()), class_index};
}

TargetVector one_hot(std::size_t class_index, std::size_t num_classes) {
  LCL_CHECK(class_index < num_classes, ErrorKind::OutOfRange,
            "class index " + std::to_string(class_index) + " out of range for " + std::to_string(num_classes) +
                " classes");
  TargetVector v{std::vector<double>(num_classes, 0.0), class_index};
  v.probs[class_index] = 1.0;
  return v;
}

TargetVector label_smoothing(std::size_t class_index, std::size_t num_classes, double alpha) {
  LCL_CHECK(class_index < num_classes, ErrorKind::OutOfRange,
            "class index " + std::to_string(class_index) + " out of range");
  LCL_CHECK(alpha >= 0.0 && alpha <= 1.0, ErrorKind::InvalidArgument, "alpha must lie in [0, 1]");
  const double off = alpha / static_cast<double>(num_classes);
  TargetVector v{std::vector<double>(num_classes, off), class_index};
  v.probs[class_index] = (1.0 - alpha) + off;
  return v;
}

double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (const double p : probs)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

std::string_view to_string(Axiom axiom) noexcept {
  switch (axiom) {
    case Axiom::EntropyDecrease: return "entropy-decrease";
    case Axiom::Simplex: return "simplex";
    case Axiom::ArgmaxFixed: return "argmax-fixed";
    case Axiom::GeometricDecay: return "geometric-decay";
  }
  return "unknown";
}

CurriculumReport verify_curriculum(const TargetSchedule& schedule, std::size_t horizon,
                                   const VerifyTolerances& tol, bool keep_trace) {
  LCL_CHECK(horizon >= 1, ErrorKind::InvalidArgument, "horizon must be >= 1");
  const std::size_t c = schedule.num_classes();
  const double eps = schedule.epsilon();

  CurriculumReport report;
  report.num_classes = c;
  report.horizon = horizon;
  report.epsilon = eps;
  if (keep_trace) report.trace.assign(c, std::vector<RowStepRecord>(horizon + 1));

  std::vector<double> row(c);
  for (std::size_t i = 0; i < c; ++i) {
    const auto initial = schedule.row(i);
    std::copy(initial.begin(), initial.end(), row.begin());
    double prev_entropy = 0.0;
    double prev_mass = 0.0;
    auto flag = [&](std::size_t k, Axiom axiom, std::string detail) {
      report.violations.push_back({i, k, axiom, std::move(detail)});
    };

    for (std::size_t k = 0; k <= horizon; ++k) {
      const double residual = simplex_residual(row);
      const double h = entropy(row);
      const double mass = off_diagonal_mass(row, i);
      if (keep_trace) report.trace[i][k] = {residual, argmax(row), h};

      if (!(residual < tol.simplex))
        flag(k, Axiom::Simplex, "residual " + detail::format_double(residual));
      if (!strict_argmax_at(row, i))
        flag(k, Axiom::ArgmaxFixed, "argmax at column " + std::to_string(argmax(row)));
      if (k > 0) {
        const bool one_hot_row = prev_mass <= tol.one_hot;
        const bool ok = one_hot_row ? h <= prev_entropy + tol.entropy : h < prev_entropy;
        if (!ok)
          flag(k, Axiom::EntropyDecrease,
               "entropy " + detail::format_double(h) + " after " + detail::format_double(prev_entropy));
        const double bound = std::pow(eps, static_cast<double>(k));
        for (std::size_t j = 0; j < c; ++j) {
          if (j != i && row[j] > bound * initial[j] + tol.decay) {
            flag(k, Axiom::GeometricDecay, "column " + std::to_string(j) + " exceeds eps^t bound");
            break;
          }
        }
      }
      prev_entropy = h;
      prev_mass = mass;
      if (k < horizon) cool_row(row, i, eps);
    }
  }
  return report;
}

void write_report(std::ostream& out, const CurriculumReport& report, std::size_t max_violations) {
  out << "classes: " << report.num_classes << "\n"
      << "epsilon: " << detail::format_double(report.epsilon) << "\n"
      << "horizon: " << report.horizon << "\n";
  if (!report.trace.empty()) {
    double worst_residual = 0.0;
    double max_initial_entropy = 0.0;
    double max_final_entropy = 0.0;
    for (const auto& row : report.trace) {
      for (const auto& rec : row) worst_residual = std::max(worst_residual, rec.simplex_residual);
      max_initial_entropy = std::max(max_initial_entropy, row.front().entropy);
      max_final_entropy = std::max(max_final_entropy, row.back().entropy);
    }
    out << "max simplex residual: " << detail::format_double(worst_residual) << "\n"
        << "max entropy at start: " << detail::format_double(max_initial_entropy) << "\n"
        << "max entropy at horizon: " << detail::format_double(max_final_entropy) << "\n";
  }
  out << "violations: " << report.violations.size() << "\n";
  for (std::size_t k = 0; k < report.violations.size() && k < max_violations; ++k) {
    const auto& v = report.violations[k];
    out << "  row " << v.row << " step " << v.step << " [" << to_string(v.axiom) << "] " << v.detail << "\n";
  }
  out << (report.passed() ? "PASS" : "FAIL") << "\n";
}

void write_schedule_csv(std::ostream& out, const TargetSchedule& schedule) {
  out << "# epsilon=" << detail::format_double(schedule.epsilon()) << " step=" << schedule.step() << "\n";
  const auto& v = schedule.targets();
  for (std::size_t i = 0; i < v.rows(); ++i) {
    for (std::size_t j = 0; j < v.cols(); ++j) {
      if (j) out << ',';
      out << detail::format_double(v(i, j));
    }
    out << '\n';
  }
}

void save_schedule_csv(const std::filesystem::path& path, const TargetSchedule& schedule) {
  auto out = detail::open_output(path);
  write_schedule_csv(out, schedule);
}

TargetSchedule parse_schedule_csv(std::istream& in) {
  std::string line;
  LCL_CHECK(static_cast<bool>(std::getline(in, line)), ErrorKind::EmptyInput, "schedule CSV is empty");
  const auto header = detail::split_ws(detail::trim(line));
  LCL_CHECK(header.size() == 3 && header[0] == "#" && header[1].rfind("epsilon=", 0) == 0 &&
                header[2].rfind("step=", 0) == 0,
            ErrorKind::Parse, "schedule CSV must start with '# epsilon=<e> step=<t>'");
  const double eps = detail::parse_double(header[1].substr(8), "schedule header");
  const long long t = detail::parse_int(header[2].substr(5), "schedule header");
  LCL_CHECK(t >= 0, ErrorKind::Parse, "negative schedule step");

  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t cols = 0;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split(detail::trim(line), ',');
    if (rows == 0) cols = fields.size();
    LCL_CHECK(fields.size() == cols, ErrorKind::Parse, "ragged schedule CSV at row " + std::to_string(rows + 1));
    for (const auto f : fields) values.push_back(detail::parse_double(f, "schedule row " + std::to_string(rows + 1)));
    ++rows;
  }
  LCL_CHECK(rows > 0 && rows == cols, ErrorKind::Parse, "schedule CSV must hold a square matrix");
  Matrix m(rows, cols);
  std::copy(values.begin(), values.end(), m.data().begin());
  return TargetSchedule::unchecked(std::move(m), eps, static_cast<std::size_t>(t));
}

TargetSchedule load_schedule_csv(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return parse_schedule_csv(in);
}

}  // namespace lcl
