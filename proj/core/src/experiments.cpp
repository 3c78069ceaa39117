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
#include "lcl/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/distributions/fisher_f.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <istream>
#include <mutex>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <thread>

#include "lcl/curriculum.hpp"
#include "lcl/error.hpp"
#include "text_io.hpp"

namespace lcl {
namespace {

// Independent random streams derived from one trial seed. Every encoding
// draws the subsample, initial weights and batch order from the same
// streams, so comparisons across encodings are paired.
enum Stream : std::uint64_t { kSubsample = 1, kInit = 2, kShuffle = 3, kTeacherInit = 4, kTeacherShuffle = 5, kPeerInit = 6 };

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string opt_field(const std::optional<double>& v) { return v ? detail::format_double(*v) : std::string(); }

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

/// Per-example target lookup: rows indexed by class label or by example.
struct TargetTable {
  const Matrix* rows = nullptr;
  bool by_class = true;

  std::span<const double> operator()(const Dataset& data, std::size_t i) const {
    return rows->row(by_class ? data.label(i) : i);
  }
};

std::vector<double> train_single(ClassifierParams& params, const ExperimentConfig& cfg, const Dataset& data,
                                 std::uint64_t shuffle_seed,
                                 const std::function<TargetTable(std::size_t)>& targets_at) {
  std::mt19937_64 rng(shuffle_seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> history;
  history.reserve(cfg.epochs);
  std::vector<Example> batch;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const TargetTable targets = targets_at(epoch);
    std::shuffle(order.begin(), order.end(), rng);
    const double lr = cfg.learning_rate(epoch);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      for (std::size_t k = start; k < stop; ++k) batch.push_back({data.x(order[k]), targets(data, order[k])});
      auto lg = loss_and_gradient(params, batch, cfg.lambda);
      params = sgd_step(params, lg.grad, lr);
      loss_sum += lg.loss;
      ++batches;
    }
    history.push_back(loss_sum / static_cast<double>(batches));
  }
  return history;
}

struct PairHistory {
  std::vector<double> first;
  std::vector<double> second;
};

PairHistory train_mutual(ClassifierParams& m1, ClassifierParams& m2, const ExperimentConfig& cfg, const Dataset& data,
                         const Matrix& one_hot_rows, std::uint64_t shuffle_seed) {
  std::mt19937_64 rng(shuffle_seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  PairHistory history;
  std::vector<Example> batch;
  std::vector<std::vector<double>> p1, p2;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const double lr = cfg.learning_rate(epoch);
    double sum1 = 0.0, sum2 = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      p1.clear();
      p2.clear();
      for (std::size_t k = start; k < stop; ++k) {
        const auto i = order[k];
        batch.push_back({data.x(i), one_hot_rows.row(data.label(i))});
        p1.push_back(forward(m1, data.x(i)));
        p2.push_back(forward(m2, data.x(i)));
      }
      auto g1 = mutual_loss_and_gradient(m1, batch, p2, cfg.lambda);
      auto g2 = mutual_loss_and_gradient(m2, batch, p1, cfg.lambda);
      m1 = sgd_step(m1, g1.grad, lr);
      m2 = sgd_step(m2, g2.grad, lr);
      sum1 += g1.loss;
      sum2 += g2.loss;
      ++batches;
    }
    history.first.push_back(sum1 / static_cast<double>(batches));
    history.second.push_back(sum2 / static_cast<double>(batches));
  }
  return history;
}

std::vector<std::vector<double>> predict_all(const ClassifierParams& params, const Dataset& data,
                                             double temperature = 1.0) {
  std::vector<std::vector<double>> out;
  out.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) out.push_back(forward(params, data.x(i), temperature));
  return out;
}

void evaluate(const ClassifierParams& params, const Dataset& test, TrialResult& r) {
  const auto preds = predict_all(params, test);
  r.top1 = topk_accuracy(preds, test.labels(), 1);
  r.top5 = topk_accuracy(preds, test.labels(), std::min<std::size_t>(5, test.num_classes()));
}

}  // namespace

std::string_view to_string(Encoding encoding) noexcept {
  switch (encoding) {
    case Encoding::SL: return "SL";
    case Encoding::LS: return "LS";
    case Encoding::LCL: return "LCL";
    case Encoding::KD: return "KD";
    case Encoding::DML: return "DML";
  }
  return "?";
}

Encoding parse_encoding(std::string_view text) {
  for (const auto e : {Encoding::SL, Encoding::LS, Encoding::LCL, Encoding::KD, Encoding::DML})
    if (text == to_string(e)) return e;
  throw Error(ErrorKind::InvalidArgument, "unknown encoding '" + std::string(text) + "'");
}

std::string_view to_string(SimilarityKind kind) noexcept {
  switch (kind) {
    case SimilarityKind::Embedding: return "embedding";
    case SimilarityKind::Attribute: return "attribute";
    case SimilarityKind::Hierarchy: return "hierarchy";
    case SimilarityKind::File: return "file";
  }
  return "?";
}

SimilarityKind parse_similarity_kind(std::string_view text) {
  for (const auto k : {SimilarityKind::Embedding, SimilarityKind::Attribute, SimilarityKind::Hierarchy,
                       SimilarityKind::File})
    if (text == to_string(k)) return k;
  throw Error(ErrorKind::InvalidArgument, "unknown similarity source '" + std::string(text) + "'");
}

ExperimentConfig ExperimentConfig::make(Encoding encoding) {
  ExperimentConfig c;
  c.encoding = encoding;
  if (encoding == Encoding::LS) c.alpha = 0.1;
  if (encoding == Encoding::KD) c.kd_temperature = 1.0;
  if (encoding == Encoding::LCL) c.epsilon = 0.999;
  return c;
}

void ExperimentConfig::validate() const {
  const auto name = std::string(to_string(encoding));
  LCL_CHECK(epsilon.has_value() == (encoding == Encoding::LCL), ErrorKind::InvalidArgument,
            name + ": epsilon must be set exactly for LCL");
  LCL_CHECK(alpha.has_value() == (encoding == Encoding::LS), ErrorKind::InvalidArgument,
            name + ": alpha must be set exactly for LS");
  LCL_CHECK(kd_temperature.has_value() == (encoding == Encoding::KD), ErrorKind::InvalidArgument,
            name + ": kd_temperature must be set exactly for KD");
  if (epsilon) LCL_CHECK(*epsilon > 0.0 && *epsilon < 1.0, ErrorKind::InvalidArgument, "epsilon must lie in (0, 1)");
  if (alpha) LCL_CHECK(*alpha >= 0.0 && *alpha <= 1.0, ErrorKind::InvalidArgument, "alpha must lie in [0, 1]");
  if (kd_temperature) LCL_CHECK(*kd_temperature > 0.0, ErrorKind::InvalidArgument, "kd_temperature must be positive");
  LCL_CHECK(dr > 0.0 && dr <= 1.0, ErrorKind::InvalidArgument, "dr must lie in (0, 1]");
  LCL_CHECK(!seeds.empty(), ErrorKind::InvalidArgument, "at least one seed is required");
  LCL_CHECK(epochs >= 1, ErrorKind::InvalidArgument, "epochs must be >= 1");
  LCL_CHECK(batch_size >= 1, ErrorKind::InvalidArgument, "batch_size must be >= 1");
  LCL_CHECK(lr > 0.0, ErrorKind::InvalidArgument, "lr must be positive");
  LCL_CHECK(lr_decay > 0.0, ErrorKind::InvalidArgument, "lr_decay must be positive");
  LCL_CHECK(lambda >= 0.0, ErrorKind::InvalidArgument, "lambda must be >= 0");
  LCL_CHECK(arch == Architecture::Linear || hidden >= 1, ErrorKind::InvalidArgument, "hidden width must be >= 1");
}

std::string ExperimentConfig::fingerprint() const {
  std::string f = "enc=" + std::string(to_string(encoding));
  f += ";eps=" + opt_field(epsilon);
  f += ";alpha=" + opt_field(alpha);
  f += ";T=" + opt_field(kd_temperature);
  f += ";dr=" + detail::format_double(dr);
  f += ";arch=" + std::string(to_string(arch));
  f += ";hidden=" + std::to_string(arch == Architecture::Linear ? 0 : hidden);
  f += ";epochs=" + std::to_string(epochs);
  f += ";batch=" + std::to_string(batch_size);
  f += ";lr=" + detail::format_double(lr);
  f += ";decay=" + detail::format_double(lr_decay) + "/" + std::to_string(lr_decay_every);
  f += ";lambda=" + detail::format_double(lambda);
  if (encoding == Encoding::LCL) f += ";sim=" + std::string(to_string(similarity_source));
  return f;
}

std::string ExperimentConfig::config_id() const {
  std::string id(to_string(encoding));
  if (epsilon) id += "-e" + short_num(*epsilon);
  if (alpha) id += "-a" + short_num(*alpha);
  if (kd_temperature) id += "-T" + short_num(*kd_temperature);
  id += "-dr" + short_num(dr);
  char hash[16];
  std::snprintf(hash, sizeof hash, "-%08llx",
                static_cast<unsigned long long>(fnv1a(fingerprint()) & 0xffffffffull));
  return id + hash;
}

double ExperimentConfig::learning_rate(std::size_t epoch) const {
  if (lr_decay_every == 0 || lr_decay == 1.0) return lr;
  return lr * std::pow(lr_decay, static_cast<double>(epoch / lr_decay_every));
}

TrialOutcome run_trial(const ExperimentConfig& config, std::uint64_t seed, const Dataset& train, const Dataset& test,
                       const SimilarityMatrix* sim, const TrialOptions& options) {
  config.validate();
  LCL_CHECK(train.split() == Split::Train, ErrorKind::InvalidArgument, "run_trial needs a training split");
  LCL_CHECK(train.dim() == test.dim() && train.num_classes() == test.num_classes(), ErrorKind::ShapeMismatch,
            "train and test disagree on feature dimension or class count");
  const std::size_t c = train.num_classes();
  if (config.encoding == Encoding::LCL) {
    LCL_CHECK(sim != nullptr, ErrorKind::InvalidArgument, "LCL requires a similarity matrix");
    LCL_CHECK(sim->size() == c, ErrorKind::ShapeMismatch, "similarity matrix size does not match class count");
  }
  const auto t0 = std::chrono::steady_clock::now();

  const Dataset data = subsample(train, config.dr, derive_seed(seed, kSubsample));
  ClassifierParams params = init_params(config.arch, data.dim(), config.hidden, c, derive_seed(seed, kInit));
  const Matrix one_hot_rows = Matrix::identity(c);

  TrialOutcome outcome;
  TrialResult& r = outcome.result;
  r.config_id = config.config_id();
  r.encoding = std::string(to_string(config.encoding));
  r.epsilon = config.epsilon;
  r.alpha = config.alpha;
  r.dr = config.dr;
  r.seed = seed;
  r.epochs = config.epochs;

  switch (config.encoding) {
    case Encoding::SL: {
      r.loss_history = train_single(params, config, data, derive_seed(seed, kShuffle),
                                    [&](std::size_t) { return TargetTable{&one_hot_rows, true}; });
      break;
    }
    case Encoding::LS: {
      Matrix rows(c, c);
      for (std::size_t i = 0; i < c; ++i) {
        const auto v = label_smoothing(i, c, *config.alpha);
        std::copy(v.probs.begin(), v.probs.end(), rows.row(i).begin());
      }
      r.loss_history = train_single(params, config, data, derive_seed(seed, kShuffle),
                                    [&](std::size_t) { return TargetTable{&rows, true}; });
      break;
    }
    case Encoding::LCL: {
      TargetSchedule schedule = init_targets(*sim, *config.epsilon);
      if (options.debug_verify_curriculum) {
        const auto report = verify_curriculum(schedule, std::max<std::size_t>(1, config.epochs - 1), {}, false);
        LCL_CHECK(report.passed(), ErrorKind::InvalidMatrix,
                  "curriculum axioms violated: " + std::to_string(report.violations.size()) + " violations");
      }
      // Advanced at the start of each epoch, so epoch t trains against V(t).
      r.loss_history = train_single(params, config, data, derive_seed(seed, kShuffle), [&](std::size_t epoch) {
        schedule = advance_to(schedule, epoch);
        return TargetTable{&schedule.targets(), true};
      });
      break;
    }
    case Encoding::KD: {
      ClassifierParams teacher =
          init_params(config.arch, data.dim(), config.hidden, c, derive_seed(seed, kTeacherInit));
      train_single(teacher, config, data, derive_seed(seed, kTeacherShuffle),
                   [&](std::size_t) { return TargetTable{&one_hot_rows, true}; });
      Matrix soft(data.size(), c);
      for (std::size_t i = 0; i < data.size(); ++i) {
        const auto p = forward(teacher, data.x(i), *config.kd_temperature);
        std::copy(p.begin(), p.end(), soft.row(i).begin());
      }
      r.loss_history = train_single(params, config, data, derive_seed(seed, kShuffle),
                                    [&](std::size_t) { return TargetTable{&soft, false}; });
      break;
    }
    case Encoding::DML: {
      ClassifierParams peer = init_params(config.arch, data.dim(), config.hidden, c, derive_seed(seed, kPeerInit));
      auto history = train_mutual(params, peer, config, data, one_hot_rows, derive_seed(seed, kShuffle));
      r.loss_history = std::move(history.first);
      TrialResult second = r;
      second.config_id = r.config_id + "-m2";
      second.encoding = "DML2";
      second.loss_history = std::move(history.second);
      second.final_loss = second.loss_history.back();
      evaluate(peer, test, second);
      outcome.companion = std::move(second);
      outcome.companion_params = std::move(peer);
      break;
    }
  }

  r.final_loss = r.loss_history.back();
  evaluate(params, test, r);
  outcome.params = std::move(params);
  r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  if (outcome.companion) outcome.companion->wall_ms = r.wall_ms;
  return outcome;
}

double topk_accuracy(std::span<const std::vector<double>> pred_probs, std::span<const std::size_t> labels,
                     std::size_t k) {
  LCL_CHECK(!pred_probs.empty(), ErrorKind::EmptyInput, "no predictions");
  LCL_CHECK(pred_probs.size() == labels.size(), ErrorKind::ShapeMismatch, "predictions and labels differ in length");
  LCL_CHECK(k >= 1, ErrorKind::InvalidArgument, "k must be >= 1");
  std::size_t hits = 0;
  for (std::size_t n = 0; n < pred_probs.size(); ++n) {
    const auto& p = pred_probs[n];
    const std::size_t label = labels[n];
    LCL_CHECK(k <= p.size(), ErrorKind::InvalidArgument, "k exceeds the number of classes");
    LCL_CHECK(label < p.size(), ErrorKind::OutOfRange, "label out of range");
    std::size_t ahead = 0;
    for (std::size_t j = 0; j < p.size(); ++j)
      if (p[j] > p[label] || (p[j] == p[label] && j < label)) ++ahead;
    if (ahead < k) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(pred_probs.size());
}

std::vector<AggregateRow> aggregate(std::span<const TrialResult> results) {
  std::map<std::string, std::vector<const TrialResult*>> groups;
  for (const auto& r : results) groups[r.config_id].push_back(&r);

  // Values are sorted before summing so the output does not depend on the
  // order trials arrive in.
  auto moments = [](std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double sum = 0.0;
    for (const double x : xs) sum += x;
    const double mean = sum / n;
    std::vector<double> sq;
    sq.reserve(xs.size());
    for (const double x : xs) sq.push_back((x - mean) * (x - mean));
    std::sort(sq.begin(), sq.end());
    double ss = 0.0;
    for (const double v : sq) ss += v;
    return std::pair{mean, std::sqrt(ss / n)};
  };

  std::vector<AggregateRow> rows;
  for (const auto& [id, members] : groups) {
    LCL_CHECK(!members.empty(), ErrorKind::EmptyInput, "empty result group");
    AggregateRow row;
    row.config_id = id;
    row.encoding = members.front()->encoding;
    row.epsilon = members.front()->epsilon;
    row.alpha = members.front()->alpha;
    row.dr = members.front()->dr;
    row.n_trials = members.size();
    std::vector<double> top1, top5;
    for (const auto* m : members) {
      top1.push_back(m->top1);
      top5.push_back(m->top5);
    }
    std::tie(row.top1_mean, row.top1_std) = moments(top1);
    std::tie(row.top5_mean, row.top5_std) = moments(top5);
    rows.push_back(std::move(row));
  }
  return rows;
}

FriedmanResult friedman_iman_davenport(const Matrix& scores) {
  const std::size_t n = scores.rows();
  const std::size_t k = scores.cols();
  LCL_CHECK(n >= 2 && k >= 2, ErrorKind::InvalidArgument, "rank test needs at least 2 rows and 2 methods");
  for (const double v : scores.data()) LCL_CHECK(std::isfinite(v), ErrorKind::NonFinite, "score table has a missing entry");

  FriedmanResult out;
  out.num_rows = n;
  out.num_methods = k;
  out.avg_ranks.assign(k, 0.0);
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = scores.row(i);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return row[a] > row[b]; });
    // Tied scores share the mean of the ranks they span.
    for (std::size_t start = 0; start < k;) {
      std::size_t stop = start + 1;
      while (stop < k && row[idx[stop]] == row[idx[start]]) ++stop;
      const double rank = 0.5 * static_cast<double>(start + 1 + stop);
      for (std::size_t m = start; m < stop; ++m) out.avg_ranks[idx[m]] += rank;
      start = stop;
    }
  }
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  double sum_sq = 0.0;
  for (auto& r : out.avg_ranks) {
    r /= nd;
    sum_sq += r * r;
  }
  out.chi2_f = 12.0 * nd / (kd * (kd + 1.0)) * (sum_sq - kd * (kd + 1.0) * (kd + 1.0) / 4.0);
  const double denom = nd * (kd - 1.0) - out.chi2_f;
  if (std::abs(denom) > 1e-12 * nd * (kd - 1.0)) {
    out.f_f = (nd - 1.0) * out.chi2_f / denom;
    if (*out.f_f >= 0.0) {
      const boost::math::fisher_f dist(kd - 1.0, (kd - 1.0) * (nd - 1.0));
      out.p_value = boost::math::cdf(boost::math::complement(dist, *out.f_f));
    }
  }
  out.order.resize(k);
  std::iota(out.order.begin(), out.order.end(), std::size_t{0});
  std::stable_sort(out.order.begin(), out.order.end(),
                   [&](std::size_t a, std::size_t b) { return out.avg_ranks[a] < out.avg_ranks[b]; });
  return out;
}

RankReport rank_methods(std::span<const AggregateRow> rows, std::span<const std::string> setting_tags) {
  LCL_CHECK(setting_tags.empty() || setting_tags.size() == rows.size(), ErrorKind::ShapeMismatch,
            "one setting tag per aggregate row required");
  RankReport report;
  auto method_key = [](const AggregateRow& r) {
    std::string m = r.encoding;
    if (r.epsilon) m += " eps=" + short_num(*r.epsilon);
    if (r.alpha) m += " alpha=" + short_num(*r.alpha);
    return m;
  };
  std::map<std::pair<std::string, std::string>, double> cell;
  std::set<std::string> methods;
  std::set<std::string> settings;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto m = method_key(rows[i]);
    const auto s = (setting_tags.empty() || setting_tags[i].empty() ? std::string() : setting_tags[i] + " ") +
                   "dr=" + short_num(rows[i].dr);
    if (!cell.emplace(std::pair{s, m}, rows[i].top1_mean).second) {
      report.notices.push_back("rank test skipped: several configs map to method '" + m + "' in setting '" + s + "'");
      return report;
    }
    methods.insert(m);
    settings.insert(s);
  }
  report.methods.assign(methods.begin(), methods.end());
  for (const auto& s : settings) {
    const bool complete = std::all_of(report.methods.begin(), report.methods.end(),
                                      [&](const std::string& m) { return cell.count({s, m}) > 0; });
    if (complete)
      report.settings.push_back(s);
    else
      report.notices.push_back("setting '" + s + "' dropped: not every method has results");
  }
  report.scores = Matrix(report.settings.size(), report.methods.size());
  for (std::size_t i = 0; i < report.settings.size(); ++i)
    for (std::size_t j = 0; j < report.methods.size(); ++j)
      report.scores(i, j) = cell.at({report.settings[i], report.methods[j]});
  if (report.settings.size() < 2 || report.methods.size() < 2) {
    report.notices.push_back("rank test skipped: needs at least 2 settings and 2 methods (have " +
                             std::to_string(report.settings.size()) + " settings, " +
                             std::to_string(report.methods.size()) + " methods)");
    return report;
  }
  report.test = friedman_iman_davenport(report.scores);
  return report;
}

namespace {

const std::vector<std::string> kRawColumns = {"config_id", "encoding", "epsilon", "alpha",      "dr",     "seed",
                                              "top1",      "top5",     "final_loss", "epochs", "wall_ms"};

}  // namespace

void write_raw_csv(std::ostream& out, std::span<const TrialResult> results) {
  for (std::size_t j = 0; j < kRawColumns.size(); ++j) out << (j ? "," : "") << kRawColumns[j];
  out << "\n";
  for (const auto& r : results) {
    char wall[32];
    std::snprintf(wall, sizeof wall, "%.3f", r.wall_ms);
    out << detail::csv_field(r.config_id) << ',' << r.encoding << ',' << opt_field(r.epsilon) << ','
        << opt_field(r.alpha) << ',' << detail::format_double(r.dr) << ',' << r.seed << ','
        << detail::format_double(r.top1) << ',' << detail::format_double(r.top5) << ','
        << detail::format_double(r.final_loss) << ',' << r.epochs << ',' << wall << "\n";
  }
}

void write_aggregate_csv(std::ostream& out, std::span<const AggregateRow> rows) {
  out << "config_id,encoding,epsilon,alpha,dr,n_trials,top1_mean,top1_std,top5_mean,top5_std\n";
  for (const auto& r : rows) {
    out << detail::csv_field(r.config_id) << ',' << r.encoding << ',' << opt_field(r.epsilon) << ','
        << opt_field(r.alpha) << ',' << detail::format_double(r.dr) << ',' << r.n_trials << ','
        << detail::format_double(r.top1_mean) << ',' << detail::format_double(r.top1_std) << ','
        << detail::format_double(r.top5_mean) << ',' << detail::format_double(r.top5_std) << "\n";
  }
}

void write_curves_csv(std::ostream& out, std::span<const TrialResult> results) {
  out << "config_id,seed,epoch,loss\n";
  for (const auto& r : results)
    for (std::size_t e = 0; e < r.loss_history.size(); ++e)
      out << detail::csv_field(r.config_id) << ',' << r.seed << ',' << e << ','
          << detail::format_double(r.loss_history[e]) << "\n";
}

void print_aggregate_table(std::ostream& out, std::span<const AggregateRow> rows) {
  out << "# std uses the population convention (divisor n)\n";
  char line[256];
  std::snprintf(line, sizeof line, "%-36s %-5s %8s %6s %5s %9s %9s %9s %9s\n", "config_id", "enc", "epsilon", "alpha",
                "n", "top1", "top1_sd", "top5", "top5_sd");
  out << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-36s %-5s %8s %6s %5zu %9.4f %9.4f %9.4f %9.4f\n", r.config_id.c_str(),
                  r.encoding.c_str(), r.epsilon ? short_num(*r.epsilon).c_str() : "-",
                  r.alpha ? short_num(*r.alpha).c_str() : "-", r.n_trials, r.top1_mean, r.top1_std, r.top5_mean,
                  r.top5_std);
    out << line;
  }
}

void write_rank_report(std::ostream& out, const RankReport& report) {
  out << "Friedman / Iman-Davenport rank comparison (score: mean top-1, rank 1 = best)\n";
  for (const auto& n : report.notices) out << "notice: " << n << "\n";
  if (!report.test) {
    out << "rank test: skipped\n";
    return;
  }
  const auto& t = *report.test;
  out << "settings (N): " << t.num_rows << "\n"
      << "methods (k): " << t.num_methods << "\n\n";
  char line[256];
  std::snprintf(line, sizeof line, "%-4s %-28s %10s\n", "pos", "method", "avg_rank");
  out << line;
  for (std::size_t p = 0; p < t.order.size(); ++p) {
    const auto m = t.order[p];
    std::snprintf(line, sizeof line, "%-4zu %-28s %10.4f\n", p + 1, report.methods[m].c_str(), t.avg_ranks[m]);
    out << line;
  }
  out << "\nchi2_F: " << detail::format_double(t.chi2_f) << "\n";
  if (t.f_f) {
    out << "F_F: " << detail::format_double(*t.f_f) << "  (df " << (t.num_methods - 1) << ", "
        << (t.num_methods - 1) * (t.num_rows - 1) << ")\n";
    if (t.p_value) out << "p-value: " << detail::format_double(*t.p_value) << "\n";
  } else {
    out << "F_F: undefined (N(k-1) equals chi2_F: every setting ranks the methods identically)\n";
  }
}

std::vector<TrialResult> parse_raw_csv(std::istream& in) {
  std::string line;
  LCL_CHECK(static_cast<bool>(std::getline(in, line)), ErrorKind::EmptyInput, "raw results CSV is empty");
  const auto header = detail::split_csv(detail::trim(line));
  std::map<std::string, std::size_t> col;
  for (std::size_t j = 0; j < header.size(); ++j) col[std::string(detail::trim(header[j]))] = j;
  for (const auto& name : kRawColumns)
    LCL_CHECK(col.count(name) > 0, ErrorKind::Parse, "raw results CSV is missing column '" + name + "'");

  std::vector<TrialResult> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split_csv(detail::trim(line));
    const std::string where = "raw results row " + std::to_string(row);
    LCL_CHECK(f.size() == header.size(), ErrorKind::Parse, where + ": wrong field count");
    auto get = [&](const std::string& name) -> const std::string& { return f[col.at(name)]; };
    auto opt = [&](const std::string& name) -> std::optional<double> {
      if (detail::trim(get(name)).empty()) return std::nullopt;
      return detail::parse_double(get(name), where);
    };
    TrialResult r;
    r.config_id = get("config_id");
    r.encoding = get("encoding");
    r.epsilon = opt("epsilon");
    r.alpha = opt("alpha");
    r.dr = detail::parse_double(get("dr"), where);
    const auto seed = detail::parse_int(get("seed"), where);
    LCL_CHECK(seed >= 0, ErrorKind::Parse, where + ": negative seed");
    r.seed = static_cast<std::uint64_t>(seed);
    r.top1 = detail::parse_double(get("top1"), where);
    r.top5 = detail::parse_double(get("top5"), where);
    r.final_loss = detail::parse_double(get("final_loss"), where);
    r.epochs = static_cast<std::size_t>(detail::parse_int(get("epochs"), where));
    r.wall_ms = detail::parse_double(get("wall_ms"), where);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<TrialResult> load_raw_csv(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return parse_raw_csv(in);
}

SuiteResult run_suite(std::span<const ExperimentConfig> grid, const SuiteInputs& inputs, const SuiteOptions& options) {
  for (const auto& cfg : grid) cfg.validate();
  SuiteResult suite;
  if (!grid.empty()) {
    LCL_CHECK(inputs.train != nullptr && inputs.test != nullptr, ErrorKind::InvalidArgument,
              "suite needs train and test datasets");
  }

  struct Task {
    const ExperimentConfig* config;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (const auto& cfg : grid)
    for (const auto seed : cfg.seeds) tasks.push_back({&cfg, seed});

  std::vector<std::optional<TrialOutcome>> outcomes(tasks.size());
  std::vector<std::string> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < tasks.size(); t = next++) {
      const auto& task = tasks[t];
      try {
        const SimilarityMatrix* sim = nullptr;
        if (task.config->encoding == Encoding::LCL) {
          const auto it = inputs.similarities.find(task.config->similarity_source);
          LCL_CHECK(it != inputs.similarities.end(), ErrorKind::InvalidArgument,
                    "no '" + std::string(to_string(task.config->similarity_source)) + "' similarity provided");
          sim = &it->second;
        }
        outcomes[t] = run_trial(*task.config, task.seed, *inputs.train, *inputs.test, sim, options.trial);
      } catch (const std::exception& e) {
        errors[t] = e.what();
      }
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(options.jobs, 1, std::max<std::size_t>(1, tasks.size()));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (std::size_t t = 0; t < tasks.size(); ++t) {
    if (outcomes[t]) {
      suite.trials.push_back(std::move(outcomes[t]->result));
      if (outcomes[t]->companion) suite.trials.push_back(std::move(*outcomes[t]->companion));
    } else {
      suite.failures.push_back({tasks[t].config->config_id(), tasks[t].seed, errors[t]});
    }
  }
  std::sort(suite.trials.begin(), suite.trials.end(), [](const TrialResult& a, const TrialResult& b) {
    return std::tie(a.config_id, a.seed) < std::tie(b.config_id, b.seed);
  });
  std::sort(suite.failures.begin(), suite.failures.end(), [](const TrialFailure& a, const TrialFailure& b) {
    return std::tie(a.config_id, a.seed) < std::tie(b.config_id, b.seed);
  });
  suite.aggregates = aggregate(suite.trials);
  suite.ranks = rank_methods(suite.aggregates);

  if (options.out_dir) {
    const auto& dir = *options.out_dir;
    {
      auto out = detail::open_output(dir / "raw.csv");
      write_raw_csv(out, suite.trials);
    }
    {
      auto out = detail::open_output(dir / "aggregate.csv");
      write_aggregate_csv(out, suite.aggregates);
    }
    {
      auto out = detail::open_output(dir / "curves.csv");
      write_curves_csv(out, suite.trials);
    }
    {
      auto out = detail::open_output(dir / "ranks.txt");
      write_rank_report(out, suite.ranks);
    }
    if (!suite.failures.empty()) {
      auto out = detail::open_output(dir / "failures.txt");
      for (const auto& f : suite.failures) out << f.config_id << " seed=" << f.seed << ": " << f.message << "\n";
    }
  }
  return suite;
}

}  // namespace lcl
