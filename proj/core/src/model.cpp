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
#include "lcl/model.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <string>

#include "lcl/error.hpp"
#include "text_io.hpp"

namespace lcl {
namespace {

struct Activations {
  std::vector<double> pre;     // W1^T x + b1 (mlp1 only)
  std::vector<double> hidden;  // relu(pre), or a copy of x for linear
  std::vector<double> logits;
  std::vector<double> probs;
};

Activations run_forward(const ClassifierParams& p, std::span<const double> x, double temperature) {
  LCL_CHECK(x.size() == p.input_dim(), ErrorKind::ShapeMismatch,
            "input has " + std::to_string(x.size()) + " features, model expects " + std::to_string(p.input_dim()));
  Activations act;
  if (p.arch == Architecture::Mlp1) {
    const std::size_t h = p.hidden();
    act.pre = p.b1;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double xk = x[k];
      if (xk == 0.0) continue;
      const auto w = p.w1.row(k);
      for (std::size_t u = 0; u < h; ++u) act.pre[u] += xk * w[u];
    }
    act.hidden.resize(h);
    for (std::size_t u = 0; u < h; ++u) act.hidden[u] = act.pre[u] > 0.0 ? act.pre[u] : 0.0;
  } else {
    act.hidden.assign(x.begin(), x.end());
  }
  act.logits = p.b_out;
  auto& z = act.logits;
  for (std::size_t k = 0; k < act.hidden.size(); ++k) {
    const double a = act.hidden[k];
    if (a == 0.0) continue;
    const auto w = p.w_out.row(k);
    for (std::size_t c = 0; c < z.size(); ++c) z[c] += a * w[c];
  }
  for (const double v : z) LCL_CHECK(std::isfinite(v), ErrorKind::NonFinite, "non-finite logit");
  act.probs = softmax(z, temperature);
  return act;
}

GradientBundle zero_like(const ClassifierParams& p) {
  return {Matrix(p.w1.rows(), p.w1.cols()), std::vector<double>(p.b1.size(), 0.0),
          Matrix(p.w_out.rows(), p.w_out.cols()), std::vector<double>(p.b_out.size(), 0.0)};
}

double squared_weights(const ClassifierParams& p) {
  double s = 0.0;
  for (const double w : p.w1.data()) s += w * w;
  for (const double w : p.w_out.data()) s += w * w;
  return s;
}

// Backpropagates one output error signal into `g` (unnormalized sum).
void accumulate(const ClassifierParams& p, std::span<const double> x, const Activations& act,
                std::span<const double> delta, GradientBundle& g) {
  const std::size_t classes = delta.size();
  for (std::size_t k = 0; k < act.hidden.size(); ++k) {
    const double a = act.hidden[k];
    if (a == 0.0) continue;
    auto gw = g.w_out.row(k);
    for (std::size_t c = 0; c < classes; ++c) gw[c] += a * delta[c];
  }
  for (std::size_t c = 0; c < classes; ++c) g.b_out[c] += delta[c];
  if (p.arch != Architecture::Mlp1) return;

  const std::size_t h = p.hidden();
  std::vector<double> dh(h, 0.0);
  for (std::size_t u = 0; u < h; ++u) {
    if (!(act.pre[u] > 0.0)) continue;
    const auto w = p.w_out.row(u);
    double s = 0.0;
    for (std::size_t c = 0; c < classes; ++c) s += w[c] * delta[c];
    dh[u] = s;
  }
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double xk = x[k];
    if (xk == 0.0) continue;
    auto gw = g.w1.row(k);
    for (std::size_t u = 0; u < h; ++u) gw[u] += xk * dh[u];
  }
  for (std::size_t u = 0; u < h; ++u) g.b1[u] += dh[u];
}

void finish(const ClassifierParams& p, std::size_t n, double lambda, GradientBundle& g) {
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < g.w1.data().size(); ++i) g.w1.data()[i] = g.w1.data()[i] * inv + lambda * p.w1.data()[i];
  for (auto& v : g.b1) v *= inv;
  for (std::size_t i = 0; i < g.w_out.data().size(); ++i)
    g.w_out.data()[i] = g.w_out.data()[i] * inv + lambda * p.w_out.data()[i];
  for (auto& v : g.b_out) v *= inv;
}

void check_batch(const ClassifierParams& p, std::span<const Example> batch, double lambda) {
  LCL_CHECK(!batch.empty(), ErrorKind::EmptyInput, "empty batch");
  LCL_CHECK(lambda >= 0.0, ErrorKind::InvalidArgument, "lambda must be >= 0");
  for (const auto& ex : batch)
    LCL_CHECK(ex.target.size() == p.num_classes(), ErrorKind::ShapeMismatch, "target length does not match classes");
}

}  // namespace

std::string_view to_string(Architecture arch) noexcept {
  return arch == Architecture::Linear ? "linear" : "mlp1";
}

Architecture parse_architecture(std::string_view text) {
  if (text == "linear") return Architecture::Linear;
  if (text == "mlp1") return Architecture::Mlp1;
  throw Error(ErrorKind::InvalidArgument, "unknown architecture '" + std::string(text) + "'");
}

ClassifierParams zero_params(Architecture arch, std::size_t input_dim, std::size_t hidden, std::size_t num_classes) {
  LCL_CHECK(input_dim >= 1 && num_classes >= 1, ErrorKind::InvalidArgument, "dimensions must be positive");
  ClassifierParams p;
  p.arch = arch;
  std::size_t out_rows = input_dim;
  if (arch == Architecture::Mlp1) {
    LCL_CHECK(hidden >= 1, ErrorKind::InvalidArgument, "mlp1 needs a positive hidden width");
    p.w1 = Matrix(input_dim, hidden);
    p.b1.assign(hidden, 0.0);
    out_rows = hidden;
  }
  p.w_out = Matrix(out_rows, num_classes);
  p.b_out.assign(num_classes, 0.0);
  return p;
}

ClassifierParams init_params(Architecture arch, std::size_t input_dim, std::size_t hidden, std::size_t num_classes,
                             std::uint64_t seed) {
  ClassifierParams p = zero_params(arch, input_dim, hidden, num_classes);
  std::mt19937_64 rng(seed);
  auto glorot = [&rng](Matrix& w) {
    const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (auto& v : w.data()) v = dist(rng);
  };
  if (arch == Architecture::Mlp1) glorot(p.w1);
  glorot(p.w_out);
  return p;
}

void validate(const ClassifierParams& p) {
  if (p.arch == Architecture::Mlp1) {
    LCL_CHECK(p.w1.rows() >= 1 && p.w1.cols() >= 1 && p.b1.size() == p.w1.cols() && p.w_out.rows() == p.w1.cols(),
              ErrorKind::ShapeMismatch, "inconsistent mlp1 shapes");
  } else {
    LCL_CHECK(p.w1.empty() && p.b1.empty(), ErrorKind::ShapeMismatch, "linear model carries hidden-layer arrays");
  }
  LCL_CHECK(p.w_out.rows() >= 1 && p.w_out.cols() >= 1 && p.b_out.size() == p.w_out.cols(), ErrorKind::ShapeMismatch,
            "inconsistent output-layer shapes");
  auto finite = [](std::span<const double> v) { return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); }); };
  LCL_CHECK(finite(p.w1.data()) && finite(p.b1) && finite(p.w_out.data()) && finite(p.b_out), ErrorKind::NonFinite,
            "non-finite parameter");
}

std::vector<double> softmax(std::span<const double> z, double temperature) {
  LCL_CHECK(temperature > 0.0, ErrorKind::InvalidArgument, "temperature must be positive");
  LCL_CHECK(!z.empty(), ErrorKind::EmptyInput, "softmax of an empty vector");
  const double top = *std::max_element(z.begin(), z.end());
  std::vector<double> out(z.size());
  double total = 0.0;
  for (std::size_t c = 0; c < z.size(); ++c) {
    out[c] = std::exp((z[c] - top) / temperature);
    total += out[c];
  }
  for (auto& v : out) v /= total;
  return out;
}

std::vector<double> logits(const ClassifierParams& params, std::span<const double> x) {
  for (const double v : x) LCL_CHECK(std::isfinite(v), ErrorKind::NonFinite, "non-finite input feature");
  return run_forward(params, x, 1.0).logits;
}

std::vector<double> forward(const ClassifierParams& params, std::span<const double> x, double temperature) {
  for (const double v : x) LCL_CHECK(std::isfinite(v), ErrorKind::NonFinite, "non-finite input feature");
  return run_forward(params, x, temperature).probs;
}

double cross_entropy(std::span<const double> pred, std::span<const double> target) {
  LCL_CHECK(pred.size() == target.size(), ErrorKind::ShapeMismatch, "cross_entropy length mismatch");
  double loss = 0.0;
  for (std::size_t c = 0; c < pred.size(); ++c)
    if (target[c] != 0.0) loss -= target[c] * std::log(std::max(pred[c], kProbFloor));
  return loss;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  LCL_CHECK(p.size() == q.size(), ErrorKind::ShapeMismatch, "kl_divergence length mismatch");
  double d = 0.0;
  for (std::size_t c = 0; c < p.size(); ++c)
    if (p[c] > 0.0) d += p[c] * std::log(p[c] / std::max(q[c], kProbFloor));
  return d;
}

double objective(const ClassifierParams& params, std::span<const Example> batch, double lambda) {
  check_batch(params, batch, lambda);
  double total = 0.0;
  for (const auto& ex : batch) total += cross_entropy(forward(params, ex.x), ex.target);
  return total / static_cast<double>(batch.size()) + lambda * 0.5 * squared_weights(params);
}

LossAndGradient loss_and_gradient(const ClassifierParams& params, std::span<const Example> batch, double lambda) {
  check_batch(params, batch, lambda);
  LossAndGradient out{0.0, zero_like(params)};
  std::vector<double> delta(params.num_classes());
  for (const auto& ex : batch) {
    const auto act = run_forward(params, ex.x, 1.0);
    out.loss += cross_entropy(act.probs, ex.target);
    for (std::size_t c = 0; c < delta.size(); ++c) delta[c] = act.probs[c] - ex.target[c];
    accumulate(params, ex.x, act, delta, out.grad);
  }
  out.loss = out.loss / static_cast<double>(batch.size()) + lambda * 0.5 * squared_weights(params);
  finish(params, batch.size(), lambda, out.grad);
  return out;
}

LossAndGradient mutual_loss_and_gradient(const ClassifierParams& params, std::span<const Example> batch,
                                         std::span<const std::vector<double>> peer_preds, double lambda) {
  check_batch(params, batch, lambda);
  LCL_CHECK(peer_preds.size() == batch.size(), ErrorKind::ShapeMismatch, "one peer prediction per example required");
  LossAndGradient out{0.0, zero_like(params)};
  std::vector<double> delta(params.num_classes());
  for (std::size_t n = 0; n < batch.size(); ++n) {
    const auto& ex = batch[n];
    const auto& peer = peer_preds[n];
    LCL_CHECK(peer.size() == params.num_classes(), ErrorKind::ShapeMismatch, "peer prediction length mismatch");
    const auto act = run_forward(params, ex.x, 1.0);
    out.loss += cross_entropy(act.probs, ex.target) + kl_divergence(peer, act.probs);
    for (std::size_t c = 0; c < delta.size(); ++c)
      delta[c] = (act.probs[c] - ex.target[c]) + (act.probs[c] - peer[c]);
    accumulate(params, ex.x, act, delta, out.grad);
  }
  out.loss = out.loss / static_cast<double>(batch.size()) + lambda * 0.5 * squared_weights(params);
  finish(params, batch.size(), lambda, out.grad);
  return out;
}

GradientBundle gradient(const ClassifierParams& params, std::span<const Example> batch, double lambda) {
  return loss_and_gradient(params, batch, lambda).grad;
}

GradientBundle mutual_gradient(const ClassifierParams& params, std::span<const Example> batch,
                               std::span<const std::vector<double>> peer_preds, double lambda) {
  return mutual_loss_and_gradient(params, batch, peer_preds, lambda).grad;
}

double mutual_objective(const ClassifierParams& params, std::span<const Example> batch,
                        std::span<const std::vector<double>> peer_preds, double lambda) {
  return mutual_loss_and_gradient(params, batch, peer_preds, lambda).loss;
}

ClassifierParams sgd_step(const ClassifierParams& params, const GradientBundle& grads, double lr) {
  LCL_CHECK(params.w1.same_shape(grads.w1) && params.b1.size() == grads.b1.size() &&
                params.w_out.same_shape(grads.w_out) && params.b_out.size() == grads.b_out.size(),
            ErrorKind::ShapeMismatch, "gradient shapes do not match parameters");
  ClassifierParams next = params;
  auto update = [lr](std::span<double> theta, std::span<const double> g) {
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= lr * g[i];
  };
  update(next.w1.data(), grads.w1.data());
  update(next.b1, grads.b1);
  update(next.w_out.data(), grads.w_out.data());
  update(next.b_out, grads.b_out);
  return next;
}

std::pair<double, double> dml_pair_losses(std::span<const double> pred1, std::span<const double> pred2,
                                          std::span<const double> target1, std::span<const double> target2) {
  return {cross_entropy(pred1, target1) + kl_divergence(pred2, pred1),
          cross_entropy(pred2, target2) + kl_divergence(pred1, pred2)};
}

double param_distance(const ClassifierParams& a, const ClassifierParams& b) {
  LCL_CHECK(a.arch == b.arch && a.w1.same_shape(b.w1) && a.w_out.same_shape(b.w_out), ErrorKind::ShapeMismatch,
            "parameter shapes differ");
  double s = 0.0;
  auto add = [&s](std::span<const double> x, std::span<const double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
  };
  add(a.w1.data(), b.w1.data());
  add(a.b1, b.b1);
  add(a.w_out.data(), b.w_out.data());
  add(a.b_out, b.b_out);
  return std::sqrt(s);
}

namespace {

void write_array(std::ostream& out, std::span<const double> values, std::size_t per_line) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    out << detail::format_double(values[i]);
    out << ((i + 1) % per_line == 0 || i + 1 == values.size() ? '\n' : ' ');
  }
}

void expect_word(std::istream& in, std::string_view word) {
  std::string token;
  in >> token;
  LCL_CHECK(in && token == word, ErrorKind::Parse, "checkpoint: expected '" + std::string(word) + "', found '" + token + "'");
}

std::size_t read_count(std::istream& in) {
  std::string token;
  in >> token;
  LCL_CHECK(static_cast<bool>(in), ErrorKind::Parse, "checkpoint: truncated header");
  const auto v = detail::parse_int(token, "checkpoint header");
  LCL_CHECK(v >= 0, ErrorKind::Parse, "checkpoint: negative size");
  return static_cast<std::size_t>(v);
}

void read_values(std::istream& in, std::span<double> out) {
  std::string token;
  for (auto& v : out) {
    in >> token;
    LCL_CHECK(static_cast<bool>(in), ErrorKind::Parse, "checkpoint: truncated values");
    v = detail::parse_double(token, "checkpoint");
  }
}

}  // namespace

void write_checkpoint(std::ostream& out, const ClassifierParams& params) {
  validate(params);
  out << "LCLM1\n"
      << "arch " << to_string(params.arch) << "\n"
      << "dims " << params.input_dim() << ' ' << params.hidden() << ' ' << params.num_classes() << "\n";
  out << "w1 " << params.w1.rows() << ' ' << params.w1.cols() << "\n";
  write_array(out, params.w1.data(), std::max<std::size_t>(params.w1.cols(), 1));
  out << "b1 " << params.b1.size() << "\n";
  write_array(out, params.b1, std::max<std::size_t>(params.b1.size(), 1));
  out << "w_out " << params.w_out.rows() << ' ' << params.w_out.cols() << "\n";
  write_array(out, params.w_out.data(), params.w_out.cols());
  out << "b_out " << params.b_out.size() << "\n";
  write_array(out, params.b_out, params.b_out.size());
}

ClassifierParams read_checkpoint(std::istream& in) {
  expect_word(in, "LCLM1");
  expect_word(in, "arch");
  std::string arch;
  in >> arch;
  expect_word(in, "dims");
  const auto d = read_count(in);
  const auto h = read_count(in);
  const auto c = read_count(in);
  ClassifierParams p = zero_params(parse_architecture(arch), d, h, c);

  expect_word(in, "w1");
  const auto w1r = read_count(in);
  const auto w1c = read_count(in);
  LCL_CHECK(w1r == p.w1.rows() && w1c == p.w1.cols(), ErrorKind::Parse, "checkpoint: w1 shape disagrees with dims");
  read_values(in, p.w1.data());
  expect_word(in, "b1");
  LCL_CHECK(read_count(in) == p.b1.size(), ErrorKind::Parse, "checkpoint: b1 size disagrees with dims");
  read_values(in, p.b1);
  expect_word(in, "w_out");
  const auto wor = read_count(in);
  const auto woc = read_count(in);
  LCL_CHECK(wor == p.w_out.rows() && woc == p.w_out.cols(), ErrorKind::Parse,
            "checkpoint: w_out shape disagrees with dims");
  read_values(in, p.w_out.data());
  expect_word(in, "b_out");
  LCL_CHECK(read_count(in) == p.b_out.size(), ErrorKind::Parse, "checkpoint: b_out size disagrees with dims");
  read_values(in, p.b_out);
  validate(p);
  return p;
}

void save_checkpoint(const std::filesystem::path& path, const ClassifierParams& params) {
  auto out = detail::open_output(path);
  write_checkpoint(out, params);
}

ClassifierParams load_checkpoint(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return read_checkpoint(in);
}

}  // namespace lcl
