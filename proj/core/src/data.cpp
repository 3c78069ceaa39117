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
#include "lcl/data.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <string>

#include "lcl/error.hpp"
#include "text_io.hpp"

namespace lcl {

std::string_view to_string(Split split) noexcept { return split == Split::Train ? "train" : "test"; }

Dataset::Dataset(Matrix features, std::vector<std::size_t> labels, std::size_t num_classes, Split split)
    : features_(std::move(features)), labels_(std::move(labels)), num_classes_(num_classes), split_(split) {
  LCL_CHECK(num_classes_ >= 1, ErrorKind::InvalidArgument, "dataset needs at least one class");
  LCL_CHECK(!labels_.empty(), ErrorKind::EmptyInput, "dataset has no examples");
  LCL_CHECK(features_.rows() == labels_.size(), ErrorKind::ShapeMismatch, "feature rows do not match label count");
  LCL_CHECK(features_.cols() >= 1, ErrorKind::ShapeMismatch, "dataset needs at least one feature");
  for (std::size_t i = 0; i < labels_.size(); ++i)
    LCL_CHECK(labels_[i] < num_classes_, ErrorKind::OutOfRange,
              "example " + std::to_string(i) + " has label " + std::to_string(labels_[i]) + " >= " +
                  std::to_string(num_classes_));
  if (split_ == Split::Train) {
    const auto counts = class_counts();
    for (std::size_t c = 0; c < num_classes_; ++c)
      LCL_CHECK(counts[c] > 0, ErrorKind::MissingClass, "class " + std::to_string(c) + " has no training examples");
  }
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(num_classes_, 0);
  for (const auto l : labels_) ++counts[l];
  return counts;
}

Dataset parse_dataset(std::istream& in) {
  std::string line;
  long long classes = -1;
  Split split = Split::Train;
  bool have_meta = false;
  bool have_header = false;
  std::size_t dim = 0;
  std::vector<double> values;
  std::vector<std::size_t> labels;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = detail::trim(line);
    if (text.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    if (text.front() == '#') {
      const auto tokens = detail::split_ws(text.substr(1));
      for (const auto tok : tokens) {
        if (tok.rfind("classes=", 0) == 0) {
          classes = detail::parse_int(tok.substr(8), where);
          have_meta = true;
        } else if (tok.rfind("split=", 0) == 0) {
          const auto v = tok.substr(6);
          LCL_CHECK(v == "train" || v == "test", ErrorKind::Parse, where + ": split must be train or test");
          split = v == "train" ? Split::Train : Split::Test;
        }
      }
      continue;
    }
    const auto fields = detail::split(text, ',');
    if (!have_header) {
      LCL_CHECK(detail::trim(fields[0]) == "label" && fields.size() >= 2, ErrorKind::Parse,
                where + ": expected header 'label,f1,...,fd'");
      dim = fields.size() - 1;
      have_header = true;
      continue;
    }
    LCL_CHECK(fields.size() == dim + 1, ErrorKind::Parse,
              where + ": expected " + std::to_string(dim + 1) + " fields, found " + std::to_string(fields.size()));
    const auto label = detail::parse_int(fields[0], where);
    LCL_CHECK(label >= 0, ErrorKind::OutOfRange, where + ": negative label");
    labels.push_back(static_cast<std::size_t>(label));
    for (std::size_t k = 1; k < fields.size(); ++k) values.push_back(detail::parse_double(fields[k], where));
  }
  LCL_CHECK(have_header || have_meta, ErrorKind::EmptyInput, "dataset file is empty");
  LCL_CHECK(have_meta && classes >= 1, ErrorKind::Parse, "missing '# classes=<C> split=<train|test>' metadata line");
  LCL_CHECK(!labels.empty(), ErrorKind::EmptyInput, "dataset file has no examples");
  Matrix features(labels.size(), dim);
  std::copy(values.begin(), values.end(), features.data().begin());
  return Dataset(std::move(features), std::move(labels), static_cast<std::size_t>(classes), split);
}

Dataset load_dataset(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return parse_dataset(in);
}

void write_dataset(std::ostream& out, const Dataset& ds) {
  out << "# classes=" << ds.num_classes() << " split=" << to_string(ds.split()) << "\n";
  out << "label";
  for (std::size_t k = 1; k <= ds.dim(); ++k) out << ",f" << k;
  out << "\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out << ds.label(i);
    for (const double v : ds.x(i)) out << ',' << detail::format_double(v);
    out << "\n";
  }
}

void save_dataset(const std::filesystem::path& path, const Dataset& ds) {
  auto out = detail::open_output(path);
  write_dataset(out, ds);
}

Dataset subsample(const Dataset& ds, double dr, std::uint64_t seed) {
  LCL_CHECK(ds.split() == Split::Train, ErrorKind::InvalidArgument, "only training splits are subsampled");
  LCL_CHECK(dr > 0.0 && dr <= 1.0, ErrorKind::InvalidArgument,
            "data ratio must lie in (0, 1], got " + detail::format_double(dr));
  if (dr == 1.0) return ds;

  std::vector<std::vector<std::size_t>> by_class(ds.num_classes());
  for (std::size_t i = 0; i < ds.size(); ++i) by_class[ds.label(i)].push_back(i);

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> kept;
  for (auto& members : by_class) {
    const double n = static_cast<double>(members.size());
    // The 1e-9 slack keeps products like 0.07 * 100 = 7.000000000000001 at 7.
    auto keep = static_cast<std::size_t>(std::ceil(dr * n - 1e-9));
    keep = std::clamp<std::size_t>(keep, members.empty() ? 0 : 1, members.size());
    std::shuffle(members.begin(), members.end(), rng);
    kept.insert(kept.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(keep));
  }
  std::sort(kept.begin(), kept.end());

  Matrix features(kept.size(), ds.dim());
  std::vector<std::size_t> labels(kept.size());
  for (std::size_t r = 0; r < kept.size(); ++r) {
    const auto src = ds.x(kept[r]);
    std::copy(src.begin(), src.end(), features.row(r).begin());
    labels[r] = ds.label(kept[r]);
  }
  return Dataset(std::move(features), std::move(labels), ds.num_classes(), Split::Train);
}

void SyntheticSpec::validate() const {
  LCL_CHECK(num_superclusters >= 1 && classes_per_supercluster >= 1 && dim >= 1 && train_per_class >= 1 &&
                test_per_class >= 1,
            ErrorKind::InvalidArgument, "synthetic counts must be positive");
  LCL_CHECK(intra_spread > 0.0 && inter_spread > 0.0, ErrorKind::InvalidArgument, "synthetic spreads must be positive");
  LCL_CHECK(noise_sigma >= 0.0, ErrorKind::InvalidArgument, "noise_sigma must be non-negative");
  LCL_CHECK(inter_spread > intra_spread, ErrorKind::InvalidArgument, "inter_spread must exceed intra_spread");
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  const std::size_t c = spec.num_classes();
  const std::size_t d = spec.dim;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> unit(0.0, 1.0);

  Matrix super(spec.num_superclusters, d);
  for (auto& v : super.data()) v = spec.inter_spread * unit(rng);
  Matrix centres(c, d);
  std::vector<std::string> names;
  for (std::size_t k = 0; k < c; ++k) {
    const std::size_t s = k / spec.classes_per_supercluster;
    for (std::size_t j = 0; j < d; ++j) centres(k, j) = super(s, j) + spec.intra_spread * unit(rng);
    names.push_back("s" + std::to_string(s) + "_c" + std::to_string(k));
  }

  auto sample = [&](std::size_t per_class, Split split) {
    Matrix x(c * per_class, d);
    std::vector<std::size_t> y(c * per_class);
    std::size_t r = 0;
    for (std::size_t n = 0; n < per_class; ++n) {
      for (std::size_t k = 0; k < c; ++k, ++r) {
        y[r] = k;
        for (std::size_t j = 0; j < d; ++j) x(r, j) = centres(k, j) + spec.noise_sigma * unit(rng);
      }
    }
    return Dataset(std::move(x), std::move(y), c, split);
  };
  Dataset train = sample(spec.train_per_class, Split::Train);
  Dataset test = sample(spec.test_per_class, Split::Test);
  return {std::move(train), std::move(test), EmbeddingTable(std::move(names), std::move(centres))};
}

}  // namespace lcl
