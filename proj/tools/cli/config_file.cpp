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
#include "config_file.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/lexical_cast.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fstream>
#include <set>

#include "lcl/error.hpp"

namespace lcl::cli {
namespace {

namespace pt = boost::property_tree;

template <class T>
T convert(const std::string& section, const std::string& key, const std::string& text) {
  try {
    return boost::lexical_cast<T>(boost::trim_copy(text));
  } catch (const boost::bad_lexical_cast&) {
    throw Error(ErrorKind::Parse, "[" + section + "] " + key + ": cannot parse '" + text + "'");
  }
}

template <class T>
std::vector<T> convert_list(const std::string& section, const std::string& key, const std::string& text) {
  std::vector<std::string> parts;
  boost::split(parts, text, boost::is_any_of(","));
  std::vector<T> out;
  for (auto& p : parts) {
    boost::trim(p);
    LCL_CHECK(!p.empty(), ErrorKind::Parse, "[" + section + "] " + key + ": empty list element");
    out.push_back(convert<T>(section, key, p));
  }
  return out;
}

bool convert_bool(const std::string& section, const std::string& key, const std::string& text) {
  const auto v = boost::to_lower_copy(boost::trim_copy(text));
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  throw Error(ErrorKind::Parse, "[" + section + "] " + key + ": expected a boolean, found '" + text + "'");
}

void reject_unknown(const std::string& section, const pt::ptree& tree, const std::set<std::string>& allowed) {
  for (const auto& [key, _] : tree)
    LCL_CHECK(allowed.count(key) > 0, ErrorKind::Parse, "[" + section + "] unknown key '" + key + "'");
}

const std::set<std::string> kTrainKeys = {"epochs", "batch_size", "lr", "lr_decay", "lr_decay_every",
                                          "lambda", "arch",       "hidden"};

void apply_train_keys(const std::string& section, const pt::ptree& tree, ExperimentConfig& c) {
  for (const auto& [key, node] : tree) {
    const auto& v = node.data();
    if (key == "epochs") c.epochs = convert<std::size_t>(section, key, v);
    else if (key == "batch_size") c.batch_size = convert<std::size_t>(section, key, v);
    else if (key == "lr") c.lr = convert<double>(section, key, v);
    else if (key == "lr_decay") c.lr_decay = convert<double>(section, key, v);
    else if (key == "lr_decay_every") c.lr_decay_every = convert<std::size_t>(section, key, v);
    else if (key == "lambda") c.lambda = convert<double>(section, key, v);
    else if (key == "arch") c.arch = parse_architecture(boost::trim_copy(v));
    else if (key == "hidden") c.hidden = convert<std::size_t>(section, key, v);
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& text) {
  std::filesystem::path p(boost::trim_copy(text));
  return p.is_absolute() || base.empty() ? p : base / p;
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
  auto seeds = convert_list<std::uint64_t>("suite", "seeds", std::string(text));
  LCL_CHECK(!seeds.empty(), ErrorKind::Parse, "seed list is empty");
  return seeds;
}

RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base_dir) {
  pt::ptree root;
  try {
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorKind::Parse, std::string("config: ") + e.what());
  }

  RunConfig run;
  ExperimentConfig defaults;
  std::optional<pt::ptree> grid;
  std::vector<std::pair<std::string, pt::ptree>> explicit_configs;

  for (const auto& [section, tree] : root) {
    LCL_CHECK(!tree.empty() || tree.data().empty(), ErrorKind::Parse, "config: key '" + section + "' outside a section");
    if (section == "data") {
      reject_unknown(section, tree, {"train", "test"});
      if (auto v = tree.get_optional<std::string>("train")) run.train_path = resolve(base_dir, *v);
      if (auto v = tree.get_optional<std::string>("test")) run.test_path = resolve(base_dir, *v);
      LCL_CHECK(run.train_path && run.test_path, ErrorKind::Parse, "[data] needs both train and test");
    } else if (section == "synthetic") {
      reject_unknown(section, tree,
                     {"superclusters", "classes_per_supercluster", "dim", "train_per_class", "test_per_class",
                      "intra_spread", "inter_spread", "noise_sigma", "seed"});
      SyntheticSpec s;
      for (const auto& [key, node] : tree) {
        const auto& v = node.data();
        if (key == "superclusters") s.num_superclusters = convert<std::size_t>(section, key, v);
        else if (key == "classes_per_supercluster") s.classes_per_supercluster = convert<std::size_t>(section, key, v);
        else if (key == "dim") s.dim = convert<std::size_t>(section, key, v);
        else if (key == "train_per_class") s.train_per_class = convert<std::size_t>(section, key, v);
        else if (key == "test_per_class") s.test_per_class = convert<std::size_t>(section, key, v);
        else if (key == "intra_spread") s.intra_spread = convert<double>(section, key, v);
        else if (key == "inter_spread") s.inter_spread = convert<double>(section, key, v);
        else if (key == "noise_sigma") s.noise_sigma = convert<double>(section, key, v);
        else if (key == "seed") s.seed = convert<std::uint64_t>(section, key, v);
      }
      s.validate();
      run.synthetic = s;
    } else if (section.rfind("similarity.", 0) == 0) {
      reject_unknown(section, tree, {"path", "clamp_negative", "decay", "tol", "max_iter"});
      SimilaritySpec s;
      s.kind = parse_similarity_kind(section.substr(11));
      for (const auto& [key, node] : tree) {
        const auto& v = node.data();
        if (key == "path") s.path = resolve(base_dir, v);
        else if (key == "clamp_negative") s.clamp_negative = convert_bool(section, key, v);
        else if (key == "decay") s.simrank.decay = convert<double>(section, key, v);
        else if (key == "tol") s.simrank.tol = convert<double>(section, key, v);
        else if (key == "max_iter") s.simrank.max_iter = convert<std::size_t>(section, key, v);
      }
      run.similarities.push_back(std::move(s));
    } else if (section == "suite") {
      reject_unknown(section, tree, {"seeds", "out_dir", "jobs"});
      if (auto v = tree.get_optional<std::string>("seeds")) defaults.seeds = parse_seed_list(*v);
      if (auto v = tree.get_optional<std::string>("out_dir")) run.out_dir = resolve(base_dir, *v);
      if (auto v = tree.get_optional<std::string>("jobs")) run.jobs = convert<std::size_t>(section, "jobs", *v);
    } else if (section == "train") {
      reject_unknown(section, tree, kTrainKeys);
      apply_train_keys(section, tree, defaults);
    } else if (section == "grid") {
      reject_unknown(section, tree, {"encodings", "epsilons", "alphas", "kd_temperatures", "drs", "similarity"});
      grid = tree;
    } else if (section.rfind("config.", 0) == 0) {
      explicit_configs.emplace_back(section, tree);
    } else {
      throw Error(ErrorKind::Parse, "config: unknown section [" + section + "]");
    }
  }
  LCL_CHECK(run.synthetic.has_value() != run.train_path.has_value(), ErrorKind::Parse,
            "config needs exactly one of [data] and [synthetic]");

  if (grid) {
    const std::string section = "grid";
    const auto encodings = grid->get<std::string>("encodings", "");
    LCL_CHECK(!encodings.empty(), ErrorKind::Parse, "[grid] needs encodings");
    std::vector<std::string> names;
    boost::split(names, encodings, boost::is_any_of(","));
    const auto epsilons = convert_list<double>(section, "epsilons", grid->get<std::string>("epsilons", "0.9,0.99,0.999"));
    const auto alphas = convert_list<double>(section, "alphas", grid->get<std::string>("alphas", "0.1"));
    const auto temps = convert_list<double>(section, "kd_temperatures", grid->get<std::string>("kd_temperatures", "1"));
    const auto drs = convert_list<double>(section, "drs", grid->get<std::string>("drs", "1"));
    const auto sim = parse_similarity_kind(boost::trim_copy(grid->get<std::string>("similarity", "embedding")));
    for (const double dr : drs) {
      for (auto& name : names) {
        const auto enc = parse_encoding(boost::trim_copy(name));
        ExperimentConfig base = defaults;
        base.encoding = enc;
        base.dr = dr;
        base.similarity_source = sim;
        if (enc == Encoding::LCL) {
          for (const double e : epsilons) {
            auto c = base;
            c.epsilon = e;
            run.grid.push_back(c);
          }
        } else if (enc == Encoding::LS) {
          for (const double a : alphas) {
            auto c = base;
            c.alpha = a;
            run.grid.push_back(c);
          }
        } else if (enc == Encoding::KD) {
          for (const double t : temps) {
            auto c = base;
            c.kd_temperature = t;
            run.grid.push_back(c);
          }
        } else {
          run.grid.push_back(base);
        }
      }
    }
  }

  for (const auto& [section, tree] : explicit_configs) {
    std::set<std::string> allowed = kTrainKeys;
    allowed.insert({"encoding", "epsilon", "alpha", "kd_temperature", "dr", "similarity", "seeds"});
    reject_unknown(section, tree, allowed);
    const auto enc = tree.get_optional<std::string>("encoding");
    LCL_CHECK(enc.has_value(), ErrorKind::Parse, "[" + section + "] needs an encoding");
    ExperimentConfig c = defaults;
    c.encoding = parse_encoding(boost::trim_copy(*enc));
    if (c.encoding == Encoding::LS) c.alpha = 0.1;
    if (c.encoding == Encoding::KD) c.kd_temperature = 1.0;
    apply_train_keys(section, tree, c);
    for (const auto& [key, node] : tree) {
      const auto& v = node.data();
      if (key == "epsilon") c.epsilon = convert<double>(section, key, v);
      else if (key == "alpha") c.alpha = convert<double>(section, key, v);
      else if (key == "kd_temperature") c.kd_temperature = convert<double>(section, key, v);
      else if (key == "dr") c.dr = convert<double>(section, key, v);
      else if (key == "similarity") c.similarity_source = parse_similarity_kind(boost::trim_copy(v));
      else if (key == "seeds") c.seeds = parse_seed_list(v);
    }
    run.grid.push_back(std::move(c));
  }

  for (const auto& c : run.grid) {
    try {
      c.validate();
    } catch (const Error& e) {
      throw Error(ErrorKind::Parse, std::string("config: ") + e.what());
    }
  }
  std::set<SimilarityKind> kinds;
  for (const auto& s : run.similarities) {
    LCL_CHECK(kinds.insert(s.kind).second, ErrorKind::Parse, "config: similarity source declared twice");
    LCL_CHECK(s.path.has_value() || (s.kind == SimilarityKind::Embedding && run.synthetic), ErrorKind::Parse,
              "config: [similarity." + std::string(to_string(s.kind)) + "] needs a path");
  }
  for (const auto& c : run.grid) {
    if (c.encoding != Encoding::LCL) continue;
    const bool declared = kinds.count(c.similarity_source) > 0;
    const bool implicit = c.similarity_source == SimilarityKind::Embedding && run.synthetic;
    LCL_CHECK(declared || implicit, ErrorKind::Parse,
              "config: LCL needs a [similarity." + std::string(to_string(c.similarity_source)) + "] section");
  }
  return run;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  LCL_CHECK(in.good(), ErrorKind::Io, "cannot open config '" + path.string() + "'");
  return parse_run_config(in, path.parent_path());
}

}  // namespace lcl::cli
