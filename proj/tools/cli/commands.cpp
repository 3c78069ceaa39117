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
#include "commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "config_file.hpp"
#include "lcl/curriculum.hpp"
#include "lcl/data.hpp"
#include "lcl/error.hpp"
#include "lcl/experiments.hpp"
#include "lcl/similarity.hpp"

namespace lcl::cli {
namespace {

namespace fs = std::filesystem;

std::string fmt(double v, const char* spec = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

void write_spectrum_summary(std::ostream& out, const std::vector<double>& spectrum) {
  out << "top eigenvalues:";
  for (std::size_t i = 0; i < std::min<std::size_t>(5, spectrum.size()); ++i) out << ' ' << fmt(spectrum[i]);
  out << "\neffective rank: " << fmt(effective_rank(spectrum)) << '\n';
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  LCL_CHECK(f.good(), ErrorKind::Io, "cannot write '" + path.string() + "'");
  f << text;
}

// ---------------------------------------------------------------- build-sim

struct BuildSimArgs {
  std::string kind = "embedding";
  std::string in;
  std::string out;
  bool no_clamp = false;
  std::optional<std::size_t> expected_dim;
  SimrankOptions simrank;
  std::string spectrum_out;
  std::string report_out;
};

int cmd_build_sim(const BuildSimArgs& a, std::ostream& out) {
  std::ostringstream report;
  std::optional<SimilarityMatrix> sim;
  if (a.kind == "hierarchy") {
    sim = simrank(load_hierarchy(a.in), a.simrank);
    report << "source: simrank (decay " << fmt(a.simrank.decay) << ")\n";
  } else {
    const auto source = a.kind == "attribute" ? SimilaritySource::AttributeCosine : SimilaritySource::EmbeddingCosine;
    auto built = build_cosine_similarity(load_embeddings(a.in, a.expected_dim), !a.no_clamp, source);
    report << "source: " << to_string(source) << "\nclamped entries: " << built.clamped_entries << '\n';
    sim = std::move(built.matrix);
  }
  report << "classes: " << sim->size() << '\n';
  const auto spectrum = eigenspectrum(*sim);
  write_spectrum_summary(report, spectrum);

  save_similarity_csv(a.out, *sim);
  if (!a.spectrum_out.empty()) {
    std::ostringstream s;
    s << "index,eigenvalue\n";
    for (std::size_t i = 0; i < spectrum.size(); ++i) s << i << ',' << fmt(spectrum[i], "%.17g") << '\n';
    write_text_file(a.spectrum_out, s.str());
  }
  if (!a.report_out.empty()) write_text_file(a.report_out, report.str());
  out << report.str() << "wrote " << a.out << '\n';
  return kExitOk;
}

// ------------------------------------------------------------------- verify

struct VerifyArgs {
  std::string sim;
  std::string schedule;
  std::optional<double> epsilon;
  std::size_t horizon = 500;
  std::string schedule_out;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out, std::ostream& err) {
  std::optional<TargetSchedule> schedule;
  if (!a.schedule.empty()) {
    schedule = load_schedule_csv(a.schedule);
  } else {
    if (!a.epsilon) {
      err << "verify: --epsilon is required with --sim\n";
      return kExitUsage;
    }
    auto [entries, names] = read_similarity_csv(a.sim);
    if (auto violation = find_similarity_violation(entries)) {
      out << "similarity matrix rejected: " << *violation << "\nFAIL\n";
      return kExitFailed;
    }
    schedule = init_targets(SimilarityMatrix(std::move(entries), std::move(names), SimilaritySource::External),
                            *a.epsilon);
  }
  if (!a.schedule_out.empty()) save_schedule_csv(a.schedule_out, *schedule);
  const auto report = verify_curriculum(*schedule, a.horizon, {}, false);
  write_report(out, report);
  return report.passed() ? kExitOk : kExitFailed;
}

// ---------------------------------------------------------------------- run

struct RunArgs {
  std::string config;
  std::optional<std::size_t> jobs;
  std::string out_dir;
  std::string seed_list;
  bool debug_verify = false;
};

SimilarityMatrix build_similarity(const SimilaritySpec& spec, const std::optional<SyntheticData>& synthetic) {
  switch (spec.kind) {
    case SimilarityKind::Embedding:
      if (!spec.path) return build_cosine_similarity(synthetic->class_embeddings, spec.clamp_negative).matrix;
      return build_cosine_similarity(load_embeddings(*spec.path), spec.clamp_negative).matrix;
    case SimilarityKind::Attribute:
      return build_cosine_similarity(load_embeddings(*spec.path), spec.clamp_negative,
                                     SimilaritySource::AttributeCosine)
          .matrix;
    case SimilarityKind::Hierarchy:
      return simrank(load_hierarchy(*spec.path), spec.simrank);
    case SimilarityKind::File:
      return load_similarity_csv(*spec.path);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown similarity kind");
}

int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
  RunConfig cfg = load_run_config(a.config);
  if (!a.seed_list.empty()) {
    const auto seeds = parse_seed_list(a.seed_list);
    for (auto& c : cfg.grid) c.seeds = seeds;
  }
  if (!a.out_dir.empty()) cfg.out_dir = a.out_dir;
  if (a.jobs) cfg.jobs = *a.jobs;
  if (cfg.jobs == 0) {
    err << "run: --jobs must be at least 1\n";
    return kExitUsage;
  }

  std::optional<SyntheticData> synthetic;
  std::optional<Dataset> train;
  std::optional<Dataset> test;
  if (cfg.synthetic) {
    synthetic = generate_synthetic(*cfg.synthetic);
    train = synthetic->train;
    test = synthetic->test;
  } else {
    train = load_dataset(*cfg.train_path);
    test = load_dataset(*cfg.test_path);
  }
  SuiteInputs inputs{&*train, &*test, {}};
  for (const auto& spec : cfg.similarities) {
    auto sim = build_similarity(spec, synthetic);
    LCL_CHECK(sim.size() == train->num_classes(), ErrorKind::DimensionMismatch,
              "similarity '" + std::string(to_string(spec.kind)) + "' has " + std::to_string(sim.size()) +
                  " classes, dataset has " + std::to_string(train->num_classes()));
    inputs.similarities.emplace(spec.kind, std::move(sim));
  }
  if (synthetic && !inputs.similarities.count(SimilarityKind::Embedding))
    inputs.similarities.emplace(SimilarityKind::Embedding,
                                build_cosine_similarity(synthetic->class_embeddings).matrix);

  SuiteOptions options;
  options.jobs = cfg.jobs;
  options.out_dir = cfg.out_dir;
  options.trial.debug_verify_curriculum = a.debug_verify;
  const auto result = run_suite(cfg.grid, inputs, options);

  print_aggregate_table(out, result.aggregates);
  out << '\n';
  write_rank_report(out, result.ranks);
  out << "results written to " << cfg.out_dir.string() << '\n';
  for (const auto& f : result.failures) err << "trial failed: " << f.config_id << " seed " << f.seed << ": " << f.message << '\n';
  return result.failures.empty() ? kExitOk : kExitFailed;
}

// ------------------------------------------------------------------- report

struct ReportArgs {
  std::vector<std::string> inputs;
  std::string out_dir;
};

int cmd_report(const ReportArgs& a, std::ostream& out) {
  std::vector<AggregateRow> rows;
  std::vector<std::string> tags;
  for (const auto& path : a.inputs) {
    const auto trials = load_raw_csv(path);
    const auto agg = aggregate(trials);
    const std::string tag = a.inputs.size() > 1 ? fs::path(path).stem().string() : std::string();
    for (const auto& r : agg) {
      rows.push_back(r);
      tags.push_back(tag);
    }
  }
  const auto ranks = rank_methods(rows, tags);

  print_aggregate_table(out, rows);
  out << '\n';
  write_rank_report(out, ranks);
  if (!a.out_dir.empty()) {
    std::ostringstream agg_csv;
    write_aggregate_csv(agg_csv, rows);
    write_text_file(fs::path(a.out_dir) / "aggregate.csv", agg_csv.str());
    std::ostringstream rank_txt;
    write_rank_report(rank_txt, ranks);
    write_text_file(fs::path(a.out_dir) / "ranks.txt", rank_txt.str());
  }
  return kExitOk;
}

// ----------------------------------------------------------------- gen-data

struct GenDataArgs {
  SyntheticSpec spec;
  std::string out_dir = ".";
};

int cmd_gen_data(const GenDataArgs& a, std::ostream& out) {
  const auto data = generate_synthetic(a.spec);
  const fs::path dir(a.out_dir);
  save_dataset(dir / "train.csv", data.train);
  save_dataset(dir / "test.csv", data.test);
  save_embeddings(dir / "embeddings.txt", data.class_embeddings);
  out << "wrote " << data.train.size() << " train and " << data.test.size() << " test examples over "
      << a.spec.num_classes() << " classes to " << dir.string() << '\n';
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Label-similarity curriculum learning toolkit", "lcl"};
  app.require_subcommand(1);

  BuildSimArgs build;
  auto* build_cmd = app.add_subcommand("build-sim", "Build a class similarity matrix");
  build_cmd->add_option("--kind", build.kind, "embedding, attribute or hierarchy")
      ->check(CLI::IsMember({"embedding", "attribute", "hierarchy"}));
  build_cmd->add_option("--in", build.in, "Embedding/attribute table or hierarchy edge list")->required();
  build_cmd->add_option("--out", build.out, "Similarity CSV to write")->required();
  build_cmd->add_flag("--no-clamp", build.no_clamp, "Reject negative cosines instead of clamping them to 0");
  build_cmd->add_option("--expected-dim", build.expected_dim, "Required vector dimension");
  build_cmd->add_option("--decay", build.simrank.decay, "Simrank decay")->check(CLI::Range(0.0, 1.0));
  build_cmd->add_option("--tol", build.simrank.tol, "Simrank convergence tolerance");
  build_cmd->add_option("--max-iter", build.simrank.max_iter, "Simrank iteration limit");
  build_cmd->add_option("--spectrum", build.spectrum_out, "Write the full eigenspectrum as CSV");
  build_cmd->add_option("--report", build.report_out, "Write the build report to a file");

  VerifyArgs verify;
  auto* verify_cmd = app.add_subcommand("verify", "Check the curriculum axioms on a target schedule");
  auto* sim_opt = verify_cmd->add_option("--sim", verify.sim, "Similarity CSV");
  auto* sched_opt = verify_cmd->add_option("--schedule", verify.schedule, "Schedule CSV");
  sim_opt->excludes(sched_opt);
  verify_cmd->add_option("--epsilon", verify.epsilon, "Cooling factor in (0, 1)");
  verify_cmd->add_option("--horizon", verify.horizon, "Number of steps to check");
  verify_cmd->add_option("--schedule-out", verify.schedule_out, "Write the initial schedule as CSV");

  RunArgs runa;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment grid");
  run_cmd->add_option("--config", runa.config, "Run configuration file")->required();
  run_cmd->add_option("--jobs", runa.jobs, "Worker threads");
  run_cmd->add_option("--out-dir", runa.out_dir, "Output directory");
  run_cmd->add_option("--seed-list", runa.seed_list, "Comma-separated seeds overriding the config");
  run_cmd->add_flag("--debug-verify-curriculum", runa.debug_verify, "Check curriculum axioms inside each trial");

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "Aggregate raw results and rank methods");
  report_cmd->add_option("inputs", report.inputs, "Raw result CSVs")->required();
  report_cmd->add_option("--out-dir", report.out_dir, "Write aggregate.csv and ranks.txt here");

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate a synthetic hierarchical dataset");
  gen_cmd->add_option("--out-dir", gen.out_dir, "Output directory");
  gen_cmd->add_option("--superclusters", gen.spec.num_superclusters);
  gen_cmd->add_option("--classes-per-supercluster", gen.spec.classes_per_supercluster);
  gen_cmd->add_option("--dim", gen.spec.dim);
  gen_cmd->add_option("--train-per-class", gen.spec.train_per_class);
  gen_cmd->add_option("--test-per-class", gen.spec.test_per_class);
  gen_cmd->add_option("--intra-spread", gen.spec.intra_spread);
  gen_cmd->add_option("--inter-spread", gen.spec.inter_spread);
  gen_cmd->add_option("--noise-sigma", gen.spec.noise_sigma);
  gen_cmd->add_option("--seed", gen.spec.seed);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*build_cmd) return cmd_build_sim(build, out);
    if (*verify_cmd) {
      if (verify.sim.empty() && verify.schedule.empty()) {
        err << "verify: one of --sim and --schedule is required\n";
        return kExitUsage;
      }
      return cmd_verify(verify, out, err);
    }
    if (*run_cmd) return cmd_run(runa, out, err);
    if (*report_cmd) return cmd_report(report, out);
    if (*gen_cmd) {
      gen.spec.validate();
      return cmd_gen_data(gen, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace lcl::cli
