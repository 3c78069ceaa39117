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

#include <fstream>
#include <sstream>

#include "cli/commands.hpp"
#include "cli/config_file.hpp"
#include "lcl/error.hpp"
#include "lcl/experiments.hpp"
#include "test_support.hpp"

using namespace lcl;
namespace fs = std::filesystem;

namespace {

struct Invocation {
  int code = -1;
  std::string out;
  std::string err;
};

Invocation lcl_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "lcl");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Invocation r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p);
  f << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p);
  return std::string(std::istreambuf_iterator<char>(f), {});
}

cli::RunConfig parse_config(const std::string& text) {
  std::istringstream in(text);
  return cli::parse_run_config(in);
}

const char* kSmallSynthetic =
    "[synthetic]\nsuperclusters = 2\nclasses_per_supercluster = 2\ndim = 4\ntrain_per_class = 8\n"
    "test_per_class = 4\n";

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit 2, help exits 0") {
    CHECK(lcl_cli({}).code == cli::kExitUsage);
    CHECK(lcl_cli({"frobnicate"}).code == cli::kExitUsage);
    CHECK(lcl_cli({"--help"}).code == cli::kExitOk);
    CHECK(lcl_cli({"build-sim", "--kind", "bogus", "--in", "a", "--out", "b"}).code == cli::kExitUsage);
    CHECK(lcl_cli({"verify"}).code == cli::kExitUsage);
  }

  TEST_CASE("build-sim") {
    const auto dir = testing::scratch_dir("cli_build");
    write_file(dir / "emb.txt", "a 1 0 0.2\nb 0.9 0.1 0\nc 0 1 0.1\n");
    const auto sim_path = (dir / "sim.csv").string();
    const auto r = lcl_cli({"build-sim", "--kind", "embedding", "--in", (dir / "emb.txt").string(), "--out", sim_path,
                            "--report", (dir / "report.txt").string(), "--spectrum", (dir / "spec.csv").string()});
    CHECK(r.code == cli::kExitOk);
    const auto [m, names] = read_similarity_csv(sim_path);
    CHECK(names == std::vector<std::string>{"a", "b", "c"});
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) CHECK(m(i, j) == m(j, i));
    CHECK(read_file(dir / "report.txt").find("effective rank") != std::string::npos);
    CHECK(read_file(dir / "report.txt").find("clamped entries: 0") != std::string::npos);
    CHECK(fs::exists(dir / "spec.csv"));

    write_file(dir / "tree.txt", "root a\nroot b\n@leaves a b\n");
    const auto h = lcl_cli({"build-sim", "--kind", "hierarchy", "--decay", "0.8", "--in", (dir / "tree.txt").string(),
                            "--out", (dir / "h.csv").string()});
    CHECK(h.code == cli::kExitOk);
    CHECK(h.out.find("simrank") != std::string::npos);
    CHECK(read_similarity_csv(dir / "h.csv").first(0, 1) == doctest::Approx(0.8).epsilon(1e-12));

    const auto missing = (dir / "missing.txt").string();
    const auto bad = lcl_cli({"build-sim", "--in", missing, "--out", (dir / "x.csv").string()});
    CHECK(bad.code == cli::kExitUsage);
    CHECK(bad.err.find(missing) != std::string::npos);

    write_file(dir / "dup.txt", "a 1 0\nb 2 0\n");
    CHECK(lcl_cli({"build-sim", "--in", (dir / "dup.txt").string(), "--out", (dir / "d.csv").string()}).code ==
          cli::kExitUsage);
  }

  TEST_CASE("verify") {
    const auto dir = testing::scratch_dir("cli_verify");
    write_file(dir / "id.csv", "a,b,c\n1,0,0\n0,1,0\n0,0,1\n");
    for (const char* eps : {"0.1", "0.9", "0.999"})
      CHECK(lcl_cli({"verify", "--sim", (dir / "id.csv").string(), "--epsilon", eps}).code == cli::kExitOk);

    write_file(dir / "cos.txt", "a 1 0.2 0.1\nb 0.8 0.5 0\nc 0.1 0.1 1\nd 0.3 0.9 0.4\n");
    REQUIRE(lcl_cli({"build-sim", "--in", (dir / "cos.txt").string(), "--out", (dir / "cos.csv").string()}).code == 0);
    const auto ok = lcl_cli({"verify", "--sim", (dir / "cos.csv").string(), "--epsilon", "0.999", "--horizon", "500",
                             "--schedule-out", (dir / "sched.csv").string()});
    CHECK(ok.code == cli::kExitOk);
    CHECK(ok.out.find("PASS") != std::string::npos);
    CHECK(lcl_cli({"verify", "--schedule", (dir / "sched.csv").string()}).code == cli::kExitOk);

    write_file(dir / "dominated.csv", "a,b\n1,1.2\n1.2,1\n");
    const auto dom = lcl_cli({"verify", "--sim", (dir / "dominated.csv").string(), "--epsilon", "0.9"});
    CHECK(dom.code == cli::kExitFailed);
    CHECK(dom.out.find("dominance") != std::string::npos);

    write_file(dir / "broken.csv", "a,b\n1,x\n0,1\n");
    CHECK(lcl_cli({"verify", "--sim", (dir / "broken.csv").string(), "--epsilon", "0.9"}).code == cli::kExitUsage);

    write_file(dir / "bad_sched.csv", "# epsilon=0.9 step=0\n0.3,0.7\n0,1\n");
    const auto fail = lcl_cli({"verify", "--schedule", (dir / "bad_sched.csv").string()});
    CHECK(fail.code == cli::kExitFailed);
    CHECK(fail.out.find("FAIL") != std::string::npos);

    CHECK(lcl_cli({"verify", "--sim", (dir / "id.csv").string()}).code == cli::kExitUsage);
  }

  TEST_CASE("config grid expansion") {
    const auto cfg = parse_config(std::string(kSmallSynthetic) +
                                  "[grid]\nencodings = SL, LS, LCL\nepsilons = 0.9, 0.99, 0.999\ndrs = 0.05, 0.1\n");
    CHECK(cfg.grid.size() == 10);
    std::size_t lcl_count = 0;
    for (const auto& c : cfg.grid) {
      CHECK_NOTHROW(c.validate());
      if (c.encoding == Encoding::LCL) ++lcl_count;
    }
    CHECK(lcl_count == 6);
    CHECK(cfg.synthetic.has_value());

    const auto explicit_cfg = parse_config(std::string(kSmallSynthetic) +
                                           "[train]\nepochs = 7\n[config.one]\nencoding = LCL\nepsilon = 0.5\nlr = 0.3\n");
    REQUIRE(explicit_cfg.grid.size() == 1);
    CHECK(explicit_cfg.grid[0].epochs == 7);
    CHECK(explicit_cfg.grid[0].lr == 0.3);
    CHECK(explicit_cfg.grid[0].epsilon == 0.5);
  }

  TEST_CASE("malformed configs are rejected") {
    const std::string base = kSmallSynthetic;
    CHECK_THROWS_AS(parse_config(base + "[grid]\nencodings = SL\n[bogus]\nx = 1\n"), Error);
    CHECK_THROWS_AS(parse_config(base + "[grid]\nencodings = SL\nfoo = 1\n"), Error);
    CHECK_THROWS_AS(parse_config(base + "[grid]\nencodings = XX\n"), Error);
    CHECK_THROWS_AS(parse_config(base + "[train]\nepochs = 0\n[grid]\nencodings = SL\n"), Error);
    CHECK_THROWS_AS(parse_config(base + "[train]\nepochs = ten\n[grid]\nencodings = SL\n"), Error);
    CHECK_THROWS_AS(parse_config("[grid]\nencodings = SL\n"), Error);
    CHECK_THROWS_AS(parse_config(base + "[grid]\nencodings = LCL\nepsilons = 1.5\n"), Error);
    CHECK_THROWS_AS(parse_config(base + "[grid]\nencodings = LCL\nsimilarity = hierarchy\n"), Error);
    CHECK_THROWS_AS(cli::parse_seed_list("1,,2"), Error);
    CHECK(cli::parse_seed_list("3, 1,2") == std::vector<std::uint64_t>{3, 1, 2});
  }

  TEST_CASE("run and report") {
    const auto dir = testing::scratch_dir("cli_run");
    write_file(dir / "minimal.ini", std::string(kSmallSynthetic) +
                                        "[suite]\nseeds = 0\nout_dir = out_min\n[train]\nepochs = 2\n"
                                        "[grid]\nencodings = SL\n");
    const auto minimal = lcl_cli({"run", "--config", (dir / "minimal.ini").string()});
    CHECK(minimal.code == cli::kExitOk);
    CHECK(load_raw_csv(dir / "out_min" / "raw.csv").size() == 1);
    CHECK(minimal.out.find("population") != std::string::npos);

    write_file(dir / "grid.ini", std::string(kSmallSynthetic) +
                                     "[suite]\nseeds = 0,1\n[train]\nepochs = 3\n"
                                     "[grid]\nencodings = SL,LS,LCL\ndrs = 0.5,1\n");
    const auto out_a = (dir / "a").string();
    const auto grid =
        lcl_cli({"run", "--config", (dir / "grid.ini").string(), "--out-dir", out_a, "--debug-verify-curriculum"});
    CHECK(grid.code == cli::kExitOk);
    CHECK(aggregate(load_raw_csv(fs::path(out_a) / "raw.csv")).size() == 10);
    CHECK(grid.out.find("chi2_F") != std::string::npos);

    const auto out_b = (dir / "b").string();
    CHECK(lcl_cli({"run", "--config", (dir / "grid.ini").string(), "--out-dir", out_b, "--jobs", "2"}).code == 0);
    CHECK(read_file(fs::path(out_a) / "aggregate.csv") == read_file(fs::path(out_b) / "aggregate.csv"));

    const auto seeds = lcl_cli({"run", "--config", (dir / "minimal.ini").string(), "--out-dir",
                                (dir / "c").string(), "--seed-list", "4,5,6"});
    CHECK(seeds.code == cli::kExitOk);
    CHECK(load_raw_csv(dir / "c" / "raw.csv").size() == 3);

    write_file(dir / "broken.ini", "[grid]\nencodings = SL\n[nonsense\n");
    const auto broken = lcl_cli({"run", "--config", (dir / "broken.ini").string(), "--out-dir", (dir / "x").string()});
    CHECK(broken.code == cli::kExitUsage);
    CHECK_FALSE(fs::exists(dir / "x"));
    CHECK(lcl_cli({"run", "--config", (dir / "nope.ini").string()}).code == cli::kExitUsage);

    const auto single = lcl_cli({"report", (dir / "out_min" / "raw.csv").string()});
    CHECK(single.code == cli::kExitOk);
    CHECK(single.out.find("rank test: skipped") != std::string::npos);

    const auto report = lcl_cli({"report", (fs::path(out_a) / "raw.csv").string(), "--out-dir", (dir / "rep").string()});
    CHECK(report.code == cli::kExitOk);
    CHECK(fs::exists(dir / "rep" / "ranks.txt"));
    CHECK(read_file(dir / "rep" / "aggregate.csv") == read_file(fs::path(out_a) / "aggregate.csv"));

    write_file(dir / "nocol.csv", "config_id,encoding\nx,SL\n");
    CHECK(lcl_cli({"report", (dir / "nocol.csv").string()}).code == cli::kExitUsage);
  }

  TEST_CASE("gen-data") {
    const auto dir = testing::scratch_dir("cli_gen");
    const auto r = lcl_cli({"gen-data", "--out-dir", dir.string(), "--superclusters", "2",
                            "--classes-per-supercluster", "3", "--dim", "5", "--seed", "4"});
    CHECK(r.code == cli::kExitOk);
    const auto train = load_dataset(dir / "train.csv");
    CHECK(train.num_classes() == 6);
    CHECK(train.dim() == 5);
    CHECK(load_embeddings(dir / "embeddings.txt").size() == 6);
    CHECK(lcl_cli({"gen-data", "--out-dir", dir.string(), "--dim", "0"}).code == cli::kExitUsage);
  }
}
