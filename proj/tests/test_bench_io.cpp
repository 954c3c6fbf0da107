#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "svi/bench.hpp"

using namespace svi;
namespace fs = std::filesystem;

namespace {

const char* kAffineConfig = R"(
# affine smoke experiment
[problem]
kind = affine
n = 5
condition = 4
lipschitz = 1.0
noise = 0.5
instance_seed = 3

[geometry]
kind = euclidean
alpha = 2

[algorithm]
kind = algorithm1
gamma0 = 0.99
theta = 0.01

[schedule]
kind = constant
n = 4

[run]
iterations = 30
paths = 2
base_seed = 10
)";

struct temp_dir {
  fs::path path;
  explicit temp_dir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~temp_dir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  REQUIRE(f.good());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("bench-io") {
  TEST_CASE("config parsing") {
    auto cfg = config_file::parse_string(kAffineConfig);
    CHECK(cfg.get("problem", "kind") == "affine");
    CHECK(cfg.get_num("problem", "noise") == doctest::Approx(0.5));
    CHECK(cfg.get_int("run", "iterations", 0) == 30);
    CHECK(cfg.get_or("run", "missing", "dflt") == "dflt");
    CHECK_THROWS_AS(cfg.get("nope", "nothing"), error);
    CHECK_THROWS_AS(config_file::parse_string("key_without_equals\n"), error);

    auto e = parse_experiment(cfg);
    CHECK(e.problem_kind == "affine");
    CHECK(e.paths == 2);
    CHECK(e.a1.max_iterations == 30);
    CHECK(e.schedule.kind == schedule_kind::constant);
  }

  TEST_CASE("trace CSV round trip is lossless") {
    run_trace t;
    for (int k = 0; k < 5; ++k) {
      iteration_record r;
      r.k = k;
      r.gamma = 0.99 * std::pow(0.01, k % 2) / 3.0;
      r.l = k % 2;
      r.n_batch = k + 1;
      r.oracle_calls_cum = 2 * (k + 1) * (k + 2) / 2;
      r.vrf = std::sqrt(2.0) / (k + 1);
      r.nat_residual = std::exp(-k) * 0.123456789012345678;
      if (k % 2 == 0) r.gap = 1.0 / 3.0 + k;
      if (k % 3 == 0) r.rel_error = 2.0 / 7.0;
      r.wall_ms = 17.25 * k;
      t.records.push_back(r);
    }
    temp_dir dir("svi_trace_roundtrip");
    const std::string path = (dir.path / "t.csv").string();
    write_trace_csv(path, t);
    auto u = read_trace_csv(path);
    REQUIRE(u.records.size() == t.records.size());
    for (std::size_t i = 0; i < t.records.size(); ++i) {
      const auto& a = t.records[i];
      const auto& b = u.records[i];
      CHECK(a.k == b.k);
      CHECK(a.gamma == b.gamma);
      CHECK(a.l == b.l);
      CHECK(a.n_batch == b.n_batch);
      CHECK(a.oracle_calls_cum == b.oracle_calls_cum);
      CHECK(a.vrf == b.vrf);
      CHECK(a.nat_residual == b.nat_residual);
      CHECK(a.gap.has_value() == b.gap.has_value());
      if (a.gap) CHECK(*a.gap == *b.gap);
      CHECK(a.rel_error.has_value() == b.rel_error.has_value());
      if (a.rel_error) CHECK(*a.rel_error == *b.rel_error);
      CHECK(a.wall_ms == b.wall_ms);
    }

    // write -> read -> write reproduces the bytes
    const std::string path2 = (dir.path / "t2.csv").string();
    write_trace_csv(path2, u);
    CHECK(slurp(path) == slurp(path2));
  }

  TEST_CASE("experiments are reproducible and persist their artifacts") {
    auto e = parse_experiment(config_file::parse_string(kAffineConfig));
    temp_dir dir("svi_exp");
    auto r1 = run_experiment(e, (dir.path / "a").string(), true);
    auto r2 = run_experiment(e, (dir.path / "b").string(), true);
    CHECK(r1.summary.failed_paths == 0);
    CHECK(r1.summary.final_vrf == r2.summary.final_vrf);
    CHECK(r1.summary.total_oracle_calls == r2.summary.total_oracle_calls);
    CHECK(r1.summary.rate_slope.has_value());
    CHECK(r1.summary.rel_error.has_value());

    // identical CSVs modulo the wall_ms column
    for (int path_i = 0; path_i < 2; ++path_i) {
      auto ta = read_trace_csv(
          (dir.path / "a" / ("algorithm1_path" + std::to_string(path_i) + ".csv")).string());
      auto tb = read_trace_csv(
          (dir.path / "b" / ("algorithm1_path" + std::to_string(path_i) + ".csv")).string());
      REQUIRE(ta.records.size() == tb.records.size());
      for (std::size_t i = 0; i < ta.records.size(); ++i) {
        CHECK(ta.records[i].vrf == tb.records[i].vrf);
        CHECK(ta.records[i].nat_residual == tb.records[i].nat_residual);
        CHECK(ta.records[i].gamma == tb.records[i].gamma);
        CHECK(ta.records[i].oracle_calls_cum == tb.records[i].oracle_calls_cum);
      }
    }
    CHECK(fs::exists(dir.path / "a" / "algorithm1_mean.csv"));
    CHECK(fs::exists(dir.path / "a" / "summary.csv"));
    CHECK(fs::exists(dir.path / "a" / "algorithm1_meta.json"));
  }

  TEST_CASE("paths on a noise-free problem produce identical traces") {
    auto e = parse_experiment(config_file::parse_string(kAffineConfig));
    e.noise = 0.0;
    e.paths = 3;
    temp_dir dir("svi_det");
    auto r = run_experiment(e, (dir.path / "out").string(), true);
    REQUIRE(r.summary.failed_paths == 0);
    for (int i = 1; i < 3; ++i) {
      REQUIRE(r.traces[0].records.size() == r.traces[i].records.size());
      for (std::size_t k = 0; k < r.traces[0].records.size(); ++k) {
        CHECK(r.traces[0].records[k].vrf == r.traces[i].records[k].vrf);
        CHECK(r.traces[0].records[k].nat_residual == r.traces[i].records[k].nat_residual);
      }
      CHECK(r.traces[0].final_x == r.traces[i].final_x);
    }
  }

  TEST_CASE("compare rejects configs over different instances") {
    auto e1 = parse_experiment(config_file::parse_string(kAffineConfig));
    auto e2 = e1;
    e2.instance_seed = 4;  // different frozen problem
    CHECK_THROWS_AS(compare_experiments({e1, e2}, "", true), error);
  }

  TEST_CASE("compare emits aligned tables for a shared instance") {
    auto e1 = parse_experiment(config_file::parse_string(kAffineConfig));
    e1.label = "alg1";
    auto e2 = e1;
    e2.algorithm = algorithm_kind::mpsa;
    e2.label = "mpsa";
    temp_dir dir("svi_cmp");
    auto summaries = compare_experiments({e1, e2}, (dir.path / "out").string(), true);
    CHECK(summaries.size() == 2);
    const std::string iter_csv = slurp(dir.path / "out" / "compare_iter.csv");
    CHECK(iter_csv.find("k,vrf_alg1,vrf_mpsa") == 0);
    CHECK(fs::exists(dir.path / "out" / "compare_time.csv"));
  }
}
