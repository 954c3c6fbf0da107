// Benchmark harness for the stochastic variational inequality solvers:
// configure problem/algorithm/geometry/schedule in a config file, run
// single paths or multi-seed experiments, and emit CSV traces and summaries.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "svi/bench.hpp"
#include "svi/bregman.hpp"
#include "svi/metrics.hpp"
#include "svi/problems.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

int classify(const svi::error& e) {
  switch (e.kind()) {
    case svi::errc::invalid_parameter:
    case svi::errc::io_error:
    case svi::errc::incompatible_configs:
      return kExitConfig;
    default:
      return kExitSolver;
  }
}

int cmd_solve(const std::string& config_path, std::uint64_t seed, const std::string& out,
              bool quiet) {
  auto cfg = svi::parse_experiment(svi::config_file::parse_file(config_path));
  cfg.paths = 1;
  cfg.base_seed = seed;
  auto res = svi::run_experiment(cfg, out, quiet);
  return res.summary.failed_paths == 0 ? kExitOk : kExitSolver;
}

int cmd_bench(const std::string& config_path, int paths_override, std::uint64_t seed_override,
              bool have_seed, const std::string& out, bool quiet) {
  auto cfg = svi::parse_experiment(svi::config_file::parse_file(config_path));
  if (paths_override > 0) cfg.paths = paths_override;
  if (have_seed) cfg.base_seed = seed_override;
  auto res = svi::run_experiment(cfg, out, quiet);
  if (res.summary.failed_paths == res.summary.paths) return kExitSolver;
  return kExitOk;
}

int cmd_compare(const std::vector<std::string>& config_paths, const std::string& out, bool quiet) {
  std::vector<svi::experiment_config> cfgs;
  for (const auto& p : config_paths)
    cfgs.push_back(svi::parse_experiment(svi::config_file::parse_file(p)));
  auto summaries = svi::compare_experiments(cfgs, out, quiet);
  for (const auto& s : summaries)
    if (s.failed_paths == s.paths) return kExitSolver;
  return kExitOk;
}

// Quick property suites; each line reports one suite.
int cmd_validate(bool quiet) {
  using namespace svi;
  int failures = 0;
  auto report = [&](const char* name, bool ok) {
    if (!ok) ++failures;
    if (!quiet || !ok) std::cout << (ok ? "ok   " : "FAIL ") << name << "\n";
  };

  {  // Bregman lower bound with the declared modulus
    bool ok = true;
    const sample_key key{detail::mix64(2024)};
    std::uint64_t slot = 0;
    auto gens = {distance_generator::euclidean(2.0),
                 distance_generator::shifted_entropy(2.0, 0.01, 1.0),
                 distance_generator::p_norm(4, 2.0, 1.0)};
    for (const auto& g : gens) {
      for (int t = 0; t < 300 && ok; ++t) {
        vec x(4), z(4);
        for (int i = 0; i < 4; ++i) {
          x[i] = key.uniform(slot++, 0.01, 1.0);
          z[i] = key.uniform(slot++, 0.01, 1.0);
        }
        const double v = bregman_value(g, x, z);
        const double lb = 0.5 * g.alpha() * norm2_sq(sub(x, z));
        ok = ok && v >= lb - 1e-10;
      }
    }
    report("bregman strong-convexity bound", ok);
  }

  {  // closed-form proxes against a fine grid
    bool ok = true;
    auto gen = distance_generator::euclidean(1.0);
    auto box = feasible_set::cube(2, 0.0, 2.0);
    vec x{1.0, 1.0}, r{3.0, -3.0};
    vec p = prox_map(gen, box, x, r, 1e-10);
    ok = ok && dist2(p, vec{0.0, 2.0}) < 1e-12;

    auto ent = distance_generator::shifted_entropy_unit(0.0, 1.0);
    auto simplex = feasible_set::simplex(2, 1.0);
    vec xs{0.5, 0.5}, rs{std::log(2.0), 0.0};
    vec ps = prox_map(ent, simplex, xs, rs, 1e-10);
    ok = ok && std::fabs(ps[0] - 1.0 / 3.0) < 1e-10 && std::fabs(ps[1] - 2.0 / 3.0) < 1e-10;
    report("prox closed forms", ok);
  }

  {  // prox optimality via the three-point inequality
    bool ok = true;
    auto gen = distance_generator::p_norm(3, 2.0, 1.0);
    auto simplex = feasible_set::simplex(3, 1.0);
    const sample_key key{detail::mix64(7)};
    vec x{0.2, 0.3, 0.5}, r{0.4, -0.2, 0.1};
    const double tol = 1e-9;
    vec u_star = prox_map(gen, simplex, x, r, tol);
    const double lhs = dot(r, u_star) + bregman_value(gen, x, u_star);
    for (int t = 0; t < 100 && ok; ++t) {
      vec u(3);
      for (int i = 0; i < 3; ++i) u[i] = key.uniform(t * 3 + i, 0.0, 1.0);
      u = simplex.project(u, 1e-12);
      ok = ok && lhs + bregman_value(gen, u_star, u) <= dot(r, u) + bregman_value(gen, x, u) +
                                                            10 * tol + 1e-9;
    }
    report("generic prox optimality", ok);
  }

  {  // schedules
    bool ok = sample_schedule::power32(1.0).at(0) == 1;
    ok = ok && sample_schedule::power08().at(999) == 252;
    ok = ok && sample_schedule::log_power(1, 2.05, 1e-4).at(0) == 2;
    auto sch = sample_schedule::power08(2);
    for (long long k = 1; k < 2000 && ok; ++k) ok = sch.at(k) >= sch.at(k - 1);
    report("sample schedules", ok);
  }

  {  // bitwise reproducibility of a short stochastic run
    affine_problem_options o;
    o.n = 5;
    o.noise = 0.5;
    auto p = make_affine(o, 3);
    experiment_config e;
    e.iterations = 25;
    e.a1.max_iterations = 25;
    e.a1.schedule = sample_schedule::constant(4);
    e.a1.seed = 11;
    auto gen = distance_generator::euclidean(2.0);
    trace_options opts;
    opts.x0 = p.start;
    opts.reference = p.reference;
    auto t1 = run_algorithm1(p.oracle, p.set, gen, e.a1, opts);
    auto t2 = run_algorithm1(p.oracle, p.set, gen, e.a1, opts);
    bool ok = t1.records.size() == t2.records.size() && t1.final_x == t2.final_x;
    for (std::size_t i = 0; ok && i < t1.records.size(); ++i)
      ok = t1.records[i].vrf == t2.records[i].vrf &&
           t1.records[i].nat_residual == t2.records[i].nat_residual;
    report("seeded reproducibility", ok);
  }

  if (failures == 0 && !quiet) std::cout << "all validation suites passed\n";
  return failures == 0 ? kExitOk : kExitSolver;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"benchmark harness for stochastic variational inequality solvers"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "results";
  std::uint64_t seed = 0;
  int paths = 0;
  bool quiet = false;
  std::vector<std::string> config_paths;

  auto* solve = app.add_subcommand("solve", "run one config for a single path");
  solve->add_option("--config", config_path, "experiment config file")->required();
  solve->add_option("--seed", seed, "path seed (default 0)");
  solve->add_option("--out", out_dir, "output directory");
  solve->add_flag("--quiet", quiet, "suppress progress output");

  auto* bench = app.add_subcommand("bench", "run a multi-path experiment");
  bench->add_option("--config", config_path, "experiment config file")->required();
  auto* seed_opt = bench->add_option("--seed", seed, "override base seed");
  bench->add_option("--paths", paths, "override the number of sample paths");
  bench->add_option("--out", out_dir, "output directory");
  bench->add_flag("--quiet", quiet, "suppress progress output");

  auto* compare = app.add_subcommand("compare", "compare configs on one problem instance");
  compare->add_option("--config", config_paths, "config files (repeatable)")
      ->required()
      ->expected(-2);
  compare->add_option("--out", out_dir, "output directory");
  compare->add_flag("--quiet", quiet, "suppress progress output");

  auto* validate = app.add_subcommand("validate", "run the property suites");
  validate->add_flag("--quiet", quiet, "only report failures");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(solve)) return cmd_solve(config_path, seed, out_dir, quiet);
    if (app.got_subcommand(bench))
      return cmd_bench(config_path, paths, seed, seed_opt->count() > 0, out_dir, quiet);
    if (app.got_subcommand(compare)) return cmd_compare(config_paths, out_dir, quiet);
    if (app.got_subcommand(validate)) return cmd_validate(quiet);
  } catch (const svi::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return classify(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitOk;
}
