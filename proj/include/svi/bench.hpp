#ifndef SVI_BENCH_HPP
#define SVI_BENCH_HPP

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "svi/config.hpp"
#include "svi/metrics.hpp"
#include "svi/problems.hpp"
#include "svi/solvers.hpp"
#include "svi/trace.hpp"

namespace svi {

inline run_trace run_single(const experiment_config& e, const problem_instance& p,
                            const distance_generator& gen, std::uint64_t seed) {
  trace_options opts;
  opts.x0 = p.start;
  opts.record_gap = e.record_gap;
  opts.reference = p.reference;

  switch (e.algorithm) {
    case algorithm_kind::algorithm1: {
      algorithm1_config cfg = e.a1;
      cfg.seed = seed;
      return run_algorithm1(p.oracle, p.set, gen, cfg, opts);
    }
    case algorithm_kind::egls: {
      egls_config cfg = e.egls;
      cfg.seed = seed;
      return run_egls(p.oracle, p.set, cfg, opts);
    }
    case algorithm_kind::mpsa: {
      mpsa_config cfg = e.mpsa;
      cfg.seed = seed;
      return run_mpsa(p.oracle, p.set, gen, cfg, opts);
    }
    case algorithm_kind::deterministic_eg: {
      require(p.oracle.has_mean(), errc::invalid_parameter,
              "deterministic runs need an exact mean operator");
      auto det = deterministic_extragradient(p.start, p.oracle.mean_eval, gen, p.set, e.det_gamma,
                                             e.iterations, 0.0, e.a1.prox_tol);
      run_trace t;
      const double vrf_a = e.a1.gamma0 / e.a1.theta;
      vec x = p.start;
      detail::iteration_clock clock;
      for (long long k = 0; k < static_cast<long long>(det.residuals.size()); ++k) {
        iteration_record rec;
        rec.k = k;
        rec.gamma = e.det_gamma;
        rec.n_batch = 0;
        rec.oracle_calls_cum = 0;
        rec.nat_residual = det.residuals[static_cast<std::size_t>(k)];
        vec fx = p.oracle.mean(x);
        vec pr = prox_map(gen, p.set, x, scaled(fx, vrf_a), e.a1.prox_tol);
        rec.vrf = dist2(x, pr);
        if (opts.record_gap && p.set.bounded()) rec.gap = gap_function(x, fx, p.set);
        if (p.reference) rec.rel_error = dist2(x, *p.reference) / norm2(*p.reference);
        rec.wall_ms = clock.elapsed_ms();
        t.records.push_back(rec);
        // replay one extragradient step to keep x aligned with residuals
        vec xh = prox_map(gen, p.set, x, scaled(fx, e.det_gamma), e.a1.prox_tol);
        vec fh = p.oracle.mean(xh);
        x = prox_map(gen, p.set, x, scaled(fh, e.det_gamma), e.a1.prox_tol);
      }
      t.final_x = det.x;
      t.wall_ms_total = clock.elapsed_ms();
      return t;
    }
  }
  fail(errc::invalid_parameter, "unknown algorithm");
}

// ---------------------------------------------------------------------------

struct experiment_summary {
  std::string problem;
  int n = 0;
  long long iterations = 0;
  std::string algorithm;
  std::string geometry;
  int paths = 0;
  int failed_paths = 0;
  double final_vrf = 0.0;
  double final_nat_residual = 0.0;
  std::optional<double> rel_error;
  long long total_oracle_calls = 0;
  double total_wall_ms = 0.0;
  std::optional<double> rate_slope;
};

struct experiment_result {
  experiment_summary summary;
  std::vector<run_trace> traces;  // empty slots for failed paths
  std::vector<std::string> failures;
};

namespace detail {

inline const char* algorithm_name(algorithm_kind k) {
  switch (k) {
    case algorithm_kind::algorithm1: return "algorithm1";
    case algorithm_kind::egls: return "egls";
    case algorithm_kind::mpsa: return "mpsa";
    case algorithm_kind::deterministic_eg: return "deterministic";
  }
  return "?";
}

inline void write_mean_trace(const std::string& path, const std::vector<run_trace>& traces) {
  std::size_t max_len = 0;
  for (const auto& t : traces) max_len = std::max(max_len, t.records.size());
  std::ofstream f(path);
  require(f.good(), errc::io_error, "cannot open " + path);
  f << trace_header() << '\n';
  for (std::size_t k = 0; k < max_len; ++k) {
    double cnt = 0, gamma = 0, l = 0, nb = 0, calls = 0, vrf = 0, nat = 0, wall = 0;
    double gap = 0, rel = 0;
    int gap_cnt = 0, rel_cnt = 0;
    for (const auto& t : traces) {
      if (k >= t.records.size()) continue;
      const auto& r = t.records[k];
      cnt += 1;
      gamma += r.gamma;
      l += static_cast<double>(r.l);
      nb += static_cast<double>(r.n_batch);
      calls += static_cast<double>(r.oracle_calls_cum);
      vrf += r.vrf;
      nat += r.nat_residual;
      wall += r.wall_ms;
      if (r.gap) {
        gap += *r.gap;
        ++gap_cnt;
      }
      if (r.rel_error) {
        rel += *r.rel_error;
        ++rel_cnt;
      }
    }
    if (cnt == 0) continue;
    f << k << ',' << fmt_full(gamma / cnt) << ',' << fmt_full(l / cnt) << ',' << fmt_full(nb / cnt)
      << ',' << fmt_full(calls / cnt) << ',' << fmt_full(vrf / cnt) << ',' << fmt_full(nat / cnt)
      << ',';
    if (gap_cnt > 0) f << fmt_full(gap / gap_cnt);
    f << ',';
    if (rel_cnt > 0) f << fmt_full(rel / rel_cnt);
    f << ',' << fmt_full(wall / cnt) << '\n';
  }
}

inline std::optional<double> summary_slope(const std::vector<run_trace>& traces) {
  // Running minimum of the squared natural residual, averaged across paths.
  std::size_t len = std::numeric_limits<std::size_t>::max();
  int alive = 0;
  for (const auto& t : traces)
    if (!t.records.empty()) {
      len = std::min(len, t.records.size());
      ++alive;
    }
  if (alive == 0 || len < 10 || len == std::numeric_limits<std::size_t>::max())
    return std::nullopt;
  std::vector<std::pair<long long, double>> pts;
  for (std::size_t k = 0; k < len; ++k) {
    double s = 0;
    for (const auto& t : traces)
      if (!t.records.empty()) s += t.records[k].nat_residual * t.records[k].nat_residual;
    if (s <= 0) return std::nullopt;
    pts.emplace_back(static_cast<long long>(k), s / alive);
  }
  try {
    return fit_rate(running_min(pts), 1.0).slope;
  } catch (const error&) {
    return std::nullopt;
  }
}

inline std::string summary_header() {
  return "problem,n,K,algorithm,geometry,paths,failed_paths,final_vrf,final_nat_residual,"
         "rel_error,total_oracle_calls,total_wall_ms,rate_slope";
}

inline std::string summary_row(const experiment_summary& s) {
  std::string out = s.problem + ',' + std::to_string(s.n) + ',' + std::to_string(s.iterations) +
                    ',' + s.algorithm + ',' + s.geometry + ',' + std::to_string(s.paths) + ',' +
                    std::to_string(s.failed_paths) + ',' + fmt_full(s.final_vrf) + ',' +
                    fmt_full(s.final_nat_residual) + ',';
  if (s.rel_error) out += fmt_full(*s.rel_error);
  out += ',' + std::to_string(s.total_oracle_calls) + ',' + fmt_full(s.total_wall_ms) + ',';
  if (s.rate_slope) out += fmt_full(*s.rate_slope);
  return out;
}

}  // namespace detail

/// Runs `paths` independent sample paths with seeds base_seed .. base_seed +
/// paths - 1, persists per-path traces, the mean trace, a summary row and a
/// metadata file under out_dir.
inline experiment_result run_experiment(const experiment_config& e, const std::string& out_dir,
                                        bool quiet = false) {
  const problem_instance problem = build_problem(e);
  const distance_generator gen = build_geometry(e);

  experiment_result result;
  result.traces.resize(static_cast<std::size_t>(e.paths));
  std::vector<std::string> errors(static_cast<std::size_t>(e.paths));

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers = std::min<unsigned>(hw, static_cast<unsigned>(e.paths));
  auto work = [&](unsigned w) {
    for (int i = static_cast<int>(w); i < e.paths; i += static_cast<int>(workers)) {
      try {
        result.traces[static_cast<std::size_t>(i)] =
            run_single(e, problem, gen, e.base_seed + static_cast<std::uint64_t>(i));
      } catch (const std::exception& ex) {
        errors[static_cast<std::size_t>(i)] = ex.what();
      }
    }
  };
  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }

  experiment_summary& s = result.summary;
  s.problem = problem.name;
  s.n = problem.dim;
  s.iterations = e.iterations;
  s.algorithm = detail::algorithm_name(e.algorithm);
  s.geometry = e.geometry_kind;
  s.paths = e.paths;

  double vrf = 0, nat = 0, rel = 0, wall = 0;
  int rel_cnt = 0, alive = 0;
  for (int i = 0; i < e.paths; ++i) {
    const auto& t = result.traces[static_cast<std::size_t>(i)];
    if (!errors[static_cast<std::size_t>(i)].empty() || t.records.empty()) {
      ++s.failed_paths;
      result.failures.push_back("path " + std::to_string(i) + ": " +
                                errors[static_cast<std::size_t>(i)]);
      continue;
    }
    ++alive;
    vrf += t.records.back().vrf;
    nat += t.records.back().nat_residual;
    wall += t.wall_ms_total;
    s.total_oracle_calls += t.total_calls;
    if (problem.reference) {
      rel += dist2(t.final_x, *problem.reference) / norm2(*problem.reference);
      ++rel_cnt;
    }
  }
  if (alive > 0) {
    s.final_vrf = vrf / alive;
    s.final_nat_residual = nat / alive;
    s.total_wall_ms = wall;
    if (rel_cnt > 0) s.rel_error = rel / rel_cnt;
    s.rate_slope = detail::summary_slope(result.traces);
  }

  if (!out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const std::string label = e.label.empty() ? s.algorithm : e.label;
    std::vector<std::string> files;
    for (int i = 0; i < e.paths; ++i) {
      if (result.traces[static_cast<std::size_t>(i)].records.empty()) continue;
      const std::string f = out_dir + "/" + label + "_path" + std::to_string(i) + ".csv";
      write_trace_csv(f, result.traces[static_cast<std::size_t>(i)]);
      files.push_back(f);
    }
    const std::string mean_file = out_dir + "/" + label + "_mean.csv";
    detail::write_mean_trace(mean_file, result.traces);
    files.push_back(mean_file);

    const std::string sum_file = out_dir + "/summary.csv";
    const bool fresh = !fs::exists(sum_file);
    std::ofstream sf(sum_file, std::ios::app);
    if (fresh) sf << detail::summary_header() << '\n';
    sf << detail::summary_row(s) << '\n';

    nlohmann::json meta;
    meta["problem"] = problem.name;
    meta["dimension"] = problem.dim;
    meta["fingerprint"] = problem.fingerprint;
    meta["instance_seed"] = problem.instance_seed;
    meta["instance_recipe"] = problem.recipe;
    meta["base_seed"] = e.base_seed;
    meta["paths"] = e.paths;
    meta["algorithm"] = s.algorithm;
    meta["geometry"] = e.geometry_kind;
    meta["failures"] = result.failures;
    meta["files"] = files;
    std::ofstream mf(out_dir + "/" + label + "_meta.json");
    mf << meta.dump(2) << '\n';
  }

  if (!quiet) {
    std::cout << s.problem << " n=" << s.n << " K=" << s.iterations << " " << s.algorithm
              << ": final vrf " << s.final_vrf << ", nat residual " << s.final_nat_residual;
    if (s.rel_error) std::cout << ", rel error " << *s.rel_error;
    std::cout << ", calls " << s.total_oracle_calls << ", failed " << s.failed_paths << "/"
              << s.paths << "\n";
  }
  return result;
}

/// Aligned VRF-vs-iteration and VRF-vs-time tables across configs sharing one
/// frozen problem instance.
inline std::vector<experiment_summary> compare_experiments(
    const std::vector<experiment_config>& configs, const std::string& out_dir,
    bool quiet = false) {
  require(configs.size() >= 2, errc::invalid_parameter, "compare needs at least two configs");
  std::uint64_t fp = 0;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const auto p = build_problem(configs[i]);
    if (i == 0)
      fp = p.fingerprint;
    else
      require(p.fingerprint == fp, errc::incompatible_configs,
              "compare configs must share the problem instance");
  }

  std::vector<experiment_summary> summaries;
  std::vector<std::vector<std::pair<double, double>>> curves;  // per config: (wall, vrf) by k
  std::vector<std::string> labels;
  for (const auto& cfg : configs) {
    auto res = run_experiment(cfg, out_dir, quiet);
    summaries.push_back(res.summary);
    labels.push_back(cfg.label.empty() ? detail::algorithm_name(cfg.algorithm) : cfg.label);
    std::vector<std::pair<double, double>> curve;
    std::size_t len = 0;
    for (const auto& t : res.traces) len = std::max(len, t.records.size());
    for (std::size_t k = 0; k < len; ++k) {
      double v = 0, w = 0;
      int cnt = 0;
      for (const auto& t : res.traces)
        if (k < t.records.size()) {
          v += t.records[k].vrf;
          w += t.records[k].wall_ms;
          ++cnt;
        }
      if (cnt > 0) curve.emplace_back(w / cnt, v / cnt);
    }
    curves.push_back(std::move(curve));
  }

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::size_t len = 0;
    for (const auto& c : curves) len = std::max(len, c.size());

    std::ofstream fi(out_dir + "/compare_iter.csv");
    fi << "k";
    for (const auto& l : labels) fi << ",vrf_" << l;
    fi << '\n';
    for (std::size_t k = 0; k < len; ++k) {
      fi << k;
      for (const auto& c : curves) {
        fi << ',';
        if (k < c.size()) fi << detail::fmt_full(c[k].second);
      }
      fi << '\n';
    }

    std::ofstream ft(out_dir + "/compare_time.csv");
    ft << "k";
    for (const auto& l : labels) ft << ",wall_ms_" << l << ",vrf_" << l;
    ft << '\n';
    for (std::size_t k = 0; k < len; ++k) {
      ft << k;
      for (const auto& c : curves) {
        ft << ',';
        if (k < c.size()) ft << detail::fmt_full(c[k].first);
        ft << ',';
        if (k < c.size()) ft << detail::fmt_full(c[k].second);
      }
      ft << '\n';
    }
  }
  return summaries;
}

}  // namespace svi

#endif  // SVI_BENCH_HPP
