#ifndef SVI_SOLVERS_HPP
#define SVI_SOLVERS_HPP

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "svi/bregman.hpp"
#include "svi/error.hpp"
#include "svi/metrics.hpp"
#include "svi/oracle.hpp"
#include "svi/sets.hpp"
#include "svi/trace.hpp"
#include "svi/vec.hpp"

namespace svi {

// ---------------------------------------------------------------------------
// Stochastic Bregman extragradient with line search.

struct algorithm1_config {
  double gamma0 = 0.99;
  double theta = 0.01;
  double alpha = 2.0;
  sample_schedule schedule = sample_schedule::power08();
  long long max_iterations = 1000;
  int linesearch_cap = 100;
  int regen_cap = 5;
  double fixed_point_tol = 0.0;
  double prox_tol = 1e-8;
  std::uint64_t seed = 0;
  std::optional<double> lipschitz_hint;

  void validate() const {
    require(gamma0 > 0 && gamma0 < 1, errc::invalid_parameter, "gamma0 must be in (0,1)");
    require(theta > 0 && theta < 1, errc::invalid_parameter, "theta must be in (0,1)");
    require(alpha > 0, errc::invalid_parameter, "alpha must be positive");
    require(max_iterations >= 1, errc::invalid_parameter, "max_iterations must be >= 1");
    require(linesearch_cap >= 1 && regen_cap >= 0, errc::invalid_parameter, "caps");
    require(fixed_point_tol >= 0 && prox_tol > 0, errc::invalid_parameter, "tolerances");
    schedule.validate();
    if (lipschitz_hint) {
      // The cap must never truncate a search the stepsize bound allows.
      const double need =
          std::log(gamma0 * std::sqrt(2.0) * *lipschitz_hint / (alpha * theta)) /
          std::log(1.0 / theta);
      require(static_cast<double>(linesearch_cap) >= std::ceil(need), errc::invalid_parameter,
              "linesearch_cap below the Lipschitz-implied bound");
    }
  }
};

struct solver_state {
  vec x;
  vec x_half;
  double gamma = 0.0;
  long long l = 0;
  long long n_batch = 0;
  long long k = 0;
  sample_stream stream;
  bool converged = false;
};

inline solver_state make_state(vec x0, std::uint64_t seed) {
  solver_state s;
  s.x = std::move(x0);
  s.x_half = s.x;
  s.stream = make_stream(seed);
  return s;
}

struct step1_result {
  bool converged = false;
  vec f_hat;          // batch mean carried to step 2 (empty when converged)
  double residual = 0.0;  // ||x_k - P_X(x_k, theta^-1 gamma0 f_hat)||, the VRF
  int regenerations = 0;
};

/// Step 1: batch mean plus the fixed-point test at scale theta^-1 gamma0.
/// Regenerates up to regen_cap times; a Converged verdict is confirmed with
/// a 10x batch before it is reported.
inline step1_result step1_check(solver_state& state, const stochastic_oracle& oracle,
                                const feasible_set& set, const distance_generator& gen,
                                const algorithm1_config& cfg) {
  const long long n = state.n_batch;
  const double a = cfg.gamma0 / cfg.theta;
  step1_result out;
  for (int regen = 0;; ++regen) {
    auto [batch, advanced] = draw_batch(state.stream, n);
    state.stream = advanced;
    vec f_hat = batch_mean(oracle, state.x, batch);
    vec p = prox_map(gen, set, state.x, scaled(f_hat, a), cfg.prox_tol);
    const double res = dist2(state.x, p);
    out.residual = res;
    out.regenerations = regen;
    if (res > cfg.fixed_point_tol) {
      out.f_hat = std::move(f_hat);
      return out;
    }
    if (regen >= cfg.regen_cap) {
      auto [cbatch, cadv] = draw_batch(state.stream, 10 * n);
      state.stream = cadv;
      vec f_conf = batch_mean(oracle, state.x, cbatch);
      vec pc = prox_map(gen, set, state.x, scaled(f_conf, a), cfg.prox_tol);
      const double res_conf = dist2(state.x, pc);
      if (res_conf <= cfg.fixed_point_tol) {
        out.converged = true;
        out.residual = res_conf;
        return out;
      }
      out.f_hat = std::move(f_conf);
      out.residual = res_conf;
      return out;
    }
  }
}

struct line_search_trial {
  double gamma = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct line_search_result {
  double gamma = 0.0;
  long long l = 0;
  vec x_half;
  vec f_half;
  std::vector<line_search_trial> trials;
};

/// Step 2: one fresh batch, reused across all gamma trials; accepts the
/// largest gamma0 theta^l satisfying
///   gamma^2 ||F1 - F2(gamma)||^2 <= alpha V(x, x_half(gamma)) + 10 prox_tol.
inline line_search_result line_search(solver_state& state, const vec& f_hat,
                                      const stochastic_oracle& oracle,
                                      const distance_generator& gen, const feasible_set& set,
                                      const algorithm1_config& cfg) {
  auto [batch, advanced] = draw_batch(state.stream, state.n_batch);
  state.stream = advanced;

  line_search_result out;
  const double slack = 10.0 * cfg.prox_tol;
  for (int l = 0; l <= cfg.linesearch_cap; ++l) {
    const double gamma = cfg.gamma0 * std::pow(cfg.theta, l);
    vec x_half = prox_map(gen, set, state.x, scaled(f_hat, gamma), cfg.prox_tol);
    vec f_half = batch_mean(oracle, x_half, batch);
    double diff2 = 0.0;
    for (std::size_t i = 0; i < f_hat.size(); ++i) {
      const double d = f_hat[i] - f_half[i];
      diff2 += d * d;
    }
    const double lhs = gamma * gamma * diff2;
    const double rhs = cfg.alpha * bregman_value(gen, state.x, x_half) + slack;
    out.trials.push_back({gamma, lhs, rhs});
    if (lhs <= rhs) {
      out.gamma = gamma;
      out.l = l;
      out.x_half = std::move(x_half);
      out.f_half = std::move(f_half);
      return out;
    }
  }
  fail(errc::line_search_exhausted,
       "line search exhausted at iteration " + std::to_string(state.k));
}

struct iterate_result {
  step1_result step1;
  line_search_result search;
};

/// One full iteration: Step 1 (batch + fixed-point check), Step 2 (line
/// search), Step 3 (extragradient update reusing the accepted batch mean).
inline iterate_result algorithm1_iterate(solver_state& state, const stochastic_oracle& oracle,
                                         const distance_generator& gen, const feasible_set& set,
                                         const algorithm1_config& cfg) {
  state.n_batch = cfg.schedule.at(state.k);
  iterate_result out;
  out.step1 = step1_check(state, oracle, set, gen, cfg);
  if (out.step1.converged) {
    state.converged = true;
    return out;
  }
  out.search = line_search(state, out.step1.f_hat, oracle, gen, set, cfg);
  state.x_half = out.search.x_half;
  state.gamma = out.search.gamma;
  state.l = out.search.l;
  state.x = prox_map(gen, set, state.x, scaled(out.search.f_half, out.search.gamma), cfg.prox_tol);
  state.k += 1;
  return out;
}

// ---------------------------------------------------------------------------
// Shared per-iteration instrumentation.

struct trace_options {
  vec x0;                        // empty: set.some_point()
  bool record_gap = true;        // honored when the set is bounded and F exact
  std::optional<vec> reference;  // enables rel_error
  double vrf_a = 99.0;           // residual scale theta^-1 gamma0 used for VRF
};

namespace detail {

class iteration_clock {
 public:
  iteration_clock() : t0_(std::chrono::steady_clock::now()) {}
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point t0_;
};

inline void fill_metrics(iteration_record& rec, const vec& x, const stochastic_oracle& oracle,
                         const distance_generator& gen, const feasible_set& set,
                         const trace_options& opts, double prox_tol) {
  if (oracle.has_mean()) {
    vec fx = oracle.mean(x);
    rec.nat_residual = natural_residual(x, fx, 1.0, gen, set, prox_tol);
    if (opts.record_gap && set.bounded()) rec.gap = gap_function(x, fx, set);
  }
  if (opts.reference) {
    const double den = norm2(*opts.reference);
    rec.rel_error = den > 0 ? dist2(x, *opts.reference) / den : dist2(x, *opts.reference);
  }
}

}  // namespace detail

inline run_trace run_algorithm1(const stochastic_oracle& oracle, const feasible_set& set,
                                const distance_generator& gen, const algorithm1_config& cfg,
                                const trace_options& opts = {}) {
  cfg.validate();
  vec x0 = opts.x0.empty() ? set.some_point() : opts.x0;
  require(static_cast<int>(x0.size()) == set.dim(), errc::dimension_mismatch, "x0 dimension");
  solver_state state = make_state(std::move(x0), cfg.seed);

  trace_options o = opts;
  o.vrf_a = cfg.gamma0 / cfg.theta;

  run_trace trace;
  trace.records.reserve(static_cast<std::size_t>(cfg.max_iterations));
  detail::iteration_clock clock;
  for (long long k = 0; k < cfg.max_iterations; ++k) {
    const vec x_at_k = state.x;
    iterate_result it = algorithm1_iterate(state, oracle, gen, set, cfg);

    iteration_record rec;
    rec.k = k;
    rec.n_batch = state.n_batch;
    rec.oracle_calls_cum = state.stream.calls;
    rec.vrf = it.step1.residual;
    rec.regen = it.step1.regenerations;
    detail::fill_metrics(rec, x_at_k, oracle, gen, set, o, cfg.prox_tol);
    if (state.converged) {
      rec.wall_ms = clock.elapsed_ms();
      trace.records.push_back(rec);
      trace.converged = true;
      break;
    }
    rec.gamma = state.gamma;
    rec.l = state.l;
    rec.wall_ms = clock.elapsed_ms();
    trace.records.push_back(rec);
  }
  trace.total_calls = state.stream.calls;
  trace.final_x = state.x;
  trace.wall_ms_total = clock.elapsed_ms();
  return trace;
}

// ---------------------------------------------------------------------------
// Mirror-prox stochastic approximation (single sample, vanishing steps).

struct mpsa_config {
  double gamma0 = 0.99;
  long long max_iterations = 1000;
  double prox_tol = 1e-8;
  std::uint64_t seed = 0;
  double vrf_gamma0 = 0.99;  // reporting scale, matched to Algorithm 1
  double vrf_theta = 0.01;
};

/// gamma0/k steps with the k = 0 term taken as gamma0/(k+1).
inline double mpsa_gamma(double gamma0, long long k) {
  return gamma0 / static_cast<double>(k + 1);
}

inline void mpsa_iterate(solver_state& state, const stochastic_oracle& oracle,
                         const distance_generator& gen, const feasible_set& set, double gamma,
                         double prox_tol) {
  auto [b1, s1] = draw_batch(state.stream, 1);
  state.stream = s1;
  vec f1 = batch_mean(oracle, state.x, b1);
  state.x_half = prox_map(gen, set, state.x, scaled(f1, gamma), prox_tol);
  auto [b2, s2] = draw_batch(state.stream, 1);
  state.stream = s2;
  vec f2 = batch_mean(oracle, state.x_half, b2);
  state.x = prox_map(gen, set, state.x, scaled(f2, gamma), prox_tol);
  state.gamma = gamma;
  state.n_batch = 1;
  state.k += 1;
}

inline run_trace run_mpsa(const stochastic_oracle& oracle, const feasible_set& set,
                          const distance_generator& gen, const mpsa_config& cfg,
                          const trace_options& opts = {}) {
  vec x0 = opts.x0.empty() ? set.some_point() : opts.x0;
  solver_state state = make_state(std::move(x0), cfg.seed);
  trace_options o = opts;
  o.vrf_a = cfg.vrf_gamma0 / cfg.vrf_theta;

  run_trace trace;
  detail::iteration_clock clock;
  for (long long k = 0; k < cfg.max_iterations; ++k) {
    const vec x_at_k = state.x;
    // VRF reuses the same single sample the update consumes.
    auto [b1, s1] = draw_batch(state.stream, 1);
    vec f1 = batch_mean(oracle, state.x, b1);
    const double gamma = mpsa_gamma(cfg.gamma0, k);
    vec p = prox_map(gen, set, state.x, scaled(f1, o.vrf_a), cfg.prox_tol);

    iteration_record rec;
    rec.k = k;
    rec.vrf = dist2(state.x, p);
    state.stream = s1;
    state.x_half = prox_map(gen, set, state.x, scaled(f1, gamma), cfg.prox_tol);
    auto [b2, s2] = draw_batch(state.stream, 1);
    state.stream = s2;
    vec f2 = batch_mean(oracle, state.x_half, b2);
    state.x = prox_map(gen, set, state.x, scaled(f2, gamma), cfg.prox_tol);
    state.gamma = gamma;
    state.k += 1;

    rec.gamma = gamma;
    rec.n_batch = 1;
    rec.oracle_calls_cum = state.stream.calls;
    detail::fill_metrics(rec, x_at_k, oracle, gen, set, o, cfg.prox_tol);
    rec.wall_ms = clock.elapsed_ms();
    trace.records.push_back(rec);
  }
  trace.total_calls = state.stream.calls;
  trace.final_x = state.x;
  trace.wall_ms_total = clock.elapsed_ms();
  return trace;
}

// ---------------------------------------------------------------------------
// Variance-based extragradient with line search (Euclidean projections).

struct egls_config {
  double gamma0 = 0.99;
  double theta = 0.01;
  double mu = 0.3;  // must stay below 1/(2 sqrt 2)
  sample_schedule schedule = sample_schedule::power08();
  long long max_iterations = 1000;
  int linesearch_cap = 100;
  double prox_tol = 1e-8;
  std::uint64_t seed = 0;

  void validate() const {
    require(gamma0 > 0 && gamma0 < 1 && theta > 0 && theta < 1, errc::invalid_parameter,
            "egls gamma0/theta");
    require(mu > 0 && mu < 0.35355339059327373, errc::invalid_parameter,
            "egls mu must be in (0, 1/(2 sqrt 2))");
    schedule.validate();
  }
};

struct egls_step {
  double gamma = 0.0;
  long long l = 0;
};

/// One iteration of the Euclidean line-search extragradient: the search
/// reuses the Step-1 batch, the final update draws a fresh one.
inline egls_step egls_iterate(solver_state& state, const stochastic_oracle& oracle,
                              const feasible_set& set, const egls_config& cfg,
                              double* vrf_out = nullptr, double vrf_a = 99.0) {
  const long long n = cfg.schedule.at(state.k);
  state.n_batch = n;
  auto [b1, s1] = draw_batch(state.stream, n);
  state.stream = s1;
  vec f1 = batch_mean(oracle, state.x, b1);
  if (vrf_out) {
    vec p = set.project(sub(state.x, scaled(f1, vrf_a)), cfg.prox_tol);
    *vrf_out = dist2(state.x, p);
  }

  egls_step out;
  bool accepted = false;
  for (int l = 0; l <= cfg.linesearch_cap; ++l) {
    const double gamma = cfg.gamma0 * std::pow(cfg.theta, l);
    vec x_half = set.project(sub(state.x, scaled(f1, gamma)), cfg.prox_tol);
    vec f_trial = batch_mean(oracle, x_half, b1);  // same batch as written
    const double lhs = gamma * norm2(sub(f1, f_trial));
    const double rhs = cfg.mu * dist2(state.x, x_half) + 10.0 * cfg.prox_tol;
    if (lhs <= rhs) {
      out.gamma = gamma;
      out.l = l;
      state.x_half = std::move(x_half);
      accepted = true;
      break;
    }
  }
  if (!accepted)
    fail(errc::line_search_exhausted,
         "EGLS line search exhausted at iteration " + std::to_string(state.k));

  auto [b2, s2] = draw_batch(state.stream, n);
  state.stream = s2;
  vec f2 = batch_mean(oracle, state.x_half, b2);
  state.x = set.project(sub(state.x, scaled(f2, out.gamma)), cfg.prox_tol);
  state.gamma = out.gamma;
  state.l = out.l;
  state.k += 1;
  return out;
}

inline run_trace run_egls(const stochastic_oracle& oracle, const feasible_set& set,
                          const egls_config& cfg, const trace_options& opts = {}) {
  cfg.validate();
  vec x0 = opts.x0.empty() ? set.some_point() : opts.x0;
  solver_state state = make_state(std::move(x0), cfg.seed);
  trace_options o = opts;
  o.vrf_a = cfg.gamma0 / cfg.theta;
  const distance_generator euclid = distance_generator::euclidean(1.0);

  run_trace trace;
  detail::iteration_clock clock;
  for (long long k = 0; k < cfg.max_iterations; ++k) {
    const vec x_at_k = state.x;
    iteration_record rec;
    rec.k = k;
    egls_step st = egls_iterate(state, oracle, set, cfg, &rec.vrf, o.vrf_a);
    rec.gamma = st.gamma;
    rec.l = st.l;
    rec.n_batch = state.n_batch;
    rec.oracle_calls_cum = state.stream.calls;
    detail::fill_metrics(rec, x_at_k, oracle, euclid, set, o, cfg.prox_tol);
    rec.wall_ms = clock.elapsed_ms();
    trace.records.push_back(rec);
  }
  trace.total_calls = state.stream.calls;
  trace.final_x = state.x;
  trace.wall_ms_total = clock.elapsed_ms();
  return trace;
}

// ---------------------------------------------------------------------------
// Deterministic Bregman extragradient on the exact mean operator; used to
// produce high-accuracy reference solutions.

struct deterministic_trace {
  vec x;
  double residual = 0.0;
  long long iterations = 0;
  std::vector<double> residuals;
};

inline deterministic_trace deterministic_extragradient(
    const vec& x0, const std::function<void(cspan, vec&)>& F, const distance_generator& gen,
    const feasible_set& set, double gamma, long long max_iterations, double stop_residual = 0.0,
    double prox_tol = 1e-12) {
  deterministic_trace out;
  out.x = x0;
  vec fx, fh;
  for (long long k = 0; k < max_iterations; ++k) {
    F(out.x, fx);
    vec p = prox_map(gen, set, out.x, scaled(fx, gamma), prox_tol);
    out.residual = dist2(out.x, p);
    out.residuals.push_back(out.residual);
    out.iterations = k;
    if (out.residual <= stop_residual) return out;
    F(p, fh);
    out.x = prox_map(gen, set, out.x, scaled(fh, gamma), prox_tol);
  }
  F(out.x, fx);
  vec p = prox_map(gen, set, out.x, scaled(fx, gamma), prox_tol);
  out.residual = dist2(out.x, p);
  out.iterations = max_iterations;
  return out;
}

}  // namespace svi

#endif  // SVI_SOLVERS_HPP
