#ifndef SVI_PROBLEMS_HPP
#define SVI_PROBLEMS_HPP

#include <cmath>
#include <cstdint>
#include <cstring>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "svi/error.hpp"
#include "svi/oracle.hpp"
#include "svi/rng.hpp"
#include "svi/sets.hpp"
#include "svi/solvers.hpp"
#include "svi/vec.hpp"

namespace svi {

struct problem_instance {
  std::string name;
  int dim = 0;
  stochastic_oracle oracle;
  feasible_set set;
  vec start;
  std::optional<vec> reference;
  std::optional<double> lipschitz;  // of the exact mean operator, when known
  std::uint64_t instance_seed = 0;
  std::uint64_t fingerprint = 0;
  std::string recipe;  // how the frozen instance data was generated
};

namespace detail {

// Frozen instance data comes from its own keyed streams so that run streams
// (which start at counter 0 of the run seed) can never overlap it.
inline sample_key field_key(std::uint64_t seed, std::uint64_t field) {
  return sample_key{mix64(seed ^ mix64(0xF1E1D0C0ULL + field))};
}

inline std::uint64_t hash_mix(std::uint64_t h, std::uint64_t v) {
  return mix64(h ^ (v + kGolden));
}

inline std::uint64_t hash_doubles(std::uint64_t h, cspan xs) {
  for (double x : xs) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(x));
    std::memcpy(&bits, &x, sizeof(bits));
    h = hash_mix(h, bits);
  }
  return h;
}

// Shared frozen data of the two fractional examples.
struct fractional_data {
  int n = 0;
  matrix UUT;       // U U'
  double fro_uut = 0.0;
  vec c, r;
  double t = 0.0;
  vec a_bar;        // c + 1/2 e, the mean of c + c_bar(xi)
  bool exponential_denominator = false;

  double psi(cspan x) const {
    const double u = dot(r, x) + t + 4.0 * n;
    if (!exponential_denominator) return u;
    return 1e4 * (std::exp((8.0 * n + 2.0) / 2000.0) - std::exp(u / 2000.0));
  }

  void grad_psi(cspan x, vec& out) const {
    if (!exponential_denominator) {
      out.assign(r.begin(), r.end());
      return;
    }
    const double u = dot(r, x) + t + 4.0 * n;
    const double s = -5.0 * std::exp(u / 2000.0);
    out.resize(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) out[i] = s * r[i];
  }
};

// Draws V(xi), c_bar(xi) and evaluates phi, grad phi in one pass.
inline void fractional_phi(const fractional_data& d, cspan x, sample_key key, double& phi,
                           vec& grad_phi) {
  const int n = d.n;
  vec vx(n, 0.0), vtx(n, 0.0);
  double fro2 = 0.0, xvx = 0.0;
  for (int i = 0; i < n; ++i) {
    double row_dot = 0.0;
    const std::uint64_t base = static_cast<std::uint64_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const double v = key.normal(base + j);
      fro2 += v * v;
      row_dot += v * x[j];
      vtx[j] += v * x[i];
    }
    vx[i] = row_dot;
    xvx += x[i] * row_dot;
  }
  const double kappa = d.fro_uut / std::sqrt(fro2);

  vec a(n);
  const std::uint64_t coff = static_cast<std::uint64_t>(n) * n;
  for (int i = 0; i < n; ++i) a[i] = d.c[i] + key.u01(coff + i);

  vec uutx;
  d.UUT.mul(x, uutx);
  const double ax = dot(a, x) + 4.0 * n;
  phi = 0.5 * (0.025 * dot(x, uutx) + 0.025 * kappa * xvx) + 0.5 * ax * ax;
  grad_phi.resize(n);
  for (int i = 0; i < n; ++i)
    grad_phi[i] = 0.025 * uutx[i] + 0.0125 * kappa * (vx[i] + vtx[i]) + ax * a[i];
}

/// phi(x,xi)/psi(x) for one sample; the independent scalar the gradient
/// oracle is differentiated against in tests.
inline double fractional_sample_value(const fractional_data& d, cspan x, sample_key key) {
  double phi;
  vec grad_phi;
  fractional_phi(d, x, key, phi, grad_phi);
  const double psi = d.psi(x);
  if (psi <= 0) fail(errc::oracle_failure, "fractional denominator not positive");
  return phi / psi;
}

inline void fractional_sample(const fractional_data& d, cspan x, sample_key key, vec& out) {
  const int n = d.n;
  double phi;
  vec grad_phi;
  fractional_phi(d, x, key, phi, grad_phi);
  const double psi = d.psi(x);
  if (psi <= 0) fail(errc::oracle_failure, "fractional denominator not positive");
  vec gpsi;
  d.grad_psi(x, gpsi);
  out.resize(n);
  const double inv2 = 1.0 / (psi * psi);
  for (int i = 0; i < n; ++i) out[i] = (grad_phi[i] * psi - phi * gpsi[i]) * inv2;
}

inline void fractional_mean(const fractional_data& d, cspan x, vec& out) {
  const int n = d.n;
  vec uutx;
  d.UUT.mul(x, uutx);
  const double ax = dot(d.a_bar, x) + 4.0 * n;
  const double ephi = 0.5 * 0.025 * dot(x, uutx) + 0.5 * (ax * ax + norm2_sq(x) / 12.0);
  vec egrad(n);
  for (int i = 0; i < n; ++i) egrad[i] = 0.025 * uutx[i] + ax * d.a_bar[i] + x[i] / 12.0;

  const double psi = d.psi(x);
  if (psi <= 0) fail(errc::oracle_failure, "fractional denominator not positive");
  vec gpsi;
  d.grad_psi(x, gpsi);
  out.resize(n);
  const double inv2 = 1.0 / (psi * psi);
  for (int i = 0; i < n; ++i) out[i] = (egrad[i] * psi - ephi * gpsi[i]) * inv2;
}

inline std::shared_ptr<const fractional_data> build_fractional_data(int n, std::uint64_t seed,
                                                                    bool exponential) {
  require(n >= 3, errc::invalid_parameter, "fractional problems need n > 2");
  auto d = std::make_shared<fractional_data>();
  d->n = n;
  d->exponential_denominator = exponential;

  const sample_key ku = field_key(seed, 1);
  matrix U(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) U(i, j) = ku.normal(static_cast<std::uint64_t>(i) * n + j);
  d->UUT = matrix(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += U(i, k) * U(j, k);
      d->UUT(i, j) = s;
    }
  d->fro_uut = d->UUT.frobenius_norm();

  const sample_key kc = field_key(seed, 2);
  const sample_key kr = field_key(seed, 3);
  d->c.resize(n);
  d->r.resize(n);
  for (int i = 0; i < n; ++i) {
    d->c[i] = kc.u01(i);
    d->r[i] = kr.uniform(i, 0.0, 5.0);
  }
  d->t = field_key(seed, 4).uniform(0, 0.0, 5.0);
  d->a_bar.resize(n);
  for (int i = 0; i < n; ++i) d->a_bar[i] = d->c[i] + 0.5;
  return d;
}

inline problem_instance make_fractional(int n, std::uint64_t seed, bool exponential) {
  std::shared_ptr<const fractional_data> d = build_fractional_data(n, seed, exponential);
  const int m = (n + 9) / 10;
  const sample_key ka = field_key(seed, 5);
  const sample_key kb = field_key(seed, 6);
  matrix A(m, n);
  vec b(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) A(i, j) = ka.normal(static_cast<std::uint64_t>(i) * n + j);
    b[i] = std::fabs(kb.normal(i)) + 1.0;  // keeps 0 strictly feasible
  }

  problem_instance p{.name = exponential ? "fractional_nonlinear" : "fractional_quadratic",
                     .dim = n,
                     .oracle = {},
                     .set = feasible_set::polyhedron_l1(std::move(A), std::move(b), 1.0),
                     .start = vec(n, 0.0),
                     .reference = std::nullopt,
                     .lipschitz = std::nullopt,
                     .instance_seed = seed,
                     .fingerprint = 0};
  p.recipe = "U, A standard normal; c and c_bar(xi) uniform[0,1]; r, t uniform[0,5]; "
             "b = |normal| + 1 so the origin is strictly feasible; m = ceil(n/10)";
  p.oracle.dim = n;
  p.oracle.sample_eval = [d](cspan x, sample_key key, vec& out) {
    fractional_sample(*d, x, key, out);
  };
  p.oracle.mean_eval = [d](cspan x, vec& out) { fractional_mean(*d, x, out); };

  std::uint64_t h = hash_mix(0x5151, seed);
  h = hash_mix(h, static_cast<std::uint64_t>(n));
  h = hash_mix(h, exponential ? 2 : 1);
  h = hash_doubles(h, d->UUT.data());
  h = hash_doubles(h, d->c);
  h = hash_doubles(h, d->r);
  p.fingerprint = h;
  return p;
}

}  // namespace detail

inline problem_instance make_fractional_quadratic(int n, std::uint64_t seed) {
  return detail::make_fractional(n, seed, false);
}

inline problem_instance make_fractional_nonlinear(int n, std::uint64_t seed) {
  return detail::make_fractional(n, seed, true);
}

// ---------------------------------------------------------------------------
// Networked Nash-Cournot game: I firms over J markets, capacities 2,
// uniform demand intercepts a on [30,60] and costs c on [2,6].

struct nash_cournot_data {
  int firms = 0;
  int markets = 0;
  vec b;  // demand slopes, frozen
  double cap = 2.0;
};

inline void nash_sample(const nash_cournot_data& d, cspan x, sample_key key, vec& out) {
  const int I = d.firms, J = d.markets;
  vec total(J, 0.0);
  for (int i = 0; i < I; ++i)
    for (int j = 0; j < J; ++j) total[j] += x[static_cast<std::size_t>(i) * J + j];
  out.resize(static_cast<std::size_t>(I) * J);
  for (int i = 0; i < I; ++i) {
    const double ci = key.uniform(J + i, 2.0, 6.0);
    for (int j = 0; j < J; ++j) {
      const double aj = key.uniform(j, 30.0, 60.0);
      out[static_cast<std::size_t>(i) * J + j] =
          d.b[j] * (x[static_cast<std::size_t>(i) * J + j] + total[j]) + ci - aj;
    }
  }
}

inline void nash_mean(const nash_cournot_data& d, cspan x, vec& out) {
  const int I = d.firms, J = d.markets;
  vec total(J, 0.0);
  for (int i = 0; i < I; ++i)
    for (int j = 0; j < J; ++j) total[j] += x[static_cast<std::size_t>(i) * J + j];
  out.resize(static_cast<std::size_t>(I) * J);
  for (int i = 0; i < I; ++i)
    for (int j = 0; j < J; ++j)
      out[static_cast<std::size_t>(i) * J + j] =
          d.b[j] * (x[static_cast<std::size_t>(i) * J + j] + total[j]) + 4.0 - 45.0;
}

inline problem_instance make_nash_cournot(int firms, int markets, std::uint64_t seed,
                                          bool with_reference = true) {
  require(firms >= 2 && markets >= 1, errc::invalid_parameter, "nash dimensions");
  auto d = std::make_shared<nash_cournot_data>();
  d->firms = firms;
  d->markets = markets;
  d->b.resize(markets);
  const sample_key kb = detail::field_key(seed, 11);
  for (int j = 0; j < markets; ++j) d->b[j] = kb.uniform(j, 0.0, 2.0);

  std::vector<feasible_set> parts;
  parts.reserve(firms);
  for (int i = 0; i < firms; ++i) parts.push_back(feasible_set::cube(markets, 0.0, d->cap));

  const int dim = firms * markets;
  problem_instance p{.name = "nash_cournot",
                     .dim = dim,
                     .oracle = {},
                     .set = feasible_set::product(std::move(parts)),
                     .start = vec(dim, 0.0),
                     .reference = std::nullopt,
                     .lipschitz = (firms + 1.0) * norm_inf(d->b),
                     .instance_seed = seed,
                     .fingerprint = 0};
  p.recipe = "demand slopes b uniform[0,2] frozen; a(xi) uniform[30,60]; "
             "c_i(xi) uniform[2,6]; capacities 2";
  p.oracle.dim = dim;
  p.oracle.sample_eval = [d](cspan x, sample_key key, vec& out) { nash_sample(*d, x, key, out); };
  p.oracle.mean_eval = [d](cspan x, vec& out) { nash_mean(*d, x, out); };

  if (with_reference) {
    const double L = *p.lipschitz;
    auto F = [d](cspan x, vec& out) { nash_mean(*d, x, out); };
    auto ref = deterministic_extragradient(p.start, F, distance_generator::euclidean(1.0), p.set,
                                           1.0 / (2.0 * L), 200000, 1e-10);
    require(ref.residual <= 1e-9, errc::inner_solver_failure,
            "nash reference solve did not reach 1e-10");
    p.reference = ref.x;
  }

  std::uint64_t h = detail::hash_mix(0x6a5e, seed);
  h = detail::hash_mix(h, static_cast<std::uint64_t>(firms));
  h = detail::hash_mix(h, static_cast<std::uint64_t>(markets));
  h = detail::hash_doubles(h, d->b);
  p.fingerprint = h;
  return p;
}

// ---------------------------------------------------------------------------
// Affine monotone validation problem with a known interior solution:
// F(x) = M (x - x*) + noise * u(xi), M symmetric positive definite with a
// prescribed spectrum, box constraints keeping x* interior.

struct affine_problem_options {
  int n = 20;
  double condition = 10.0;
  double lipschitz = 1.2;   // largest eigenvalue of M
  double noise = 0.0;       // amplitude of the uniform [-1,1] oracle noise
  double box_halfwidth = 2.0;
  bool diagonal = false;    // keep M = diag(spectrum); eigendirections = axes
};

/// The log-spaced spectrum used by make_affine.
inline vec affine_spectrum(const affine_problem_options& o) {
  vec lambda(o.n);
  const double lmin = o.lipschitz / o.condition;
  for (int i = 0; i < o.n; ++i) {
    const double t = o.n == 1 ? 0.0 : static_cast<double>(i) / (o.n - 1);
    lambda[i] = lmin * std::pow(o.condition, t);
  }
  return lambda;
}

struct affine_data {
  matrix M;
  vec x_star;
  double noise = 0.0;
};

inline problem_instance make_affine(const affine_problem_options& o, std::uint64_t seed) {
  require(o.n >= 2 && o.condition >= 1 && o.lipschitz > 0 && o.noise >= 0,
          errc::invalid_parameter, "affine problem options");
  const int n = o.n;
  auto d = std::make_shared<affine_data>();
  d->noise = o.noise;

  // M = Q' diag(lambda) Q with Q a product of two Householder reflections
  // (or the identity when a plain diagonal spectrum is requested).
  const vec lambda = affine_spectrum(o);
  d->M = matrix(n, n);
  if (o.diagonal) {
    for (int i = 0; i < n; ++i) d->M(i, i) = lambda[i];
  } else {
    const sample_key kv = detail::field_key(seed, 21);
    vec v1(n), v2(n);
    for (int i = 0; i < n; ++i) {
      v1[i] = kv.normal(i);
      v2[i] = kv.normal(n + i);
    }
    const double n1 = norm2(v1), n2 = norm2(v2);
    for (int i = 0; i < n; ++i) {
      v1[i] /= n1;
      v2[i] /= n2;
    }
    auto reflect = [n](const vec& v, vec& y) {
      const double t = 2.0 * dot(v, y);
      for (int i = 0; i < n; ++i) y[i] -= t * v[i];
    };
    vec e(n), y(n);
    for (int col = 0; col < n; ++col) {
      std::fill(e.begin(), e.end(), 0.0);
      e[col] = 1.0;
      y = e;
      reflect(v1, y);
      reflect(v2, y);
      for (int i = 0; i < n; ++i) y[i] *= lambda[i];
      reflect(v2, y);
      reflect(v1, y);
      for (int i = 0; i < n; ++i) d->M(i, col) = y[i];
    }
  }

  const sample_key kx = detail::field_key(seed, 22);
  d->x_star.resize(n);
  for (int i = 0; i < n; ++i) d->x_star[i] = kx.uniform(i, -1.0, 1.0);

  problem_instance p{.name = "affine",
                     .dim = n,
                     .oracle = {},
                     .set = feasible_set::cube(n, -o.box_halfwidth, o.box_halfwidth),
                     .start = vec(n, 0.95 * o.box_halfwidth),
                     .reference = d->x_star,
                     .lipschitz = o.lipschitz,
                     .instance_seed = seed,
                     .fingerprint = 0};
  p.recipe = "M with log-spaced spectrum (rotated unless diagonal); x* uniform[-1,1] "
             "interior; additive noise uniform[-1,1] scaled";
  p.oracle.dim = n;
  p.oracle.sample_eval = [d, n](cspan x, sample_key key, vec& out) {
    vec diff = sub(x, d->x_star);
    d->M.mul(diff, out);
    for (int i = 0; i < n; ++i) out[i] += d->noise * key.uniform(i, -1.0, 1.0);
  };
  // Hoists the matvec; the per-sample accumulation order is unchanged.
  p.oracle.batch_eval = [d, n](cspan x, const sample_batch& batch, vec& sum) {
    vec diff = sub(x, d->x_star);
    vec base;
    d->M.mul(diff, base);
    vec fx(n);
    for (long long j = 0; j < batch.count; ++j) {
      const sample_key key = batch.key(j);
      for (int i = 0; i < n; ++i) fx[i] = base[i] + d->noise * key.uniform(i, -1.0, 1.0);
      for (int i = 0; i < n; ++i) sum[i] += fx[i];
    }
  };
  p.oracle.mean_eval = [d](cspan x, vec& out) {
    vec diff = sub(x, d->x_star);
    d->M.mul(diff, out);
  };

  std::uint64_t h = detail::hash_mix(0xaff1, seed);
  h = detail::hash_mix(h, static_cast<std::uint64_t>(n));
  h = detail::hash_doubles(h, d->M.data());
  h = detail::hash_doubles(h, d->x_star);
  p.fingerprint = h;
  return p;
}

}  // namespace svi

#endif  // SVI_PROBLEMS_HPP
