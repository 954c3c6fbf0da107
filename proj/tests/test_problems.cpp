#include <cmath>

#include "doctest.h"
#include "svi/metrics.hpp"
#include "svi/problems.hpp"

using namespace svi;

namespace {

// Directional finite-difference check of f = grad(phi/psi) against the
// sampled scalar, sharing the same frozen draw.
void check_fractional_gradient(const problem_instance& p,
                               const std::shared_ptr<const detail::fractional_data>& data,
                               int points, std::uint64_t probe_seed) {
  const sample_key probe{detail::mix64(probe_seed)};
  std::uint64_t slot = 0;
  const double eps = 1e-6;
  int checked = 0;
  for (int t = 0; t < 10 * points && checked < points; ++t) {
    vec x(p.dim), h(p.dim);
    for (int i = 0; i < p.dim; ++i) {
      x[i] = probe.uniform(slot++, -0.4, 0.4);
      h[i] = probe.uniform(slot++, -1.0, 1.0);
    }
    x = p.set.project(x, 1e-10);
    const double hn = norm2(h);
    for (auto& v : h) v /= hn;

    const sample_key xi{detail::mix64(probe_seed * 1315423911ULL + t)};
    vec grad;
    p.oracle.sample_eval(x, xi, grad);
    const double analytic = dot(grad, h);

    vec xp = x, xm = x;
    axpy(eps, h, xp);
    axpy(-eps, h, xm);
    const double fd = (detail::fractional_sample_value(*data, xp, xi) -
                       detail::fractional_sample_value(*data, xm, xi)) /
                      (2 * eps);
    if (std::fabs(analytic) < 1e-8) continue;  // avoid 0/0 in the relative test
    CHECK(std::fabs(fd - analytic) / std::fabs(analytic) < 1e-5);
    ++checked;
  }
  CHECK(checked == points);
}

}  // namespace

TEST_SUITE("problems") {
  TEST_CASE("fractional quadratic oracle matches finite differences") {
    auto p = make_fractional_quadratic(10, 5);
    auto d = detail::build_fractional_data(10, 5, false);
    check_fractional_gradient(p, d, 30, 101);
  }

  TEST_CASE("fractional nonlinear oracle matches finite differences") {
    auto p = make_fractional_nonlinear(10, 5);
    auto d = detail::build_fractional_data(10, 5, true);
    check_fractional_gradient(p, d, 30, 103);
  }

  TEST_CASE("closed form at the origin for the quadratic variant") {
    const int n = 10;
    auto d = detail::build_fractional_data(n, 7, false);
    auto p = make_fractional_quadratic(n, 7);

    // mean operator: ( (t+4n) 4n a_bar - 8n^2 r ) / (t+4n)^2  at x = 0
    vec expect(n);
    const double psi0 = d->t + 4.0 * n;
    for (int i = 0; i < n; ++i)
      expect[i] = (psi0 * 4.0 * n * d->a_bar[i] - 8.0 * n * n * d->r[i]) / (psi0 * psi0);
    vec got = p.oracle.mean(vec(n, 0.0));
    CHECK(dist2(got, expect) < 1e-10 * norm2(expect));

    // per-sample version with the sampled coefficient vector
    const sample_key xi{detail::mix64(999)};
    vec a(n);
    for (int i = 0; i < n; ++i) a[i] = d->c[i] + xi.u01(static_cast<std::uint64_t>(n) * n + i);
    vec sample_expect(n);
    for (int i = 0; i < n; ++i)
      sample_expect[i] = (psi0 * 4.0 * n * a[i] - 8.0 * n * n * d->r[i]) / (psi0 * psi0);
    vec sample_got(n);
    p.oracle.sample_eval(vec(n, 0.0), xi, sample_got);
    CHECK(dist2(sample_got, sample_expect) < 1e-10 * norm2(sample_expect));
  }

  TEST_CASE("exponential denominator value and monotonicity") {
    const int n = 10;
    auto d = detail::build_fractional_data(n, 11, true);
    // high-precision evaluation of 1e4 (e^{(8n+2)/2000} - e^{(t+4n)/2000}) at x = 0
    const long double expected =
        1e4L * (expl((8.0L * n + 2.0L) / 2000.0L) - expl((d->t + 4.0L * n) / 2000.0L));
    CHECK(d->psi(vec(n, 0.0)) == doctest::Approx(static_cast<double>(expected)).epsilon(1e-12));

    // psi decreases along +r
    vec x(n, 0.0);
    vec step = d->r;
    const double nr = norm2(step);
    for (auto& v : step) v *= 1e-3 / nr;
    vec x2 = add(x, step);
    CHECK(d->psi(x2) < d->psi(x));
  }

  TEST_CASE("fractional oracles stay finite on random feasible probes") {
    auto pq = make_fractional_quadratic(10, 13);
    auto pn = make_fractional_nonlinear(10, 13);
    const sample_key probe{detail::mix64(77)};
    std::uint64_t slot = 0;
    vec out;
    for (int t = 0; t < 10000; ++t) {
      vec x(10);
      for (int i = 0; i < 10; ++i) x[i] = probe.uniform(slot++, -0.3, 0.3);
      x = pq.set.project(x, 1e-9);
      const sample_key xi{detail::mix64(5000 + t)};
      pq.oracle.sample_eval(x, xi, out);
      CHECK(all_finite(out));
      pn.oracle.sample_eval(x, xi, out);
      CHECK(all_finite(out));
    }
  }

  TEST_CASE("nash mean operator blocks") {
    auto p = make_nash_cournot(3, 2, 21, false);
    // recover b from a block evaluation at a unit coordinate
    vec x(6, 0.0);
    vec f0 = p.oracle.mean(x);
    for (double v : f0) CHECK(v == doctest::Approx(4.0 - 45.0));

    x[0] = 1.0;  // firm 0, market 0
    vec f1 = p.oracle.mean(x);
    const double b0 = (f1[0] - f0[0]) / 2.0;  // diagonal block is 2 diag(b)
    CHECK(f1[2] - f0[2] == doctest::Approx(b0));  // off-diagonal block is diag(b)
    CHECK(f1[4] - f0[4] == doctest::Approx(b0));
    CHECK(f1[1] == f0[1]);  // other market untouched
  }

  TEST_CASE("nash sampled blocks are negative at the origin") {
    auto p = make_nash_cournot(4, 3, 33, false);
    vec out;
    for (int t = 0; t < 200; ++t) {
      p.oracle.sample_eval(vec(12, 0.0), sample_key{detail::mix64(t + 1)}, out);
      for (double v : out) CHECK(v < 0.0);
    }
  }

  TEST_CASE("nash symmetry for two identical firms under the mean operator") {
    auto p = make_nash_cournot(2, 4, 37, false);
    vec x(8);
    for (int j = 0; j < 4; ++j) x[j] = x[4 + j] = 0.25 * (j + 1);
    vec f = p.oracle.mean(x);
    for (int j = 0; j < 4; ++j) CHECK(f[j] == doctest::Approx(f[4 + j]));
  }

  TEST_CASE("nash mean operator is monotone") {
    auto p = make_nash_cournot(5, 4, 41, false);
    const sample_key key{detail::mix64(2)};
    std::uint64_t slot = 0;
    for (int t = 0; t < 1000; ++t) {
      vec x(20), y(20);
      for (int i = 0; i < 20; ++i) {
        x[i] = key.uniform(slot++, 0.0, 2.0);
        y[i] = key.uniform(slot++, 0.0, 2.0);
      }
      vec fx = p.oracle.mean(x);
      vec fy = p.oracle.mean(y);
      CHECK(dot(sub(fx, fy), sub(x, y)) >= -1e-10);
    }
  }

  TEST_CASE("nash reference solution satisfies the residual contract") {
    auto p = make_nash_cournot(4, 4, 45);
    REQUIRE(p.reference.has_value());
    auto gen = distance_generator::euclidean(1.0);
    vec F = p.oracle.mean(*p.reference);
    CHECK(natural_residual(*p.reference, F, 1.0, gen, p.set) <= 1e-9);

    // the half-Lipschitz stepsize reaches 1e-10 well inside 1e4 iterations
    auto det = deterministic_extragradient(p.start, p.oracle.mean_eval, gen, p.set,
                                           1.0 / (2.0 * *p.lipschitz), 10000, 1e-10);
    CHECK(det.residual <= 1e-10);
    CHECK(det.iterations <= 10000);
  }

  TEST_CASE("sampled means match the exact mean within five sigma") {
    std::vector<problem_instance> probs;
    probs.push_back(make_nash_cournot(3, 3, 51, false));
    probs.push_back(make_fractional_quadratic(6, 51));
    affine_problem_options ao;
    ao.n = 6;
    ao.noise = 1.0;
    probs.push_back(make_affine(ao, 51));

    for (const auto& p : probs) {
      vec x = p.set.project(vec(p.dim, 0.1), 1e-10);
      // variance estimate from a pilot batch
      sample_stream pilot = make_stream(7777);
      auto [b, s1] = draw_batch(pilot, 1000);
      vec mean = p.oracle.mean(x);
      double var = 0.0;
      vec fx;
      for (int j = 0; j < 1000; ++j) {
        p.oracle.sample_eval(x, b.key(j), fx);
        var += norm2_sq(sub(fx, mean));
      }
      var /= 1000.0;
      auto [emp, s2] = empirical_mean(p.oracle, x, s1, 10000);
      CHECK(norm2(sub(emp, mean)) <= 5.0 * std::sqrt(var / 10000.0) + 1e-12);
    }
  }

  TEST_CASE("affine problem exposes its solution and lipschitz constant") {
    affine_problem_options o;
    o.n = 8;
    o.condition = 7.0;
    o.lipschitz = 2.5;
    o.noise = 0.0;
    auto p = make_affine(o, 61);
    REQUIRE(p.reference.has_value());
    vec F = p.oracle.mean(*p.reference);
    CHECK(norm2(F) < 1e-14);

    auto gen = distance_generator::euclidean(2.0);
    for (double a : {0.1, 1.0, 10.0})
      CHECK(natural_residual(*p.reference, F, a, gen, p.set) <= 1e-10);

    // power iteration recovers the largest eigenvalue of M from the oracle
    vec v(8, 1.0);
    vec mv(8);
    double lam = 0.0;
    for (int it = 0; it < 300; ++it) {
      vec shifted = add(*p.reference, v);
      mv = p.oracle.mean(shifted);  // = M v
      lam = norm2(mv);
      for (int i = 0; i < 8; ++i) v[i] = mv[i] / lam;
    }
    CHECK(lam == doctest::Approx(*p.lipschitz).epsilon(1e-6));

    // deterministic solve reaches a tight residual from the standard start
    auto det = deterministic_extragradient(
        p.start, p.oracle.mean_eval, gen, p.set, 1.0 / (2.0 * *p.lipschitz), 20000, 1e-9);
    CHECK(det.residual <= 1e-8);
    CHECK(dist2(det.x, *p.reference) < 1e-6);
  }
}
