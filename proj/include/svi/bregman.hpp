#ifndef SVI_BREGMAN_HPP
#define SVI_BREGMAN_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>

#include "svi/error.hpp"
#include "svi/sets.hpp"
#include "svi/vec.hpp"

namespace svi {

enum class generator_kind { euclidean, shifted_entropy, p_norm };

// A distance generating function s with declared strong-convexity modulus
// alpha. Each generator carries a scale factor chosen so that
// V(x,z) >= (alpha/2)|x-z|^2 genuinely holds on the working set: the
// Euclidean generator with modulus alpha is s(x) = (alpha/2)|x|^2, the
// shifted entropy is scaled by alpha*(coord_bound+sigma), and the p-norm
// generator by alpha over its natural modulus at coord_bound.
class distance_generator {
 public:
  static distance_generator euclidean(double alpha) {
    require(alpha > 0, errc::invalid_parameter, "alpha must be positive");
    distance_generator g(generator_kind::euclidean, alpha, alpha);
    g.lipschitz_grad_ = alpha;
    return g;
  }

  static distance_generator shifted_entropy(double alpha, double sigma, double coord_bound = 1.0) {
    require(alpha > 0 && sigma >= 0 && coord_bound > 0, errc::invalid_parameter,
            "entropy generator parameters");
    distance_generator g(generator_kind::shifted_entropy, alpha * (coord_bound + sigma), alpha);
    g.sigma_ = sigma;
    return g;
  }

  /// Textbook shifted entropy (scale 1); the implied modulus on
  /// [0, coord_bound] is 1/(coord_bound+sigma).
  static distance_generator shifted_entropy_unit(double sigma, double coord_bound = 1.0) {
    return shifted_entropy(1.0 / (coord_bound + sigma), sigma, coord_bound);
  }

  static distance_generator p_norm(int dim, double alpha, double coord_bound = 1.0) {
    require(dim >= 2 && alpha > 0 && coord_bound > 0, errc::invalid_parameter,
            "p-norm generator parameters");
    const double q = 1.0 + 1.0 / std::log(static_cast<double>(dim));
    const double natural = q * std::pow(coord_bound, q - 2.0);
    distance_generator g(generator_kind::p_norm, alpha / natural, alpha);
    g.pn_dim_ = dim;
    g.q_ = q;
    return g;
  }

  /// Textbook p-norm generator (scale 1): s(x) = ln(n) sum x_i^(1+1/ln n).
  static distance_generator p_norm_unit(int dim, double coord_bound = 1.0) {
    const double q = 1.0 + 1.0 / std::log(static_cast<double>(dim));
    return p_norm(dim, q * std::pow(coord_bound, q - 2.0), coord_bound);
  }

  generator_kind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  double scale() const { return scale_; }
  double sigma() const { return sigma_; }
  std::optional<double> lipschitz_grad() const { return lipschitz_grad_; }

  void set_lipschitz_grad(double q) {
    require(q >= alpha_, errc::invalid_parameter, "lipschitz_grad must be >= alpha");
    lipschitz_grad_ = q;
  }

  bool in_domain(cspan x) const {
    switch (kind_) {
      case generator_kind::euclidean:
        return true;
      case generator_kind::shifted_entropy:
        for (double v : x)
          if (v + sigma_ < 0) return false;
        return true;
      case generator_kind::p_norm:
        for (double v : x)
          if (v < 0) return false;
        return true;
    }
    return false;
  }

  double value(cspan x) const {
    require(in_domain(x), errc::domain_violation, "point outside generator domain");
    switch (kind_) {
      case generator_kind::euclidean:
        return 0.5 * scale_ * norm2_sq(x);
      case generator_kind::shifted_entropy: {
        double s = 0.0;
        for (double v : x) {
          const double t = v + sigma_;
          if (t > 0) s += t * std::log(t);  // 0 log 0 = 0
        }
        return scale_ * s;
      }
      case generator_kind::p_norm: {
        double s = 0.0;
        for (double v : x) s += std::pow(v, q_);
        return scale_ * std::log(static_cast<double>(pn_dim_)) * s;
      }
    }
    return 0.0;
  }

  void gradient(cspan x, vec& out) const {
    out.resize(x.size());
    switch (kind_) {
      case generator_kind::euclidean:
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = scale_ * x[i];
        return;
      case generator_kind::shifted_entropy:
        for (std::size_t i = 0; i < x.size(); ++i) {
          const double t = x[i] + sigma_;
          require(t > 0, errc::domain_violation, "entropy gradient needs x_i + sigma > 0");
          out[i] = scale_ * (std::log(t) + 1.0);
        }
        return;
      case generator_kind::p_norm: {
        const double c = scale_ * std::log(static_cast<double>(pn_dim_)) * q_;
        for (std::size_t i = 0; i < x.size(); ++i) {
          require(x[i] >= 0, errc::domain_violation, "p-norm gradient needs x >= 0");
          out[i] = c * std::pow(x[i], q_ - 1.0);
        }
        return;
      }
    }
  }

  vec gradient(cspan x) const {
    vec g;
    gradient(x, g);
    return g;
  }

  /// s(b) - s(a) evaluated coordinatewise in difference form, so the result
  /// keeps relative accuracy even when b - a is tiny.
  double value_diff(cspan a, cspan b) const {
    double s = 0.0;
    switch (kind_) {
      case generator_kind::euclidean:
        for (std::size_t i = 0; i < a.size(); ++i) s += (b[i] - a[i]) * (b[i] + a[i]);
        return 0.5 * scale_ * s;
      case generator_kind::shifted_entropy:
        for (std::size_t i = 0; i < a.size(); ++i) {
          const double u = a[i] + sigma_;
          const double v = b[i] + sigma_;
          const double d = b[i] - a[i];
          if (u <= 0.0)
            s += v > 0 ? v * std::log(v) : 0.0;
          else if (v <= 0.0)
            s -= u * std::log(u);
          else
            s += d * std::log(u) + v * std::log1p(d / u);
        }
        return scale_ * s;
      case generator_kind::p_norm:
        for (std::size_t i = 0; i < a.size(); ++i) {
          const double u = a[i];
          const double v = b[i];
          if (u <= 0.0)
            s += v > 0 ? std::pow(v, q_) : 0.0;
          else if (v <= 0.0)
            s -= std::pow(u, q_);
          else
            s += std::pow(u, q_) * std::expm1(q_ * std::log1p((v - u) / u));
        }
        return scale_ * std::log(static_cast<double>(pn_dim_)) * s;
    }
    return 0.0;
  }

 private:
  distance_generator(generator_kind k, double scale, double alpha)
      : kind_(k), scale_(scale), alpha_(alpha) {}

  generator_kind kind_;
  double scale_;
  double alpha_;
  double sigma_ = 0.0;
  int pn_dim_ = 0;
  double q_ = 0.0;
  std::optional<double> lipschitz_grad_;
};

struct bregman_eval {
  double value = 0.0;
  vec grad_gap;  // grad s(z) - grad s(x)
};

/// V(x,z) = s(z) - s(x) - grad s(x)'(z - x).
inline bregman_eval bregman_distance(const distance_generator& gen, cspan x, cspan z) {
  require(x.size() == z.size(), errc::dimension_mismatch, "bregman_distance dimensions");
  vec gx = gen.gradient(x);
  vec gz = gen.gradient(z);
  const double v = gen.value(z) - gen.value(x) - (dot(gx, z) - dot(gx, x));
  bregman_eval out;
  out.value = std::max(0.0, v);  // clip the roundoff negative at x ~ z
  out.grad_gap = sub(gz, gx);
  return out;
}

inline double bregman_value(const distance_generator& gen, cspan x, cspan z) {
  vec gx = gen.gradient(x);
  return std::max(0.0, gen.value(z) - gen.value(x) - (dot(gx, z) - dot(gx, x)));
}

namespace detail {

// Entropy prox on {z >= 0, sum z = radius}: z_i = max(0, t*w_i - sigma) with
// w_i = (x_i+sigma) exp(-(r_i - r_min)/scale) and t solving sum z = radius.
inline vec entropy_simplex_prox(const distance_generator& gen, double radius, cspan x, cspan r) {
  const double scale = gen.scale();
  const double sigma = gen.sigma();
  const std::size_t n = x.size();
  const double rmin = *std::min_element(r.begin(), r.end());
  vec w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = (x[i] + sigma) * std::exp(-(r[i] - rmin) / scale);

  if (sigma == 0.0) {
    double sw = 0.0;
    for (double v : w) sw += v;
    require(sw > 0, errc::domain_violation, "entropy prox from the zero vector");
    vec z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = radius * w[i] / sw;
    return z;
  }

  auto total = [&](double t) {
    double s = 0.0;
    for (double v : w) s += std::max(0.0, t * v - sigma);
    return s;
  };
  double hi = 1.0;
  while (total(hi) < radius) {
    hi *= 2.0;
    require(std::isfinite(hi), errc::inner_solver_failure, "entropy prox bracket failed");
  }
  double lo = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (total(mid) < radius ? lo : hi) = mid;
  }
  const double t = 0.5 * (lo + hi);
  vec z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = std::max(0.0, t * w[i] - sigma);
  return z;
}

inline vec entropy_box_prox(const distance_generator& gen, const feasible_set::box_t& bx, cspan x,
                            cspan r) {
  const double scale = gen.scale();
  const double sigma = gen.sigma();
  vec z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(bx.lo[i] + sigma >= 0, errc::domain_violation, "box reaches below entropy domain");
    const double e = -r[i] / scale;
    double zi;
    if (e > 700.0)
      zi = bx.hi[i];
    else
      zi = (x[i] + sigma) * std::exp(e) - sigma;
    z[i] = std::clamp(zi, bx.lo[i], bx.hi[i]);
  }
  return z;
}

// Projected gradient descent with backtracking on
// h(z) = r'z + V(x,z); the subproblem is alpha-strongly convex. Inner
// projections run well below the target tolerance so the gradient-mapping
// stopping test is not floored by projection error.
inline vec generic_prox(const distance_generator& gen, const feasible_set& set, cspan x, cspan r,
                        double tol) {
  constexpr int kMaxIter = 10000;
  const double ptol = std::max(1e-3 * tol, 1e-13);
  vec gx = gen.gradient(x);
  auto grad_h = [&](cspan z, vec& g) {
    gen.gradient(z, g);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = r[i] + g[i] - gx[i];
  };

  vec z = set.project(x, ptol);
  double eta = 1.0 / std::max(1.0, gen.scale());
  vec g, trial, step(x.size());
  for (int it = 0; it < kMaxIter; ++it) {
    grad_h(z, g);
    for (std::size_t i = 0; i < z.size(); ++i) step[i] = z[i] - g[i];
    vec probe = set.project(step, ptol);
    if (dist2(probe, z) <= tol) return z;

    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      for (std::size_t i = 0; i < z.size(); ++i) step[i] = z[i] - eta * g[i];
      trial = set.project(step, ptol);
      if (!gen.in_domain(trial)) {
        eta *= 0.5;
        continue;
      }
      // descent test on the increment; every term scales with the step
      double rd = 0.0, gxd = 0.0, lin = 0.0, sq = 0.0;
      for (std::size_t i = 0; i < z.size(); ++i) {
        const double d = trial[i] - z[i];
        rd += r[i] * d;
        gxd += gx[i] * d;
        lin += g[i] * d;
        sq += d * d;
      }
      const double dh = rd + gen.value_diff(z, trial) - gxd;
      const double model = lin + sq / (2.0 * eta);
      if (dh <= model + 1e-12 * (std::fabs(lin) + sq / (2.0 * eta))) {
        z = std::move(trial);
        eta *= 1.3;
        moved = true;
        break;
      }
      eta *= 0.5;
    }
    if (!moved) fail(errc::inner_solver_failure, "prox backtracking stalled");
  }
  fail(errc::inner_solver_failure, "prox inner solver hit its iteration cap");
}

}  // namespace detail

/// P_X(x, r) = argmin_{z in X} r'z + V(x, z); closed forms where available,
/// projected gradient descent otherwise. All three generators are separable,
/// so product sets decompose blockwise.
inline vec prox_map(const distance_generator& gen, const feasible_set& set, cspan x, cspan r,
                    double tol) {
  require(static_cast<int>(x.size()) == set.dim() && x.size() == r.size(),
          errc::dimension_mismatch, "prox_map dimensions");
  require(tol > 0, errc::invalid_parameter, "prox tolerance must be positive");
  require(gen.in_domain(x), errc::domain_violation, "prox center outside generator domain");

  if (const auto* prod = set.as<feasible_set::product_t>()) {
    vec z;
    z.reserve(x.size());
    std::size_t off = 0;
    for (const auto& part : prod->parts) {
      const auto d = static_cast<std::size_t>(part.dim());
      vec zi = prox_map(gen, part, x.subspan(off, d), r.subspan(off, d), tol);
      z.insert(z.end(), zi.begin(), zi.end());
      off += d;
    }
    return z;
  }

  switch (gen.kind()) {
    case generator_kind::euclidean: {
      vec step(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) step[i] = x[i] - r[i] / gen.scale();
      return set.project(step, tol);
    }
    case generator_kind::shifted_entropy:
      if (const auto* sx = set.as<feasible_set::simplex_t>())
        return detail::entropy_simplex_prox(gen, sx->radius, x, r);
      if (const auto* bx = set.as<feasible_set::box_t>())
        return detail::entropy_box_prox(gen, *bx, x, r);
      return detail::generic_prox(gen, set, x, r, tol);
    case generator_kind::p_norm:
      return detail::generic_prox(gen, set, x, r, tol);
  }
  fail(errc::invalid_parameter, "unknown generator kind");
}

/// |(grad s(x+) - grad s(x))'(x+ - u) - [V(x+,u) + V(x,x+) - V(x,u)]|
/// with x+ = P_X(x, r); identically zero in exact arithmetic.
inline double three_point_identity_check(const distance_generator& gen, const feasible_set& set,
                                         cspan x, cspan r, cspan u, double tol) {
  vec xp = prox_map(gen, set, x, r, tol);
  vec gxp = gen.gradient(xp);
  vec gx = gen.gradient(x);
  double lhs = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) lhs += (gxp[i] - gx[i]) * (xp[i] - u[i]);
  const double rhs =
      bregman_value(gen, xp, u) + bregman_value(gen, x, xp) - bregman_value(gen, x, u);
  return std::fabs(lhs - rhs);
}

}  // namespace svi

#endif  // SVI_BREGMAN_HPP
