#ifndef SVI_SETS_HPP
#define SVI_SETS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <utility>
#include <variant>
#include <vector>

#include "svi/error.hpp"
#include "svi/simplex_lp.hpp"
#include "svi/vec.hpp"

namespace svi {

// Constraint sets of the shipped experiments: boxes, the scaled probability
// simplex {x >= 0, sum x = r}, the l1 ball, {Ax <= b} intersected with an l1
// ball, and products of the above.

class feasible_set {
 public:
  struct box_t {
    vec lo, hi;
  };
  struct simplex_t {
    int dim;
    double radius;
  };
  struct l1_ball_t {
    int dim;
    double radius;
  };
  struct poly_l1_t {
    matrix A;
    vec b;
    double radius;
    vec witness;  // feasible point found at construction
  };
  struct product_t {
    std::vector<feasible_set> parts;
  };

  static feasible_set box(vec lo, vec hi) {
    require(lo.size() == hi.size() && !lo.empty(), errc::invalid_parameter, "box bounds sizes");
    for (std::size_t i = 0; i < lo.size(); ++i)
      require(lo[i] <= hi[i], errc::invalid_parameter, "box requires lo <= hi");
    const int d = static_cast<int>(lo.size());
    return feasible_set(box_t{std::move(lo), std::move(hi)}, d);
  }

  static feasible_set cube(int dim, double lo, double hi) {
    return box(vec(dim, lo), vec(dim, hi));
  }

  static feasible_set simplex(int dim, double radius) {
    require(dim >= 1 && radius > 0, errc::invalid_parameter, "simplex parameters");
    return feasible_set(simplex_t{dim, radius}, dim);
  }

  static feasible_set l1_ball(int dim, double radius) {
    require(dim >= 1 && radius > 0, errc::invalid_parameter, "l1 ball parameters");
    return feasible_set(l1_ball_t{dim, radius}, dim);
  }

  /// {x : Ax <= b, ||x||_1 <= radius}; rejects empty sets via a Phase-I solve.
  static feasible_set polyhedron_l1(matrix A, vec b, double radius) {
    require(A.rows() == static_cast<int>(b.size()) && A.cols() >= 1, errc::invalid_parameter,
            "polyhedron dimensions");
    require(radius > 0, errc::invalid_parameter, "radius must be positive");
    const int n = A.cols();
    vec witness(n, 0.0);
    bool zero_ok = true;
    for (int i = 0; i < A.rows(); ++i)
      if (b[i] < 0) zero_ok = false;
    if (!zero_ok) {
      auto r = split_var_lp(A, b, radius, vec(n, 0.0));
      require(r.status == lp_status::optimal, errc::invalid_parameter, "empty feasible set");
      witness = r.x;
    }
    return feasible_set(poly_l1_t{std::move(A), std::move(b), radius, std::move(witness)}, n);
  }

  static feasible_set product(std::vector<feasible_set> parts) {
    require(!parts.empty(), errc::invalid_parameter, "empty product");
    int d = 0;
    for (const auto& p : parts) d += p.dim();
    return feasible_set(product_t{std::move(parts)}, d);
  }

  int dim() const { return dim_; }

  bool bounded() const {
    return std::visit(
        [](const auto& s) -> bool {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, box_t>) {
            for (std::size_t i = 0; i < s.lo.size(); ++i)
              if (!std::isfinite(s.lo[i]) || !std::isfinite(s.hi[i])) return false;
            return true;
          } else if constexpr (std::is_same_v<T, product_t>) {
            for (const auto& p : s.parts)
              if (!p.bounded()) return false;
            return true;
          } else {
            return true;  // simplex, l1 ball, poly cap l1
          }
        },
        body_);
  }

  bool contains(cspan x, double tol) const {
    check_dim(x);
    return std::visit(
        [&](const auto& s) -> bool {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, box_t>) {
            for (std::size_t i = 0; i < x.size(); ++i)
              if (x[i] < s.lo[i] - tol || x[i] > s.hi[i] + tol) return false;
            return true;
          } else if constexpr (std::is_same_v<T, simplex_t>) {
            double sum = 0.0;
            for (double v : x) {
              if (v < -tol) return false;
              sum += v;
            }
            return std::fabs(sum - s.radius) <= tol * (1.0 + x.size());
          } else if constexpr (std::is_same_v<T, l1_ball_t>) {
            return norm1(x) <= s.radius + tol;
          } else if constexpr (std::is_same_v<T, poly_l1_t>) {
            if (norm1(x) > s.radius + tol) return false;
            for (int i = 0; i < s.A.rows(); ++i)
              if (dot(s.A.row(i), x) > s.b[i] + tol) return false;
            return true;
          } else {
            std::size_t off = 0;
            for (const auto& p : s.parts) {
              if (!p.contains(x.subspan(off, p.dim()), tol)) return false;
              off += p.dim();
            }
            return true;
          }
        },
        body_);
  }

  /// Euclidean projection; exact closed forms except poly cap l1 (Dykstra).
  vec project(cspan x, double tol) const {
    check_dim(x);
    require(tol > 0, errc::invalid_parameter, "projection tolerance must be positive");
    return std::visit(
        [&](const auto& s) -> vec {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, box_t>) {
            vec z(x.begin(), x.end());
            for (std::size_t i = 0; i < z.size(); ++i) z[i] = std::clamp(z[i], s.lo[i], s.hi[i]);
            return z;
          } else if constexpr (std::is_same_v<T, simplex_t>) {
            return project_simplex(x, s.radius);
          } else if constexpr (std::is_same_v<T, l1_ball_t>) {
            return project_l1(x, s.radius);
          } else if constexpr (std::is_same_v<T, poly_l1_t>) {
            return project_dykstra(s, x, tol);
          } else {
            vec z;
            z.reserve(x.size());
            std::size_t off = 0;
            for (const auto& p : s.parts) {
              vec zi = p.project(x.subspan(off, p.dim()), tol);
              z.insert(z.end(), zi.begin(), zi.end());
              off += p.dim();
            }
            return z;
          }
        },
        body_);
  }

  /// argmin_{z in set} c'z together with the optimal value.
  std::pair<vec, double> linear_minimize(cspan c) const {
    check_dim(c);
    require(bounded(), errc::unbounded, "linear minimization over unbounded set");
    return std::visit(
        [&](const auto& s) -> std::pair<vec, double> {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, box_t>) {
            vec z(c.size());
            for (std::size_t i = 0; i < c.size(); ++i) z[i] = c[i] >= 0 ? s.lo[i] : s.hi[i];
            return {z, dot(c, z)};
          } else if constexpr (std::is_same_v<T, simplex_t>) {
            const int j = static_cast<int>(std::min_element(c.begin(), c.end()) - c.begin());
            vec z(c.size(), 0.0);
            z[j] = s.radius;
            return {z, s.radius * c[j]};
          } else if constexpr (std::is_same_v<T, l1_ball_t>) {
            int j = 0;
            for (std::size_t i = 1; i < c.size(); ++i)
              if (std::fabs(c[i]) > std::fabs(c[j])) j = static_cast<int>(i);
            vec z(c.size(), 0.0);
            z[j] = c[j] > 0 ? -s.radius : s.radius;
            return {z, -s.radius * std::fabs(c[j])};
          } else if constexpr (std::is_same_v<T, poly_l1_t>) {
            vec obj(c.begin(), c.end());
            auto r = split_var_lp(s.A, s.b, s.radius, obj);
            require(r.status == lp_status::optimal, errc::inner_solver_failure,
                    "LP over poly cap l1 failed");
            return {r.x, dot(c, r.x)};
          } else {
            vec z;
            z.reserve(c.size());
            double v = 0.0;
            std::size_t off = 0;
            for (const auto& p : s.parts) {
              auto [zi, vi] = p.linear_minimize(c.subspan(off, p.dim()));
              z.insert(z.end(), zi.begin(), zi.end());
              v += vi;
              off += p.dim();
            }
            return {z, v};
          }
        },
        body_);
  }

  /// A feasible point usable as a generic start.
  vec some_point() const {
    return std::visit(
        [&](const auto& s) -> vec {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, box_t>) {
            vec z(s.lo.size());
            for (std::size_t i = 0; i < z.size(); ++i) {
              double lo = std::isfinite(s.lo[i]) ? s.lo[i] : -1.0;
              double hi = std::isfinite(s.hi[i]) ? s.hi[i] : 1.0;
              z[i] = 0.5 * (lo + hi);
            }
            return z;
          } else if constexpr (std::is_same_v<T, simplex_t>) {
            return vec(s.dim, s.radius / s.dim);
          } else if constexpr (std::is_same_v<T, l1_ball_t>) {
            return vec(s.dim, 0.0);
          } else if constexpr (std::is_same_v<T, poly_l1_t>) {
            return s.witness;
          } else {
            vec z;
            for (const auto& p : s.parts) {
              vec zi = p.some_point();
              z.insert(z.end(), zi.begin(), zi.end());
            }
            return z;
          }
        },
        body_);
  }

  template <class T>
  const T* as() const {
    return std::get_if<T>(&body_);
  }

 private:
  using body = std::variant<box_t, simplex_t, l1_ball_t, poly_l1_t, product_t>;

  feasible_set(body b, int dim) : body_(std::move(b)), dim_(dim) {}

  void check_dim(cspan x) const {
    require(static_cast<int>(x.size()) == dim_, errc::dimension_mismatch,
            "vector dimension does not match set");
  }

  static vec project_simplex(cspan x, double radius) {
    // Held/Michelot sort-and-threshold.
    vec u(x.begin(), x.end());
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cum = 0.0, tau = 0.0;
    int rho = 0;
    for (std::size_t j = 0; j < u.size(); ++j) {
      cum += u[j];
      const double t = (cum - radius) / static_cast<double>(j + 1);
      if (u[j] - t > 0) {
        rho = static_cast<int>(j + 1);
        tau = t;
      }
    }
    (void)rho;
    vec z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) z[i] = std::max(0.0, x[i] - tau);
    return z;
  }

  static vec project_l1(cspan x, double radius) {
    if (norm1(x) <= radius) return vec(x.begin(), x.end());
    vec a(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) a[i] = std::fabs(x[i]);
    vec p = project_simplex(a, radius);
    vec z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) z[i] = std::copysign(p[i], x[i]);
    return z;
  }

  static vec project_dykstra(const poly_l1_t& s, cspan x0, double tol) {
    constexpr int kMaxCycles = 50000;
    const int m = s.A.rows();
    const int n = s.A.cols();
    vec row_nrm2(m);
    for (int i = 0; i < m; ++i) row_nrm2[i] = norm2_sq(s.A.row(i));

    vec x(x0.begin(), x0.end());
    std::vector<vec> inc(m + 1, vec(n, 0.0));
    vec prev(n), y(n);
    for (int cycle = 0; cycle < kMaxCycles; ++cycle) {
      prev = x;
      for (int i = 0; i <= m; ++i) {
        y = x;
        axpy(1.0, inc[i], y);
        vec proj;
        if (i < m) {
          proj = y;
          const double viol = dot(s.A.row(i), proj) - s.b[i];
          if (viol > 0 && row_nrm2[i] > 0) axpy(-viol / row_nrm2[i], s.A.row(i), proj);
        } else {
          proj = project_l1(y, s.radius);
        }
        for (int j = 0; j < n; ++j) inc[i][j] = y[j] - proj[j];
        x = std::move(proj);
      }
      double viol = std::max(0.0, norm1(x) - s.radius);
      for (int i = 0; i < m; ++i) viol = std::max(viol, dot(s.A.row(i), x) - s.b[i]);
      if (viol <= tol && dist2(x, prev) <= 0.1 * tol) return x;
    }
    fail(errc::inner_solver_failure, "Dykstra projection did not converge");
  }

  // min c'(u - v)  s.t.  A(u - v) <= b, sum(u + v) <= radius, u, v >= 0.
  static lp_result split_var_lp(const matrix& A, const vec& b, double radius, const vec& c) {
    const int m = A.rows();
    const int n = A.cols();
    matrix As(m + 1, 2 * n);
    vec bs(m + 1), cs(2 * n);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) {
        As(i, j) = A(i, j);
        As(i, n + j) = -A(i, j);
      }
      bs[i] = b[i];
    }
    for (int j = 0; j < 2 * n; ++j) As(m, j) = 1.0;
    bs[m] = radius;
    for (int j = 0; j < n; ++j) {
      cs[j] = c[j];
      cs[n + j] = -c[j];
    }
    lp_result r = lp_minimize(As, bs, cs);
    if (r.status != lp_status::optimal) return r;
    lp_result out;
    out.status = lp_status::optimal;
    out.x.assign(n, 0.0);
    for (int j = 0; j < n; ++j) out.x[j] = r.x[j] - r.x[n + j];
    out.value = dot(c, out.x);
    return out;
  }

  body body_;
  int dim_;
};

}  // namespace svi

#endif  // SVI_SETS_HPP
