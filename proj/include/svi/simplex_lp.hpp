#ifndef SVI_SIMPLEX_LP_HPP
#define SVI_SIMPLEX_LP_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "svi/error.hpp"
#include "svi/vec.hpp"

namespace svi {

// Two-phase dense tableau simplex for the small LPs this library needs
// (linear minimization over polyhedral sets, Phase-I feasibility checks).
// Problem form: min c'x  s.t.  Ax <= b, x >= 0.

enum class lp_status { optimal, infeasible, unbounded };

struct lp_result {
  lp_status status = lp_status::optimal;
  vec x;
  double value = 0.0;
};

class simplex_lp {
 public:
  static lp_result minimize(const matrix& A, const vec& b, const vec& c) {
    simplex_lp s(A, b, c);
    return s.run();
  }

 private:
  static constexpr double kEps = 1e-9;

  int m_, n_, n_art_ = 0;
  int ncols_ = 0;  // structural + slack + artificial
  std::vector<std::vector<double>> T_;
  vec rhs_;
  std::vector<int> basis_;
  std::vector<bool> banned_;
  std::vector<bool> row_active_;
  vec cost_;

  simplex_lp(const matrix& A, const vec& b, const vec& c) : m_(A.rows()), n_(A.cols()) {
    require(static_cast<int>(b.size()) == m_ && static_cast<int>(c.size()) == n_,
            errc::dimension_mismatch, "LP dimensions disagree");
    std::vector<int> art_row;
    for (int i = 0; i < m_; ++i)
      if (b[i] < 0) art_row.push_back(i);
    n_art_ = static_cast<int>(art_row.size());
    ncols_ = n_ + m_ + n_art_;

    T_.assign(m_, std::vector<double>(ncols_, 0.0));
    rhs_.assign(m_, 0.0);
    basis_.assign(m_, -1);
    banned_.assign(ncols_, false);
    row_active_.assign(m_, true);
    cost_.assign(ncols_, 0.0);
    for (int j = 0; j < n_; ++j) cost_[j] = c[j];

    int art = 0;
    for (int i = 0; i < m_; ++i) {
      const double sgn = b[i] < 0 ? -1.0 : 1.0;
      for (int j = 0; j < n_; ++j) T_[i][j] = sgn * A(i, j);
      T_[i][n_ + i] = sgn;  // slack
      rhs_[i] = sgn * b[i];
      if (b[i] < 0) {
        T_[i][n_ + m_ + art] = 1.0;
        basis_[i] = n_ + m_ + art;
        ++art;
      } else {
        basis_[i] = n_ + i;
      }
    }
  }

  lp_result run() {
    if (n_art_ > 0) {
      vec phase1(ncols_, 0.0);
      for (int j = n_ + m_; j < ncols_; ++j) phase1[j] = 1.0;
      if (!iterate(phase1)) return {lp_status::infeasible, {}, 0.0};  // cycling cap; treat as failure
      if (objective(phase1) > 1e-7) return {lp_status::infeasible, {}, 0.0};
      expel_artificials();
      for (int j = n_ + m_; j < ncols_; ++j) banned_[j] = true;
    }
    if (!iterate(cost_)) return {lp_status::unbounded, {}, 0.0};
    lp_result out;
    out.status = lp_status::optimal;
    out.x.assign(n_, 0.0);
    for (int i = 0; i < m_; ++i)
      if (row_active_[i] && basis_[i] < n_) out.x[basis_[i]] = rhs_[i];
    out.value = dot(out.x, cspan(cost_).first(n_));
    return out;
  }

  double objective(const vec& c) const {
    double v = 0.0;
    for (int i = 0; i < m_; ++i)
      if (row_active_[i]) v += c[basis_[i]] * rhs_[i];
    return v;
  }

  void reduced_costs(const vec& c, vec& r) const {
    r = c;
    for (int i = 0; i < m_; ++i) {
      if (!row_active_[i]) continue;
      const double cb = c[basis_[i]];
      if (cb == 0.0) continue;
      for (int j = 0; j < ncols_; ++j) r[j] -= cb * T_[i][j];
    }
  }

  // Returns false on unbounded direction (phase 2) or iteration cap.
  bool iterate(const vec& c) {
    const long long cap = 2000LL + 200LL * (m_ + ncols_);
    vec r;
    for (long long it = 0; it < cap; ++it) {
      reduced_costs(c, r);
      const bool bland = it > 50LL * (m_ + ncols_);
      int enter = -1;
      double best = -kEps;
      for (int j = 0; j < ncols_; ++j) {
        if (banned_[j]) continue;
        if (r[j] < best) {
          enter = j;
          best = r[j];
          if (bland) break;  // first improving column
        }
      }
      if (enter < 0) return true;  // optimal
      int leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m_; ++i) {
        if (!row_active_[i] || T_[i][enter] <= kEps) continue;
        const double ratio = rhs_[i] / T_[i][enter];
        if (ratio < best_ratio - kEps ||
            (ratio < best_ratio + kEps && (leave < 0 || basis_[i] < basis_[leave]))) {
          best_ratio = ratio;
          leave = i;
        }
      }
      if (leave < 0) return false;  // unbounded
      pivot(leave, enter);
    }
    fail(errc::inner_solver_failure, "simplex iteration cap reached");
  }

  void pivot(int row, int col) {
    const double p = T_[row][col];
    for (int j = 0; j < ncols_; ++j) T_[row][j] /= p;
    rhs_[row] /= p;
    T_[row][col] = 1.0;
    for (int i = 0; i < m_; ++i) {
      if (i == row || !row_active_[i]) continue;
      const double f = T_[i][col];
      if (f == 0.0) continue;
      for (int j = 0; j < ncols_; ++j) T_[i][j] -= f * T_[row][j];
      T_[i][col] = 0.0;
      rhs_[i] -= f * rhs_[row];
    }
    basis_[row] = col;
  }

  void expel_artificials() {
    for (int i = 0; i < m_; ++i) {
      if (!row_active_[i] || basis_[i] < n_ + m_) continue;
      int col = -1;
      for (int j = 0; j < n_ + m_; ++j)
        if (std::fabs(T_[i][j]) > kEps) {
          col = j;
          break;
        }
      if (col >= 0)
        pivot(i, col);
      else
        row_active_[i] = false;  // redundant constraint
    }
  }
};

inline lp_result lp_minimize(const matrix& A, const vec& b, const vec& c) {
  return simplex_lp::minimize(A, b, c);
}

}  // namespace svi

#endif  // SVI_SIMPLEX_LP_HPP
