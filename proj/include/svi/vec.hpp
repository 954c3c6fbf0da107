#ifndef SVI_VEC_HPP
#define SVI_VEC_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace svi {

using vec = std::vector<double>;
using cspan = std::span<const double>;

inline double dot(cspan a, cspan b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2_sq(cspan a) { return dot(a, a); }
inline double norm2(cspan a) { return std::sqrt(norm2_sq(a)); }

inline double norm1(cspan a) {
  double s = 0.0;
  for (double v : a) s += std::fabs(v);
  return s;
}

inline double norm_inf(cspan a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::fabs(v));
  return m;
}

inline double dist2(cspan a, cspan b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

/// y += t * x
inline void axpy(double t, cspan x, vec& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += t * x[i];
}

inline vec scaled(cspan x, double t) {
  vec y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = t * x[i];
  return y;
}

inline vec sub(cspan a, cspan b) {
  vec y(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) y[i] = a[i] - b[i];
  return y;
}

inline vec add(cspan a, cspan b) {
  vec y(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) y[i] = a[i] + b[i];
  return y;
}

inline bool all_finite(cspan a) {
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

/// Dense row-major matrix, sized once at construction.
class matrix {
 public:
  matrix() = default;
  matrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, 0.0) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  cspan row(int i) const { return cspan(data_).subspan(static_cast<std::size_t>(i) * cols_, cols_); }

  void mul(cspan x, vec& out) const {
    out.assign(rows_, 0.0);
    for (int i = 0; i < rows_; ++i) out[i] = dot(row(i), x);
  }

  void mul_transpose(cspan x, vec& out) const {
    out.assign(cols_, 0.0);
    for (int i = 0; i < rows_; ++i) {
      const double xi = x[i];
      const std::size_t off = static_cast<std::size_t>(i) * cols_;
      for (int j = 0; j < cols_; ++j) out[j] += data_[off + j] * xi;
    }
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

}  // namespace svi

#endif  // SVI_VEC_HPP
