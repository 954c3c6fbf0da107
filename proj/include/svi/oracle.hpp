#ifndef SVI_ORACLE_HPP
#define SVI_ORACLE_HPP

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "svi/error.hpp"
#include "svi/rng.hpp"
#include "svi/vec.hpp"

namespace svi {

// A sampled operator f(x, xi). sample_eval must be deterministic in
// (x, key). batch_eval is an optional fast path that must produce exactly
// the same accumulation as the per-sample loop (hoisting sample-independent
// work is fine, reordering the sum is not).
struct stochastic_oracle {
  int dim = 0;
  std::function<void(cspan x, sample_key, vec& out)> sample_eval;
  std::function<void(cspan x, vec& out)> mean_eval;  // exact F when available
  std::function<void(cspan x, const sample_batch&, vec& sum_out)> batch_eval;

  bool has_mean() const { return static_cast<bool>(mean_eval); }

  vec mean(cspan x) const {
    require(has_mean(), errc::invalid_parameter, "oracle has no exact mean");
    vec out;
    mean_eval(x, out);
    return out;
  }
};

/// Mean of f(x, xi_j) over an already-drawn batch; no call accounting.
inline vec batch_mean(const stochastic_oracle& oracle, cspan x, const sample_batch& batch) {
  require(static_cast<int>(x.size()) == oracle.dim, errc::dimension_mismatch,
          "point dimension does not match the oracle");
  vec sum(oracle.dim, 0.0);
  if (oracle.batch_eval) {
    oracle.batch_eval(x, batch, sum);
  } else {
    vec fx(oracle.dim);
    for (long long j = 0; j < batch.count; ++j) {
      oracle.sample_eval(x, batch.key(j), fx);
      for (int i = 0; i < oracle.dim; ++i) sum[i] += fx[i];
    }
  }
  for (int i = 0; i < oracle.dim; ++i) sum[i] /= static_cast<double>(batch.count);
  if (!all_finite(sum))
    fail(errc::oracle_failure, "non-finite batch mean (seed " + std::to_string(batch.seed) +
                                   ", counters " + std::to_string(batch.counter0) + "+" +
                                   std::to_string(batch.count) + ")");
  return sum;
}

/// Draws N fresh samples, returns their empirical mean and the advanced
/// stream; calls increase by exactly N.
inline std::pair<vec, sample_stream> empirical_mean(const stochastic_oracle& oracle, cspan x,
                                                    const sample_stream& stream, long long n) {
  auto [batch, advanced] = draw_batch(stream, n);
  return {batch_mean(oracle, x, batch), advanced};
}

// ---------------------------------------------------------------------------
// Batch-size schedules N_k.

enum class schedule_kind { log_power, power32, power08, constant };

struct sample_schedule {
  schedule_kind kind = schedule_kind::constant;
  long long n = 1;            // front multiplier (log_power) or constant size
  double lambda = 2.05;       // log_power shift, > 2
  double b = 1e-4;            // log_power exponent offset, > 0
  double inner_scale = 1.0;   // log_power factor applied inside the ceiling
  double d = 1.0;             // power32 divisor
  long long multiplier = 1;   // outer integer multiplier (power08/power32)

  static sample_schedule constant(long long n) {
    sample_schedule s;
    s.kind = schedule_kind::constant;
    s.n = n;
    return s;
  }
  static sample_schedule power08(long long multiplier = 1) {
    sample_schedule s;
    s.kind = schedule_kind::power08;
    s.multiplier = multiplier;
    return s;
  }
  static sample_schedule power32(double d, long long multiplier = 1) {
    sample_schedule s;
    s.kind = schedule_kind::power32;
    s.d = d;
    s.multiplier = multiplier;
    return s;
  }
  static sample_schedule log_power(long long n, double lambda, double b, double inner_scale = 1.0) {
    sample_schedule s;
    s.kind = schedule_kind::log_power;
    s.n = n;
    s.lambda = lambda;
    s.b = b;
    s.inner_scale = inner_scale;
    return s;
  }

  void validate() const {
    switch (kind) {
      case schedule_kind::constant:
        require(n >= 1, errc::invalid_parameter, "constant schedule needs N >= 1");
        return;
      case schedule_kind::power08:
        require(multiplier >= 1, errc::invalid_parameter, "schedule multiplier must be >= 1");
        return;
      case schedule_kind::power32:
        require(d > 0 && multiplier >= 1, errc::invalid_parameter, "power32 needs d > 0");
        return;
      case schedule_kind::log_power:
        require(n >= 1 && lambda > 2 && b > 0 && inner_scale > 0, errc::invalid_parameter,
                "log_power needs N >= 1, lambda > 2, b > 0");
        return;
    }
  }

  long long at(long long k) const {
    switch (kind) {
      case schedule_kind::constant:
        return n;
      case schedule_kind::power08:
        return multiplier * llceil(std::pow(static_cast<double>(k + 1), 0.8));
      case schedule_kind::power32:
        return multiplier * llceil(std::pow(static_cast<double>(k + 1), 1.5) / d);
      case schedule_kind::log_power: {
        const double t = static_cast<double>(k) + lambda;
        const double v = inner_scale * t * std::pow(std::log(t), 1.0 + b);
        return n * std::max(1LL, llceil(v));
      }
    }
    return 1;
  }

 private:
  static long long llceil(double v) { return static_cast<long long>(std::ceil(v - 1e-12)); }
};

inline long long sample_schedule_at(const sample_schedule& s, long long k) {
  s.validate();
  require(k >= 0, errc::invalid_parameter, "iteration index must be nonnegative");
  return s.at(k);
}

}  // namespace svi

#endif  // SVI_ORACLE_HPP
