#ifndef SVI_ERROR_HPP
#define SVI_ERROR_HPP

#include <stdexcept>
#include <string>

namespace svi {

enum class errc {
  domain_violation,
  dimension_mismatch,
  inner_solver_failure,
  oracle_failure,
  line_search_exhausted,
  invalid_parameter,
  unbounded,
  incompatible_configs,
  degenerate_fit,
  io_error,
};

inline const char* errc_name(errc k) {
  switch (k) {
    case errc::domain_violation: return "domain_violation";
    case errc::dimension_mismatch: return "dimension_mismatch";
    case errc::inner_solver_failure: return "inner_solver_failure";
    case errc::oracle_failure: return "oracle_failure";
    case errc::line_search_exhausted: return "line_search_exhausted";
    case errc::invalid_parameter: return "invalid_parameter";
    case errc::unbounded: return "unbounded";
    case errc::incompatible_configs: return "incompatible_configs";
    case errc::degenerate_fit: return "degenerate_fit";
    case errc::io_error: return "io_error";
  }
  return "unknown";
}

class error : public std::runtime_error {
 public:
  error(errc kind, const std::string& what)
      : std::runtime_error(std::string(errc_name(kind)) + ": " + what), kind_(kind) {}
  errc kind() const { return kind_; }

 private:
  errc kind_;
};

[[noreturn]] inline void fail(errc kind, const std::string& what) { throw error(kind, what); }

inline void require(bool cond, errc kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace svi

#endif  // SVI_ERROR_HPP
