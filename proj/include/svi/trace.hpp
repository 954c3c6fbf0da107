#ifndef SVI_TRACE_HPP
#define SVI_TRACE_HPP

#include <cstdio>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "svi/error.hpp"
#include "svi/vec.hpp"

namespace svi {

struct iteration_record {
  long long k = 0;
  double gamma = 0.0;
  long long l = 0;
  long long n_batch = 0;
  long long oracle_calls_cum = 0;
  double vrf = 0.0;
  double nat_residual = 0.0;
  std::optional<double> gap;
  std::optional<double> rel_error;
  double wall_ms = 0.0;
  long long regen = 0;  // Step-1 regenerations; bookkeeping only, not a CSV column
};

struct run_trace {
  std::vector<iteration_record> records;
  bool converged = false;
  long long total_calls = 0;
  vec final_x;
  double wall_ms_total = 0.0;
};

inline const char* trace_header() {
  return "k,gamma_k,l_k,N_k,oracle_calls_cum,vrf,nat_residual,gap,rel_error,wall_ms";
}

namespace detail {
inline std::string fmt_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace detail

/// CSV row in the fixed column order; optional fields render as empty.
inline std::string trace_row(const iteration_record& r) {
  std::string s;
  s += std::to_string(r.k);
  s += ',';
  s += detail::fmt_full(r.gamma);
  s += ',';
  s += std::to_string(r.l);
  s += ',';
  s += std::to_string(r.n_batch);
  s += ',';
  s += std::to_string(r.oracle_calls_cum);
  s += ',';
  s += detail::fmt_full(r.vrf);
  s += ',';
  s += detail::fmt_full(r.nat_residual);
  s += ',';
  if (r.gap) s += detail::fmt_full(*r.gap);
  s += ',';
  if (r.rel_error) s += detail::fmt_full(*r.rel_error);
  s += ',';
  s += detail::fmt_full(r.wall_ms);
  return s;
}

inline void write_trace_csv(const std::string& path, const run_trace& t) {
  std::ofstream f(path);
  require(f.good(), errc::io_error, "cannot open " + path + " for writing");
  f << trace_header() << '\n';
  for (const auto& r : t.records) f << trace_row(r) << '\n';
  require(f.good(), errc::io_error, "write failed for " + path);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline run_trace read_trace_csv(const std::string& path) {
  std::ifstream f(path);
  require(f.good(), errc::io_error, "cannot open " + path);
  std::string line;
  require(static_cast<bool>(std::getline(f, line)), errc::io_error, "empty trace file");
  require(line == trace_header(), errc::io_error, "unexpected trace header in " + path);
  run_trace t;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    require(cells.size() == 10, errc::io_error, "bad trace row in " + path);
    iteration_record r;
    r.k = std::stoll(cells[0]);
    r.gamma = std::stod(cells[1]);
    r.l = std::stoll(cells[2]);
    r.n_batch = std::stoll(cells[3]);
    r.oracle_calls_cum = std::stoll(cells[4]);
    r.vrf = std::stod(cells[5]);
    r.nat_residual = std::stod(cells[6]);
    if (!cells[7].empty()) r.gap = std::stod(cells[7]);
    if (!cells[8].empty()) r.rel_error = std::stod(cells[8]);
    r.wall_ms = std::stod(cells[9]);
    t.records.push_back(r);
    t.total_calls = r.oracle_calls_cum;
  }
  return t;
}

}  // namespace svi

#endif  // SVI_TRACE_HPP
