#ifndef RGT_TRACE_HPP
#define RGT_TRACE_HPP

#include <charconv>
#include <cmath>
#include <ostream>
#include <string>

#include "rgt/dynamics.hpp"
#include "rgt/phasor.hpp"

namespace rgt {

/// Shortest decimal form that reads back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, p) : std::string("nan");
}

/// Writes TraceRecords as CSV with the fixed column order
/// step, t, beta, H, D, total_active_abs, conservation_residual
/// followed, with `full`, by |V_i|, |I_i|, phi_i for every node.
class CsvTraceWriter {
 public:
  CsvTraceWriter(std::ostream& out, std::size_t nodes, bool full) : out_(out), nodes_(nodes), full_(full) {
    out_ << "step,t,beta,H,D,total_active_abs,conservation_residual";
    if (full_)
      for (std::size_t k = 0; k < nodes_; ++k) out_ << ",V_" << k << ",I_" << k << ",phi_" << k;
    out_ << '\n';
  }

  void operator()(const TraceRecord& r) {
    out_ << r.step << ',' << format_double(r.time) << ',' << format_double(r.beta) << ','
         << format_double(r.loss) << ',' << format_double(r.dissipation) << ','
         << format_double(r.power.total_active_abs) << ',' << format_double(r.power.conservation_residual);
    if (full_ && r.state)
      for (const auto& n : r.state->nodes())
        out_ << ',' << format_double(std::abs(n.v)) << ',' << format_double(std::abs(n.i)) << ','
             << format_double(n.phi);
    out_ << '\n';
  }

 private:
  std::ostream& out_;
  std::size_t nodes_;
  bool full_;
};

}  // namespace rgt

#endif  // RGT_TRACE_HPP
