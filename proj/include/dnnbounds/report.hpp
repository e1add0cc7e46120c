#ifndef DNNBOUNDS_REPORT_HPP
#define DNNBOUNDS_REPORT_HPP

#include <cstddef>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>

#include "dnnbounds/bounds.hpp"
#include "dnnbounds/config.hpp"
#include "dnnbounds/verify.hpp"

namespace dnnbounds {

/// 17 significant digits: round-trips exactly and ignores stream state.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline constexpr const char* kCsvHeader =
    "check,sample_id,output_index,w,q,j,observed,bound_norm_resolved,bound_uniform,margin,"
    "violated";

namespace detail {

inline std::string opt_field(const std::optional<std::size_t>& v) {
  return v ? std::to_string(*v) : std::string();
}

}  // namespace detail

inline std::string csv_row(const VerificationRecord& r) {
  std::string line = r.check;
  line += ',' + std::to_string(r.sample_id);
  line += ',' + detail::opt_field(r.output_index);
  line += ',' + detail::opt_field(r.w);
  line += ',' + detail::opt_field(r.q);
  line += ',' + detail::opt_field(r.j);
  line += ',' + format_double(r.observed);
  line += ',' + format_double(r.bound_resolved);
  line += ',' + format_double(r.bound_uniform);
  line += ',' + format_double(r.margin);
  line += r.violated ? ",1" : ",0";
  return line;
}

inline void write_csv(std::ostream& os, const CampaignReport& report) {
  os << kCsvHeader << '\n';
  for (const auto& r : report.records) os << csv_row(r) << '\n';
}

/// Human-readable campaign summary. Everything except the wall-time line is
/// a function of the config.
inline void write_summary(std::ostream& os, const RunConfig& cfg, const CampaignReport& report) {
  os << "config " << to_json(cfg).dump() << '\n';
  if (report.summaries.empty()) os << "no checks selected\n";
  for (const auto& s : report.summaries) {
    os << s.name << ": samples " << s.samples << ", records " << s.records << ", violations "
       << s.violations;
    if (s.records > 0) {
      os << ", min margin " << format_double(s.min_margin) << ", median margin "
         << format_double(s.median_margin);
    }
    os << '\n';
  }
  if (!report.remainders.empty()) {
    os << "remainder sweep: mean change " << format_double(report.mean_sweep_change)
       << ", worst sample change " << format_double(report.max_sweep_change) << '\n';
  }
  os << "total violations " << report.violations() << '\n';
  char wall[32];
  std::snprintf(wall, sizeof wall, "%.3f", report.wall_seconds);
  os << "wall seconds " << wall << '\n';
}

/// Closed-form bounds at theta_bar for every input norm of the config.
inline void write_bound_table(std::ostream& os, const RunConfig& cfg) {
  const NetworkSpec spec = cfg.spec();
  const std::size_t k = spec.depth();
  const ActivationConstants c = network_constants(spec);
  os << "activation " << to_string(spec.activation()) << ", k " << k << ", theta_bar "
     << format_double(cfg.theta_bar) << '\n';
  os << "constants a1 " << format_double(c.a1) << " a0 " << format_double(c.a0) << " b0 "
     << format_double(c.b0) << " c0 " << format_double(c.c0) << '\n';

  const QuadraticPolynomial poly =
      rho0(BoundContext::uniform(c, k, cfg.theta_bar, 1.0, spec.output_size()));
  os << "rho0 a2 " << format_double(poly.a2) << " a1 " << format_double(poly.a1) << " a0 "
     << format_double(poly.a0) << '\n';

  for (double x : cfg.input_norms) {
    const double s = BoundContext::augmented_norm(x);
    const BoundContext ctx = BoundContext::uniform(c, k, cfg.theta_bar, s, spec.output_size());
    os << "\ninput_norm " << format_double(x) << " (s " << format_double(s) << ")\n";
    for (std::size_t j = 0; j <= k; ++j) {
      os << "layer_output j=" << j << ' ' << format_double(layer_output_bound(j, ctx)) << '\n';
    }
    for (std::size_t j = 1; j <= k; ++j) {
      os << "activation_output j=" << j << ' ' << format_double(activation_output_bound(j, ctx))
         << '\n';
    }
    for (std::size_t j = 0; j <= k; ++j) {
      os << "jacobian_block w=" << k << " j=" << j << ' '
         << format_double(jacobian_block_bound(k, j, ctx)) << '\n';
    }
    os << "full_jacobian " << format_double(full_jacobian_bound(ctx)) << '\n';
    for (std::size_t q = 0; q <= k; ++q) {
      for (std::size_t j = 0; j <= k; ++j) {
        os << "hessian_block q=" << q << " j=" << j << ' '
           << format_double(hessian_block_bound(k, q, j, ctx)) << '\n';
      }
    }
    os << "rho0 " << format_double(poly(x)) << '\n';
  }
}

}  // namespace dnnbounds

#endif  // DNNBOUNDS_REPORT_HPP
