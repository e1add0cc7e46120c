#ifndef DNNBOUNDS_VERIFY_HPP
#define DNNBOUNDS_VERIFY_HPP

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dnnbounds/bounds.hpp"
#include "dnnbounds/derivatives.hpp"
#include "dnnbounds/network.hpp"
#include "dnnbounds/rng.hpp"
#include "dnnbounds/spectral.hpp"

namespace dnnbounds {

enum class Check { Layers, Jacobian, Hessian, Remainder };

inline constexpr std::array<Check, 4> kAllChecks = {Check::Layers, Check::Jacobian,
                                                    Check::Hessian, Check::Remainder};

inline std::string_view to_string(Check c) {
  switch (c) {
    case Check::Layers: return "layers";
    case Check::Jacobian: return "jacobian";
    case Check::Hessian: return "hessian";
    case Check::Remainder: return "remainder";
  }
  return "unknown";
}

inline std::optional<Check> parse_check(std::string_view name) {
  for (Check c : kAllChecks) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

struct CampaignConfig {
  NetworkSpec spec;
  double theta_bar = 1.0;
  /// Target ||sigma|| values; sample n uses input_norms[n % size].
  std::vector<double> input_norms{0.0};
  std::size_t samples = 1;
  std::uint64_t seed = 0;
  std::vector<Check> checks;
  /// Multiplies every bound before comparison. Test-only; 1 in real runs.
  double bound_scale = 1.0;

  bool runs(Check c) const { return std::find(checks.begin(), checks.end(), c) != checks.end(); }

  void validate() const {
    if (samples < 1) throw std::invalid_argument("campaign: samples must be >= 1");
    if (!(theta_bar > 0.0) || !std::isfinite(theta_bar)) {
      throw std::invalid_argument("campaign: theta_bar must be positive and finite");
    }
    if (input_norms.empty()) throw std::invalid_argument("campaign: input_norms is empty");
    for (double x : input_norms) {
      if (!(x >= 0.0) || !std::isfinite(x)) {
        throw std::invalid_argument("campaign: input norms must be finite and >= 0");
      }
    }
  }
};

/// Accepts rounding in the norm computations: observed may exceed the bound
/// by at most bound * 1e-12 + 1e-12.
inline bool exceeds(double observed, double bound) {
  return observed > bound * (1.0 + 1e-12) + 1e-12;
}

struct VerificationRecord {
  std::string check;
  std::size_t sample_id = 0;
  std::optional<std::size_t> output_index;
  std::optional<std::size_t> w;
  std::optional<std::size_t> q;
  std::optional<std::size_t> j;
  double observed = 0.0;
  double bound_resolved = 0.0;
  double bound_uniform = 0.0;
  /// bound_resolved - observed
  double margin = 0.0;
  bool violated = false;

  bool operator==(const VerificationRecord&) const = default;
};

inline VerificationRecord make_record(std::string check, std::size_t sample, double observed,
                                      double resolved, double uniform, double scale) {
  VerificationRecord r;
  r.check = std::move(check);
  r.sample_id = sample;
  r.observed = observed;
  r.bound_resolved = resolved * scale;
  r.bound_uniform = uniform * scale;
  r.margin = r.bound_resolved - observed;
  r.violated = exceeds(observed, r.bound_resolved) || exceeds(observed, r.bound_uniform);
  return r;
}

inline constexpr std::array<double, 5> kSweepScales = {1.0, 0.5, 0.25, 0.125, 0.0625};

struct RemainderSample {
  std::size_t sample_id = 0;
  Vector theta_star;
  Vector theta_hat;
  Vector sigma;
  /// Phi(sigma, theta*) - Phi(sigma, theta^) - J(sigma, theta^) theta~
  Vector remainder;
  double theta_tilde_norm = 0.0;
  double bound = 0.0;
  double bound_resolved = 0.0;
  /// ||R_s|| / s^2 for each entry of kSweepScales
  std::array<double, kSweepScales.size()> sweep{};

  double norm() const { return remainder.norm(); }
  bool violated() const { return exceeds(norm(), bound); }

  /// Relative change of ||R_s|| / s^2 between the two smallest scales.
  double sweep_change() const {
    const double a = sweep[sweep.size() - 2];
    const double b = sweep[sweep.size() - 1];
    if (a == 0.0 && b == 0.0) return 0.0;
    return std::abs(b - a) / std::max(a, b);
  }

  bool operator==(const RemainderSample&) const = default;
};

/// Raised for internal inconsistencies; carries the sample id for replay.
class CampaignError : public std::runtime_error {
 public:
  CampaignError(std::size_t sample, const std::string& what)
      : std::runtime_error("sample " + std::to_string(sample) + ": " + what), sample_(sample) {}
  std::size_t sample_id() const { return sample_; }

 private:
  std::size_t sample_;
};

/// Draws V_j with standard-normal entries, then rescales it so that
/// ||V_j|| = u theta_bar with u uniform on (0, 1].
inline Parameters sample_params(const NetworkSpec& spec, double theta_bar, CounterRng& rng) {
  if (!(theta_bar > 0.0)) throw std::invalid_argument("sample_params: theta_bar must be > 0");
  Parameters p = zero_parameters(spec);
  for (auto& m : p.layers) {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
    const double u = rng.uniform();
    const double n = exact_spectral_norm(m);
    if (n > 0.0) m *= u * theta_bar / n;
  }
  return p;
}

/// Standard-normal direction rescaled to Euclidean norm `target`.
inline Vector sample_input(std::size_t size, double target, CounterRng& rng) {
  Vector s(static_cast<Eigen::Index>(size));
  for (Eigen::Index i = 0; i < s.size(); ++i) s[i] = rng.normal();
  const double n = s.norm();
  if (target == 0.0 || n == 0.0) return Vector::Zero(s.size());
  return s * (target / n);
}

namespace detail {

struct SampleDraw {
  Parameters params;
  Vector sigma;
  double sigma_norm;
};

inline SampleDraw draw_sample(const CampaignConfig& cfg, Check check, std::size_t id) {
  CounterRng rng = CounterRng::stream(cfg.seed, static_cast<std::uint64_t>(check), id);
  SampleDraw d;
  d.params = sample_params(cfg.spec, cfg.theta_bar, rng);
  d.sigma_norm = cfg.input_norms[id % cfg.input_norms.size()];
  d.sigma = sample_input(cfg.spec.input_size(), d.sigma_norm, rng);
  return d;
}

inline BoundContext uniform_context(const CampaignConfig& cfg, double s) {
  return BoundContext::uniform(network_constants(cfg.spec), cfg.spec.depth(), cfg.theta_bar, s,
                               cfg.spec.output_size());
}

template <typename Fn>
void for_each_sample(const CampaignConfig& cfg, Fn&& fn) {
  cfg.validate();
  for (std::size_t id = 0; id < cfg.samples; ++id) {
    try {
      fn(id);
    } catch (const CampaignError&) {
      throw;
    } catch (const std::exception& e) {
      throw CampaignError(id, e.what());
    }
  }
}

}  // namespace detail

/// ||Phi_j|| against the layer bound and ||phi_j(Phi_{j-1})|| against the
/// activation bound, per sample.
inline std::vector<VerificationRecord> verify_layer_bounds(const CampaignConfig& cfg) {
  std::vector<VerificationRecord> out;
  const std::size_t k = cfg.spec.depth();
  detail::for_each_sample(cfg, [&](std::size_t id) {
    const auto d = detail::draw_sample(cfg, Check::Layers, id);
    const ForwardTrace t = forward(cfg.spec, d.params, d.sigma);
    const double s = t.augmented.norm();
    const BoundContext res = BoundContext::resolved(cfg.spec, d.params, s);
    const BoundContext uni = detail::uniform_context(cfg, s);
    for (std::size_t j = 0; j <= k; ++j) {
      auto r = make_record("layer_output", id, t.outputs[j].norm(), layer_output_bound(j, res),
                           layer_output_bound(j, uni), cfg.bound_scale);
      r.j = j;
      out.push_back(std::move(r));
    }
    for (std::size_t j = 1; j <= k; ++j) {
      auto r = make_record("activation_output", id, t.activations[j].norm(),
                           activation_output_bound(j, res), activation_output_bound(j, uni),
                           cfg.bound_scale);
      r.j = j;
      out.push_back(std::move(r));
    }
  });
  return out;
}

/// Spectral norms of every output-layer Jacobian block and of the full
/// Jacobian against their bounds.
inline std::vector<VerificationRecord> verify_jacobian_bounds(const CampaignConfig& cfg) {
  std::vector<VerificationRecord> out;
  const std::size_t k = cfg.spec.depth();
  detail::for_each_sample(cfg, [&](std::size_t id) {
    const auto d = detail::draw_sample(cfg, Check::Jacobian, id);
    const ForwardTrace t = forward(cfg.spec, d.params, d.sigma);
    const double s = t.augmented.norm();
    const BoundContext res = BoundContext::resolved(cfg.spec, d.params, s);
    const BoundContext uni = detail::uniform_context(cfg, s);
    const DerivativeTable table(t, d.params);
    Matrix full(static_cast<Eigen::Index>(cfg.spec.output_size()),
                static_cast<Eigen::Index>(cfg.spec.parameter_count()));
    Eigen::Index off = 0;
    for (std::size_t j = 0; j <= k; ++j) {
      const Matrix& block = table.jacobian(k, j);
      full.middleCols(off, block.cols()) = block;
      off += block.cols();
      auto r = make_record("jacobian_block", id, spectral_norm(block),
                           jacobian_block_bound(k, j, res), jacobian_block_bound(k, j, uni),
                           cfg.bound_scale);
      r.w = k;
      r.j = j;
      out.push_back(std::move(r));
    }
    auto r = make_record("full_jacobian", id, spectral_norm(full), full_jacobian_bound(res),
                         full_jacobian_bound(uni), cfg.bound_scale);
    r.w = k;
    out.push_back(std::move(r));
  });
  return out;
}

/// Spectral norm of every block d^2 Phi^(i) / d vec(V_q) d vec(V_j) against
/// the block bound. The (q, j) and (j, q) blocks are transposes, so the norm
/// is computed once per unordered pair.
inline std::vector<VerificationRecord> verify_hessian_bounds(const CampaignConfig& cfg) {
  std::vector<VerificationRecord> out;
  const std::size_t k = cfg.spec.depth();
  const std::size_t n_out = cfg.spec.output_size();
  detail::for_each_sample(cfg, [&](std::size_t id) {
    const auto d = detail::draw_sample(cfg, Check::Hessian, id);
    const ForwardTrace t = forward(cfg.spec, d.params, d.sigma);
    const double s = t.augmented.norm();
    const BoundContext res = BoundContext::resolved(cfg.spec, d.params, s);
    const BoundContext uni = detail::uniform_context(cfg, s);
    const DerivativeTable table(t, d.params);
    std::vector<double> norms((k + 1) * (k + 1));
    for (std::size_t i = 0; i < n_out; ++i) {
      for (std::size_t q = 0; q <= k; ++q) {
        for (std::size_t j = 0; j <= q; ++j) {
          const double n = (q == k && j == k) ? 0.0 : spectral_norm(table.hessian(i, q, j));
          norms[q * (k + 1) + j] = n;
          norms[j * (k + 1) + q] = n;
        }
      }
      for (std::size_t q = 0; q <= k; ++q) {
        for (std::size_t j = 0; j <= k; ++j) {
          auto r = make_record("hessian_block", id, norms[q * (k + 1) + j],
                               hessian_block_bound(k, q, j, res),
                               hessian_block_bound(k, q, j, uni), cfg.bound_scale);
          r.output_index = i;
          r.w = k;
          r.q = q;
          r.j = j;
          out.push_back(std::move(r));
        }
      }
    }
  });
  return out;
}

/// Taylor remainder of theta -> Phi(sigma, theta) around theta^ toward theta*.
inline Vector taylor_remainder(const NetworkSpec& spec, const Parameters& theta_star,
                               const Parameters& theta_hat, const Vector& sigma) {
  const ForwardTrace at_hat = forward(spec, theta_hat, sigma);
  const Vector step = flatten(theta_star) - flatten(theta_hat);
  return evaluate(spec, theta_star, sigma) - at_hat.output() -
         full_jacobian(at_hat, theta_hat) * step;
}

/// Remainder samples with both bounds and the scaling sweep. The resolved
/// bound evaluates the block bounds with nu_j = max(||V*_j||, ||V^_j||), which
/// covers every point on the segment between the two parameter sets.
inline std::vector<RemainderSample> verify_remainder(const CampaignConfig& cfg) {
  std::vector<RemainderSample> out;
  const NetworkSpec& spec = cfg.spec;
  const QuadraticPolynomial poly = rho0(detail::uniform_context(cfg, 1.0));
  detail::for_each_sample(cfg, [&](std::size_t id) {
    CounterRng rng = CounterRng::stream(cfg.seed, static_cast<std::uint64_t>(Check::Remainder), id);
    const Parameters star = sample_params(spec, cfg.theta_bar, rng);
    const Parameters hat = sample_params(spec, cfg.theta_bar, rng);
    const double x = cfg.input_norms[id % cfg.input_norms.size()];
    const Vector sigma = sample_input(spec.input_size(), x, rng);

    RemainderSample rs;
    rs.sample_id = id;
    rs.theta_star = flatten(star);
    rs.theta_hat = flatten(hat);
    rs.sigma = sigma;

    const ForwardTrace at_hat = forward(spec, hat, sigma);
    const Matrix jac = full_jacobian(at_hat, hat);
    const Vector tilde = rs.theta_star - rs.theta_hat;
    rs.theta_tilde_norm = tilde.norm();

    for (std::size_t n = 0; n < kSweepScales.size(); ++n) {
      const double scale = kSweepScales[n];
      const Parameters mid = unflatten(rs.theta_hat + scale * tilde, spec);
      for (std::size_t l = 0; l < mid.size(); ++l) {
        if (exceeds(exact_spectral_norm(mid[l]), cfg.theta_bar)) {
          throw CampaignError(id, "segment point left the admissible set at layer " +
                                      std::to_string(l));
        }
      }
      const Vector r = evaluate(spec, mid, sigma) - at_hat.output() - scale * (jac * tilde);
      if (n == 0) rs.remainder = r;
      rs.sweep[n] = r.norm() / (scale * scale);
    }

    BoundContext res = BoundContext::resolved(spec, star, BoundContext::augmented_norm(x));
    for (std::size_t l = 0; l < hat.size(); ++l) {
      res.norms[l] = std::max(res.norms[l], exact_spectral_norm(hat[l]));
    }
    const double t2 = rs.theta_tilde_norm * rs.theta_tilde_norm;
    rs.bound = remainder_bound(poly, x, rs.theta_tilde_norm) * cfg.bound_scale;
    rs.bound_resolved = hessian_sum_bound(res) * t2 * cfg.bound_scale;
    out.push_back(std::move(rs));
  });
  return out;
}

/// Relative change of the sample-mean ||R_s|| / s^2 between the two
/// smallest scales.
inline double mean_sweep_change(const std::vector<RemainderSample>& samples) {
  if (samples.empty()) return 0.0;
  RemainderSample mean;
  for (const auto& rs : samples) {
    for (std::size_t n = 0; n < rs.sweep.size(); ++n) mean.sweep[n] += rs.sweep[n];
  }
  return mean.sweep_change();
}

inline VerificationRecord to_record(const RemainderSample& rs) {
  return make_record("remainder", rs.sample_id, rs.norm(), rs.bound_resolved, rs.bound, 1.0);
}

struct CheckSummary {
  std::string name;
  std::size_t samples = 0;
  std::size_t records = 0;
  std::size_t violations = 0;
  double min_margin = 0.0;
  double median_margin = 0.0;

  bool operator==(const CheckSummary&) const = default;
};

struct CampaignReport {
  std::vector<CheckSummary> summaries;
  std::vector<VerificationRecord> records;
  std::vector<RemainderSample> remainders;
  /// Largest sweep_change() over the remainder samples.
  double max_sweep_change = 0.0;
  /// Relative change between the two smallest scales of the mean ||R_s|| / s^2.
  double mean_sweep_change = 0.0;
  double wall_seconds = 0.0;

  std::size_t violations() const {
    std::size_t n = 0;
    for (const auto& s : summaries) n += s.violations;
    return n;
  }

  /// Equality of everything except wall time.
  bool same_results(const CampaignReport& o) const {
    return summaries == o.summaries && records == o.records && remainders == o.remainders &&
           max_sweep_change == o.max_sweep_change && mean_sweep_change == o.mean_sweep_change;
  }
};

namespace detail {

inline CheckSummary summarize(std::string name, std::size_t samples,
                              const std::vector<VerificationRecord>& records, std::size_t from) {
  CheckSummary s;
  s.name = std::move(name);
  s.samples = samples;
  s.records = records.size() - from;
  std::vector<double> margins;
  margins.reserve(s.records);
  for (std::size_t n = from; n < records.size(); ++n) {
    margins.push_back(records[n].margin);
    if (records[n].violated) ++s.violations;
  }
  if (!margins.empty()) {
    std::sort(margins.begin(), margins.end());
    s.min_margin = margins.front();
    const std::size_t mid = margins.size() / 2;
    s.median_margin =
        margins.size() % 2 ? margins[mid] : 0.5 * (margins[mid - 1] + margins[mid]);
  }
  return s;
}

}  // namespace detail

/// Runs the selected checks in the fixed order layers, jacobian, hessian,
/// remainder. The result depends only on the config.
inline CampaignReport run_campaign(const CampaignConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  CampaignReport report;
  if (cfg.checks.empty()) return report;
  cfg.validate();

  auto append = [&](Check c, std::vector<VerificationRecord> recs) {
    const std::size_t from = report.records.size();
    report.records.insert(report.records.end(), std::make_move_iterator(recs.begin()),
                          std::make_move_iterator(recs.end()));
    report.summaries.push_back(
        detail::summarize(std::string(to_string(c)), cfg.samples, report.records, from));
  };

  if (cfg.runs(Check::Layers)) append(Check::Layers, verify_layer_bounds(cfg));
  if (cfg.runs(Check::Jacobian)) append(Check::Jacobian, verify_jacobian_bounds(cfg));
  if (cfg.runs(Check::Hessian)) append(Check::Hessian, verify_hessian_bounds(cfg));
  if (cfg.runs(Check::Remainder)) {
    report.remainders = verify_remainder(cfg);
    report.mean_sweep_change = mean_sweep_change(report.remainders);
    std::vector<VerificationRecord> recs;
    for (const auto& rs : report.remainders) {
      recs.push_back(to_record(rs));
      report.max_sweep_change = std::max(report.max_sweep_change, rs.sweep_change());
    }
    append(Check::Remainder, std::move(recs));
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace dnnbounds

#endif  // DNNBOUNDS_VERIFY_HPP
