#ifndef DNNBOUNDS_BOUNDS_HPP
#define DNNBOUNDS_BOUNDS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "dnnbounds/activations.hpp"
#include "dnnbounds/network.hpp"
#include "dnnbounds/spectral.hpp"

namespace dnnbounds {

/// Activation constants valid for every hidden layer of `spec`: a0 grows with
/// width, so the widest hidden layer decides it.
inline ActivationConstants network_constants(const NetworkSpec& spec) {
  ActivationConstants out = layer_constants(spec.activation(), spec.width(1));
  for (std::size_t j = 2; j <= spec.depth(); ++j) {
    const ActivationConstants c = layer_constants(spec.activation(), spec.width(j));
    if (c.a0 > out.a0) out = c;
  }
  return out;
}

/// Inputs to every closed-form bound.
///
/// `norms[j]` is an upper bound on ||V_j|| (spectral). A uniform context has
/// every entry equal to theta_bar. `input_norm` is s = ||sigma_a|| >= 1.
struct BoundContext {
  ActivationConstants constants;
  std::vector<double> norms;
  double input_norm = 1.0;
  std::size_t outputs = 1;

  std::size_t depth() const { return norms.size() - 1; }

  static BoundContext uniform(const ActivationConstants& c, std::size_t k, double theta_bar,
                              double input_norm, std::size_t outputs) {
    return BoundContext{c, std::vector<double>(k + 1, theta_bar), input_norm, outputs};
  }

  /// Context carrying the actual spectral norms of `params`.
  static BoundContext resolved(const NetworkSpec& spec, const Parameters& params,
                               double input_norm) {
    check_shapes(spec, params);
    BoundContext ctx{network_constants(spec), {}, input_norm, spec.output_size()};
    for (const auto& m : params.layers) ctx.norms.push_back(exact_spectral_norm(m));
    return ctx;
  }

  /// s = ||[sigma; 1]|| for an input of Euclidean norm `x`.
  static double augmented_norm(double x) { return std::sqrt(x * x + 1.0); }
};

namespace detail {

/// base^e with 0^0 = 1.
inline double ipow(double base, std::size_t e) {
  double r = 1.0;
  for (std::size_t i = 0; i < e; ++i) r *= base;
  return r;
}

/// prod_{l=lo}^{hi} norms[l], empty product 1.
inline double norm_product(const BoundContext& ctx, std::size_t lo, std::size_t hi) {
  double r = 1.0;
  for (std::size_t l = lo; l <= hi && l < ctx.norms.size(); ++l) r *= ctx.norms[l];
  return r;
}

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw std::out_of_range(msg);
}

}  // namespace detail

/// slope * s + intercept
struct Affine {
  double slope = 0.0;
  double intercept = 0.0;
  double operator()(double s) const { return slope * s + intercept; }
};

/// Q_j as an affine function of s = ||sigma_a||. Q_0 = s; for j >= 1
///   a1^j s prod_{i<j} nu_i + a0 sum_{i=1}^{j-1} a1^{j-i} prod_{l=i}^{j-1} nu_l + a0.
inline Affine q_factor_affine(std::size_t j, const BoundContext& ctx) {
  detail::require(j <= ctx.depth(), "q_factor: layer index out of range");
  if (j == 0) return {1.0, 0.0};
  const auto& c = ctx.constants;
  Affine q;
  q.slope = detail::ipow(c.a1, j) * detail::norm_product(ctx, 0, j - 1);
  double sum = 0.0;
  for (std::size_t i = 1; i + 1 <= j; ++i) {
    sum += detail::ipow(c.a1, j - i) * detail::norm_product(ctx, i, j - 1);
  }
  q.intercept = c.a0 * sum + c.a0;
  return q;
}

inline double q_factor(std::size_t j, const BoundContext& ctx) {
  return q_factor_affine(j, ctx)(ctx.input_norm);
}

/// Bound on ||Phi_j||, 0 <= j <= k.
inline double layer_output_bound(std::size_t j, const BoundContext& ctx) {
  detail::require(j <= ctx.depth(), "layer_output_bound: layer index out of range");
  const auto& c = ctx.constants;
  double sum = 0.0;
  for (std::size_t i = 1; i <= j; ++i) {
    sum += detail::ipow(c.a1, j - i) * detail::norm_product(ctx, i, j);
  }
  return detail::ipow(c.a1, j) * ctx.input_norm * detail::norm_product(ctx, 0, j) + c.a0 * sum;
}

/// Bound on ||phi_j(Phi_{j-1})||, 1 <= j <= k. Same quantity as Q_j.
inline double activation_output_bound(std::size_t j, const BoundContext& ctx) {
  detail::require(j >= 1 && j <= ctx.depth(), "activation_output_bound: need 1 <= j <= k");
  return q_factor(j, ctx);
}

/// Bound on ||d Phi_w / d vec(V_j)||: b0^{w-j} prod_{l=j+1}^{w} nu_l Q_j, or 0 for j > w.
inline double jacobian_block_bound(std::size_t w, std::size_t j, const BoundContext& ctx) {
  detail::require(w <= ctx.depth() && j <= ctx.depth(),
                  "jacobian_block_bound: index out of range");
  if (j > w) return 0.0;
  return detail::ipow(ctx.constants.b0, w - j) * detail::norm_product(ctx, j + 1, w) *
         q_factor(j, ctx);
}

/// Triangle-inequality sum of the output-layer block bounds.
inline double full_jacobian_bound(const BoundContext& ctx) {
  const std::size_t k = ctx.depth();
  double total = 0.0;
  for (std::size_t j = 0; j <= k; ++j) total += jacobian_block_bound(k, j, ctx);
  return total;
}

/// Factors of the second-derivative block bound R Q_j Q_q + T Q_j, with the
/// pair already ordered so that q >= j.
struct HessianFactors {
  std::size_t q = 0;
  std::size_t j = 0;
  double q_j = 0.0;
  double q_q = 0.0;
  double t = 0.0;
  double r = 0.0;
};

namespace detail {

/// R_{w,q,j} = (sum_{h=1}^{w-q} c0 b0^{2w-q-j-h-1} prod_{l=q+1}^{w-h} nu_l) prod_{l=j+1}^{w} nu_l
inline double curvature_factor(std::size_t w, std::size_t q, std::size_t j,
                               const BoundContext& ctx) {
  const auto& c = ctx.constants;
  double sum = 0.0;
  for (std::size_t h = 1; h + q <= w; ++h) {
    sum += c.c0 * ipow(c.b0, 2 * w - q - j - h - 1) * norm_product(ctx, q + 1, w - h);
  }
  return sum * norm_product(ctx, j + 1, w);
}

/// Bound on the term produced by differentiating the explicit V_q inside
/// d Phi_w / d vec(V_j). That term is (row of the chain above q) (x)
/// (phi_q' times the chain from j to q-1), so V_q itself drops out:
///   T_{w,q,j} = b0^{w-j} prod_{l=j+1, l!=q}^{w} nu_l   for q > j,
/// and there is no such term when q == j.
inline double mixed_factor(std::size_t w, std::size_t q, std::size_t j,
                           const BoundContext& ctx) {
  if (q == j) return 0.0;
  return ipow(ctx.constants.b0, w - j) * norm_product(ctx, j + 1, q - 1) *
         norm_product(ctx, q + 1, w);
}

}  // namespace detail

inline HessianFactors hessian_factors(std::size_t w, std::size_t q, std::size_t j,
                                      const BoundContext& ctx) {
  detail::require(w <= ctx.depth() && q <= w && j <= w,
                  "hessian_factors: need q, j <= w <= k");
  if (q < j) std::swap(q, j);
  HessianFactors f;
  f.q = q;
  f.j = j;
  f.q_j = q_factor(j, ctx);
  f.q_q = q_factor(q, ctx);
  f.t = detail::mixed_factor(w, q, j, ctx);
  f.r = detail::curvature_factor(w, q, j, ctx);
  return f;
}

/// Bound on ||d^2 Phi_w^(i) / d vec(V_q) d vec(V_j)|| for any single output i.
inline double hessian_block_bound(std::size_t w, std::size_t q, std::size_t j,
                                  const BoundContext& ctx) {
  const HessianFactors f = hessian_factors(w, q, j, ctx);
  return f.r * f.q_j * f.q_q + f.t * f.q_j;
}

/// The mixed-term factor exactly as typeset in the source derivation,
/// b0^{w-j+1} prod_{l=j+1}^{w} nu_l. It keeps ||V_q|| and one extra b0, so
/// it is too small whenever b0 ||V_q|| < 1. Kept for comparison only; the
/// bounds above use detail::mixed_factor.
inline double published_mixed_factor(std::size_t w, std::size_t j, const BoundContext& ctx) {
  return detail::ipow(ctx.constants.b0, w - j + 1) * detail::norm_product(ctx, j + 1, w);
}

/// a2 x^2 + a1 x + a0
struct QuadraticPolynomial {
  double a2 = 0.0;
  double a1 = 0.0;
  double a0 = 0.0;

  double operator()(double x) const { return (a2 * x + a1) * x + a0; }
  bool operator==(const QuadraticPolynomial&) const = default;
};

/// 1/2 sum_i sum_{q=0}^{k} sum_{j=0}^{k} (R Q_j Q_q + T Q_j) evaluated at the
/// context's own s. This is the unexpanded remainder coefficient.
inline double hessian_sum_bound(const BoundContext& ctx) {
  const std::size_t k = ctx.depth();
  double total = 0.0;
  for (std::size_t q = 0; q <= k; ++q) {
    for (std::size_t j = 0; j <= k; ++j) total += hessian_block_bound(k, q, j, ctx);
  }
  return 0.5 * static_cast<double>(ctx.outputs) * total;
}

/// Remainder coefficient as a quadratic in x = ||sigma||.
///
/// Every Q is affine in s = ||sigma_a|| with nonnegative coefficients, so
/// substituting the envelope s <= x + 1 and expanding the triple sum gives
/// nonnegative (a2, a1, a0). The context's own input_norm is ignored.
inline QuadraticPolynomial rho0(const BoundContext& ctx) {
  const std::size_t k = ctx.depth();
  std::vector<Affine> qx(k + 1);
  for (std::size_t j = 0; j <= k; ++j) {
    const Affine q = q_factor_affine(j, ctx);
    qx[j] = {q.slope, q.slope + q.intercept};
  }
  QuadraticPolynomial p;
  for (std::size_t q = 0; q <= k; ++q) {
    for (std::size_t j = 0; j <= k; ++j) {
      const std::size_t hi = std::max(q, j);
      const std::size_t lo = std::min(q, j);
      const double r = detail::curvature_factor(k, hi, lo, ctx);
      const double t = detail::mixed_factor(k, hi, lo, ctx);
      const Affine& a = qx[lo];
      const Affine& b = qx[hi];
      p.a2 += r * a.slope * b.slope;
      p.a1 += r * (a.slope * b.intercept + a.intercept * b.slope) + t * a.slope;
      p.a0 += r * a.intercept * b.intercept + t * a.intercept;
    }
  }
  const double scale = 0.5 * static_cast<double>(ctx.outputs);
  p.a2 *= scale;
  p.a1 *= scale;
  p.a0 *= scale;
  return p;
}

/// rho0(||sigma||) ||theta_tilde||^2
inline double remainder_bound(const QuadraticPolynomial& poly, double sigma_norm,
                              double theta_tilde_norm) {
  return poly(sigma_norm) * theta_tilde_norm * theta_tilde_norm;
}

}  // namespace dnnbounds

#endif  // DNNBOUNDS_BOUNDS_HPP
