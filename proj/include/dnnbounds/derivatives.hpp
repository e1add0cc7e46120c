#ifndef DNNBOUNDS_DERIVATIVES_HPP
#define DNNBOUNDS_DERIVATIVES_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dnnbounds/network.hpp"

namespace dnnbounds {

namespace detail {

inline void check_layer_index(std::size_t idx, std::size_t k, const char* what) {
  if (idx > k) {
    throw std::out_of_range(std::string(what) + " index " + std::to_string(idx) +
                            " out of range [0, " + std::to_string(k) + "]");
  }
}

inline void check_consistent(const ForwardTrace& trace, const Parameters& params) {
  if (trace.outputs.empty() || params.size() != trace.outputs.size()) {
    throw std::invalid_argument("trace and parameters disagree on depth");
  }
}

}  // namespace detail

/// M (I_n (x) v^T) for an m x n matrix M: column block c is M.col(c) v^T.
inline Matrix kron_identity_row(const Matrix& m, const Vector& v) {
  const Eigen::Index len = v.size();
  Matrix out(m.rows(), m.cols() * len);
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    out.middleCols(c * len, len).noalias() = m.col(c) * v.transpose();
  }
  return out;
}

/// Kronecker product of a column vector with a matrix.
inline Matrix kron(const Vector& a, const Matrix& b) {
  Matrix out(a.size() * b.rows(), b.cols());
  for (Eigen::Index c = 0; c < a.size(); ++c) {
    out.middleRows(c * b.rows(), b.rows()) = a[c] * b;
  }
  return out;
}

/// Right-to-left product V_w^T phi_w' ... V_{j+1}^T phi_{j+1}', an
/// L_{w+1} x L_{j+1} matrix. Identity when w == j.
inline Matrix chain_product(const ForwardTrace& trace, const Parameters& params, std::size_t w,
                            std::size_t j) {
  if (j > w) throw std::invalid_argument("chain_product: requires j <= w");
  Matrix p = Matrix::Identity(params[j].cols(), params[j].cols());
  for (std::size_t l = j + 1; l <= w; ++l) {
    p = params[l].transpose() * (trace.first[l].asDiagonal() * p);
  }
  return p;
}

/// d Phi_w / d vec(V_j), shape L_{w+1} x (L_j L_{j+1}). Zero for j > w.
inline Matrix jacobian_block(const ForwardTrace& trace, const Parameters& params, std::size_t w,
                             std::size_t j) {
  detail::check_consistent(trace, params);
  const std::size_t k = trace.depth();
  detail::check_layer_index(w, k, "layer");
  detail::check_layer_index(j, k, "weight layer");
  if (j > w) return Matrix::Zero(params[w].cols(), params[j].size());
  return kron_identity_row(chain_product(trace, params, w, j), trace.activations[j]);
}

/// d Phi / d theta, shape L_out x p, blocks in flatten order.
inline Matrix full_jacobian(const ForwardTrace& trace, const Parameters& params) {
  detail::check_consistent(trace, params);
  const std::size_t k = trace.depth();
  Eigen::Index cols = 0;
  for (const auto& m : params.layers) cols += m.size();
  Matrix jac(params[k].cols(), cols);
  Eigen::Index off = 0;
  for (std::size_t j = 0; j <= k; ++j) {
    jac.middleCols(off, params[j].size()) = jacobian_block(trace, params, k, j);
    off += params[j].size();
  }
  return jac;
}

/// All chain products P_{w,j} and Jacobian blocks J_{w,j} = dPhi_w/dvec(V_j)
/// for j <= w, computed once per trace. Second-derivative blocks are
/// assembled from these.
class DerivativeTable {
 public:
  DerivativeTable(const ForwardTrace& trace, const Parameters& params)
      : trace_(&trace), params_(&params) {
    detail::check_consistent(trace, params);
    const std::size_t k = trace.depth();
    chain_.assign(k + 1, std::vector<Matrix>(k + 1));
    jac_.assign(k + 1, std::vector<Matrix>(k + 1));
    for (std::size_t j = 0; j <= k; ++j) {
      const auto n = params[j].cols();
      chain_[j][j] = Matrix::Identity(n, n);
      for (std::size_t w = j + 1; w <= k; ++w) {
        chain_[w][j] = params[w].transpose() * (trace.first[w].asDiagonal() * chain_[w - 1][j]);
      }
      for (std::size_t w = j; w <= k; ++w) {
        jac_[w][j] = kron_identity_row(chain_[w][j], trace.activations[j]);
      }
    }
  }

  std::size_t depth() const { return trace_->depth(); }
  const Matrix& chain(std::size_t w, std::size_t j) const { return chain_[w][j]; }
  const Matrix& jacobian(std::size_t w, std::size_t j) const { return jac_[w][j]; }

  /// Product-rule expansion of d^2 Phi_k^(i) / d vec(V_q) d vec(V_j) for any
  /// ordering of (q, j). The curvature terms come from every phi_m' with
  /// m > max(q, j), each contracted as a row scaling; the mixed term comes
  /// from the explicit V_max(q,j) in the chain (q != j only).
  Matrix hessian_expanded(std::size_t i, std::size_t q, std::size_t j) const {
    const std::size_t k = depth();
    const ForwardTrace& t = *trace_;
    const Parameters& p = *params_;
    check_output(i);
    detail::check_layer_index(q, k, "weight layer q");
    detail::check_layer_index(j, k, "weight layer j");

    Matrix h = Matrix::Zero(p[q].size(), p[j].size());
    const std::size_t top = std::max(q, j);
    for (std::size_t m = top + 1; m <= k; ++m) {
      // alpha = V_m P_{k,m}^T e_i: sensitivity of output i to phi_m
      const Vector alpha = p[m] * chain_[k][m].row(static_cast<Eigen::Index>(i)).transpose();
      const Vector scale = alpha.cwiseProduct(t.second[m]);
      h.noalias() += jac_[m - 1][q].transpose() * (scale.asDiagonal() * jac_[m - 1][j]);
    }
    if (q > j) {
      const Vector alpha = chain_[k][q].row(static_cast<Eigen::Index>(i)).transpose();
      const Matrix gamma = t.first[q].asDiagonal() * jac_[q - 1][j];
      h += kron(alpha, gamma);
    } else if (q < j) {
      const Vector alpha = chain_[k][j].row(static_cast<Eigen::Index>(i)).transpose();
      const Matrix gamma = t.first[j].asDiagonal() * jac_[j - 1][q];
      h += kron(alpha, gamma).transpose();
    }
    return h;
  }

  /// Hessian block with q < j obtained from the (j, q) block by symmetry.
  /// Diagonal blocks are symmetrized so that the transpose identity holds
  /// bitwise, not just up to rounding.
  Matrix hessian(std::size_t i, std::size_t q, std::size_t j) const {
    if (q < j) return hessian_expanded(i, j, q).transpose();
    if (q == j) {
      const Matrix h = hessian_expanded(i, q, q);
      return 0.5 * (h + h.transpose());
    }
    return hessian_expanded(i, q, j);
  }

 private:
  void check_output(std::size_t i) const {
    const auto n = static_cast<std::size_t>(params_->layers.back().cols());
    if (i >= n) {
      throw std::out_of_range("output index " + std::to_string(i) + " out of range [0, " +
                              std::to_string(n) + ")");
    }
  }

  const ForwardTrace* trace_;
  const Parameters* params_;
  std::vector<std::vector<Matrix>> chain_;
  std::vector<std::vector<Matrix>> jac_;
};

/// d^2 Phi_k^(i) / d vec(V_q) d vec(V_j), shape (L_q L_{q+1}) x (L_j L_{j+1}).
/// `i` is zero-based.
inline Matrix hessian_block_analytic(const ForwardTrace& trace, const Parameters& params,
                                     std::size_t i, std::size_t q, std::size_t j) {
  return DerivativeTable(trace, params).hessian(i, q, j);
}

// Finite-difference oracles. They only call forward() and never touch the
// analytic derivative code.

inline constexpr double kJacobianStep = 1e-6;
inline const double kHessianStep = std::cbrt(std::numeric_limits<double>::epsilon());

namespace detail {

inline void warn_small_step(double h, const char* who) {
  if (h < 1e-10) {
    std::clog << "warning: " << who << ": step " << h
              << " is below 1e-10, cancellation will dominate\n";
  }
}

inline double scaled_step(double h, double x) { return h * std::max(1.0, std::abs(x)); }

}  // namespace detail

/// Central differences of Phi over theta with step h * max(1, |theta_r|).
/// Truncation error O(h^2).
inline Matrix fd_jacobian(const NetworkSpec& spec, const Parameters& params, const Vector& sigma,
                          double h = kJacobianStep) {
  if (!(h > 0.0)) throw std::invalid_argument("fd_jacobian: step must be positive");
  detail::warn_small_step(h, "fd_jacobian");
  Vector theta = flatten(params);
  const auto n = static_cast<Eigen::Index>(spec.output_size());
  Matrix jac(n, theta.size());
  for (Eigen::Index r = 0; r < theta.size(); ++r) {
    const double x = theta[r];
    const double step = detail::scaled_step(h, x);
    const double xp = x + step;
    const double xm = x - step;
    theta[r] = xp;
    const Vector fp = evaluate(spec, unflatten(theta, spec), sigma);
    theta[r] = xm;
    const Vector fm = evaluate(spec, unflatten(theta, spec), sigma);
    theta[r] = x;
    jac.col(r) = (fp - fm) / (xp - xm);
  }
  return jac;
}

/// Second-order central differences of Phi^(i) over vec(V_q) x vec(V_j):
///   [f(++) - f(+-) - f(-+) + f(--)] / (4 h_a h_b)
/// with h = h_scale * max(1, |theta_r|). Truncation error O(h^2).
inline Matrix fd_hessian_block(const NetworkSpec& spec, const Parameters& params,
                               const Vector& sigma, std::size_t i, std::size_t q, std::size_t j,
                               double h = kHessianStep) {
  if (!(h > 0.0)) throw std::invalid_argument("fd_hessian_block: step must be positive");
  detail::warn_small_step(h, "fd_hessian_block");
  const std::size_t k = spec.depth();
  detail::check_layer_index(q, k, "weight layer q");
  detail::check_layer_index(j, k, "weight layer j");
  if (i >= spec.output_size()) throw std::out_of_range("fd_hessian_block: output index");

  Vector theta = flatten(params);
  const auto row = static_cast<Eigen::Index>(i);
  const auto off_q = static_cast<Eigen::Index>(spec.layer_offset(q));
  const auto off_j = static_cast<Eigen::Index>(spec.layer_offset(j));
  const auto nq = static_cast<Eigen::Index>(spec.layer_size(q));
  const auto nj = static_cast<Eigen::Index>(spec.layer_size(j));

  auto f = [&](const Vector& th) { return evaluate(spec, unflatten(th, spec), sigma)[row]; };

  Matrix out(nq, nj);
  for (Eigen::Index a = 0; a < nq; ++a) {
    const Eigen::Index ra = off_q + a;
    for (Eigen::Index b = 0; b < nj; ++b) {
      const Eigen::Index rb = off_j + b;
      const double xa = theta[ra];
      const double ha = detail::scaled_step(h, xa);
      const double xb = theta[rb];
      const double hb = detail::scaled_step(h, xb);
      auto at = [&](double sa, double sb) {
        Vector th = theta;
        th[ra] += sa * ha;
        th[rb] += sb * hb;
        return f(th);
      };
      out(a, b) = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * ha * hb);
    }
  }
  return out;
}

/// Same stencil as fd_hessian_block over all of theta, for every output at
/// once: entry i is the p x p Hessian of output i. Only the upper triangle
/// is differenced; the lower is mirrored.
inline std::vector<Matrix> fd_hessian(const NetworkSpec& spec, const Parameters& params,
                                      const Vector& sigma, double h = kHessianStep) {
  if (!(h > 0.0)) throw std::invalid_argument("fd_hessian: step must be positive");
  detail::warn_small_step(h, "fd_hessian");
  Vector theta = flatten(params);
  const Eigen::Index p = theta.size();
  const auto n_out = static_cast<Eigen::Index>(spec.output_size());
  std::vector<Matrix> out(static_cast<std::size_t>(n_out), Matrix(p, p));
  auto f = [&]() { return evaluate(spec, unflatten(theta, spec), sigma); };
  for (Eigen::Index a = 0; a < p; ++a) {
    const double xa = theta[a];
    const double ha = detail::scaled_step(h, xa);
    for (Eigen::Index b = a; b < p; ++b) {
      const double xb = theta[b];
      const double hb = detail::scaled_step(h, xb);
      auto at = [&](double sa, double sb) {
        theta[a] += sa * ha;
        theta[b] += sb * hb;
        Vector v = f();
        theta[a] = xa;
        theta[b] = xb;
        return v;
      };
      const Vector d = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * ha * hb);
      for (Eigen::Index i = 0; i < n_out; ++i) {
        out[static_cast<std::size_t>(i)](a, b) = d[i];
        out[static_cast<std::size_t>(i)](b, a) = d[i];
      }
    }
  }
  return out;
}

}  // namespace dnnbounds

#endif  // DNNBOUNDS_DERIVATIVES_HPP
