#ifndef DNNBOUNDS_SPECTRAL_HPP
#define DNNBOUNDS_SPECTRAL_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include <Eigen/Dense>

namespace dnnbounds {

struct SpectralNorm {
  double value = 0.0;
  int iterations = 0;
  /// false when the iteration cap was hit before the tolerance was met
  bool converged = true;
};

struct PowerIterationOptions {
  double tolerance = 1e-10;
  int max_iterations = 10000;
  /// Number of vectors iterated together. 1 is the classic power method;
  /// larger blocks converge at rate lambda_{b+1} / lambda_1 instead of
  /// lambda_2 / lambda_1, which matters for clustered top singular values.
  int block_size = 8;
};

namespace detail {

/// Deterministic start block (xorshift64 fill, entries in [0.5, 1.5)).
inline Eigen::MatrixXd start_block(Eigen::Index n, Eigen::Index b) {
  Eigen::MatrixXd v(n, b);
  std::uint64_t x = 0x2545F4914F6CDD1DULL;
  for (Eigen::Index c = 0; c < b; ++c) {
    for (Eigen::Index i = 0; i < n; ++i) {
      x ^= x << 13;
      x ^= x >> 7;
      x ^= x << 17;
      v(i, c) = 0.5 + static_cast<double>(x >> 11) * 0x1.0p-53;
    }
  }
  return v;
}

inline Eigen::MatrixXd orthonormal_columns(const Eigen::MatrixXd& w) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(w);
  return qr.householderQ() * Eigen::MatrixXd::Identity(w.rows(), w.cols());
}

}  // namespace detail

/// Largest singular value by (block) power iteration on the smaller Gram
/// matrix, M^T M or M M^T. Each step multiplies the block by the Gram matrix,
/// re-orthonormalizes it, and takes the largest Ritz value of the projected
/// Gram matrix; iteration stops when that value changes by at most
/// `tolerance` relative. The Ritz value never exceeds the true eigenvalue.
inline SpectralNorm spectral_norm_ex(const Eigen::MatrixXd& m,
                                     const PowerIterationOptions& opts = {}) {
  if (!m.allFinite()) throw std::domain_error("spectral_norm: non-finite matrix");
  SpectralNorm out;
  if (m.size() == 0) return out;
  const double scale = m.cwiseAbs().maxCoeff();
  if (scale == 0.0) return out;

  // Normalize first so squaring inside the Gram matrix cannot overflow.
  const Eigen::MatrixXd a = m / scale;
  const Eigen::MatrixXd gram =
      a.rows() < a.cols() ? Eigen::MatrixXd(a * a.transpose()) : Eigen::MatrixXd(a.transpose() * a);
  const Eigen::Index n = gram.rows();
  const Eigen::Index b = std::clamp<Eigen::Index>(opts.block_size, 1, n);

  Eigen::MatrixXd v = detail::orthonormal_columns(detail::start_block(n, b));
  Eigen::MatrixXd w(n, b);
  double lambda = 0.0;
  out.converged = false;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    out.iterations = it;
    w.noalias() = gram * v;
    const Eigen::MatrixXd projected = v.transpose() * w;
    double next = 0.0;
    if (b == 1) {
      next = projected(0, 0);
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(projected, Eigen::EigenvaluesOnly);
      next = es.eigenvalues().maxCoeff();
    }
    if (w.norm() == 0.0) {
      // start block inside the null space: restart on the heaviest column
      Eigen::Index best = 0;
      gram.diagonal().maxCoeff(&best);
      v.setZero();
      for (Eigen::Index c = 0; c < b; ++c) v((best + c) % n, c) = 1.0;
      continue;
    }
    const bool done = std::abs(next - lambda) <= opts.tolerance * std::abs(next);
    lambda = std::max(lambda, next);
    if (done) {
      out.converged = true;
      break;
    }
    v = detail::orthonormal_columns(w);
  }
  out.value = scale * std::sqrt(std::max(lambda, 0.0));
  return out;
}

inline double spectral_norm(const Eigen::MatrixXd& m) { return spectral_norm_ex(m).value; }

/// Largest singular value from a full two-sided Jacobi SVD. Used where the
/// norm feeds a bound as an upper estimate (power iteration approaches the
/// true value from below).
inline double exact_spectral_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()[0];
}

}  // namespace dnnbounds

#endif  // DNNBOUNDS_SPECTRAL_HPP
