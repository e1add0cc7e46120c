#ifndef DNNBOUNDS_ACTIVATIONS_HPP
#define DNNBOUNDS_ACTIVATIONS_HPP

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace dnnbounds {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class ActivationKind { Tanh, Logistic, Swish };

inline std::string_view to_string(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::Tanh: return "tanh";
    case ActivationKind::Logistic: return "logistic";
    case ActivationKind::Swish: return "swish";
  }
  return "unknown";
}

inline std::optional<ActivationKind> parse_activation(std::string_view name) {
  if (name == "tanh") return ActivationKind::Tanh;
  if (name == "logistic") return ActivationKind::Logistic;
  if (name == "swish") return ActivationKind::Swish;
  return std::nullopt;
}

namespace detail {

inline double logistic(double x) {
  // split by sign so exp never overflows
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace detail

/// Scalar activation value and its first two derivatives at `x`.
struct ScalarActivation {
  double value;
  double first;
  double second;
};

inline ScalarActivation eval_scalar(ActivationKind kind, double x) {
  switch (kind) {
    case ActivationKind::Tanh: {
      const double t = std::tanh(x);
      const double d = 1.0 - t * t;
      return {t, d, -2.0 * t * d};
    }
    case ActivationKind::Logistic: {
      const double s = detail::logistic(x);
      const double d = s * (1.0 - s);
      return {s, d, d * (1.0 - 2.0 * s)};
    }
    case ActivationKind::Swish: {
      const double s = detail::logistic(x);
      const double ds = s * (1.0 - s);
      return {x * s, s + x * ds, ds * (2.0 + x * (1.0 - 2.0 * s))};
    }
  }
  throw std::invalid_argument("unknown activation kind");
}

/// Elementwise envelope of a scalar activation:
///   |f(x)| <= slope * |x| + offset,  sup|f'| = d0,  sup|f''| = e0.
///
/// Values come from tools/activation_constants.py (dense grid, step 1e-3, then
/// golden-section refinement) and are rounded up in the last printed digit.
/// For swish the offset is sup|swish(x) - relu(x)|, attained at |x| ~ 1.2785.
struct ElementwiseEnvelope {
  double slope;
  double offset;
  double d0;
  double e0;
};

inline ElementwiseEnvelope envelope(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::Tanh:
      // e0 = 4 / (3 sqrt 3) at x = -asinh(1/sqrt2)
      return {0.0, 1.0, 1.0, 0.769800358919502};
    case ActivationKind::Logistic:
      // e0 = 1 / (6 sqrt 3)
      return {0.0, 1.0, 0.25, 0.0962250448649377};
    case ActivationKind::Swish:
      return {1.0, 0.278464542761074, 1.09983932012887, 0.5};
  }
  throw std::invalid_argument("unknown activation kind");
}

/// Bound constants for the width-L augmented activation vector:
///   ||phi(y)|| <= a1 ||y|| + a0,  ||phi'(y)|| <= b0,  ||phi''(y)|| <= c0.
struct ActivationConstants {
  double a1 = 0.0;
  double a0 = 0.0;
  double b0 = 0.0;
  double c0 = 0.0;
  std::size_t width = 0;
};

/// The appended bias slot contributes 1 to ||phi||; the remaining L-1 slots
/// contribute at most offset * sqrt(L-1) beyond the slope term.
inline ActivationConstants layer_constants(ActivationKind kind, std::size_t width) {
  if (width < 1) throw std::invalid_argument("layer_constants: width must be >= 1");
  const ElementwiseEnvelope env = envelope(kind);
  ActivationConstants c;
  c.a1 = env.slope;
  c.a0 = std::sqrt(env.offset * env.offset * static_cast<double>(width - 1) + 1.0);
  c.b0 = env.d0;
  c.c0 = env.e0;
  c.width = width;
  return c;
}

/// Result of applying phi_j to a pre-activation vector: values, and the
/// diagonals of phi_j' and phi_j''. The last slot is the bias constant.
struct LayerActivation {
  Vector value;
  Vector first;
  Vector second;
};

inline LayerActivation eval_layer_activation(ActivationKind kind, const Vector& y) {
  const Eigen::Index n = y.size();
  if (n < 1) throw std::invalid_argument("eval_layer_activation: width must be >= 1");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(y[i])) {
      throw std::domain_error("eval_layer_activation: non-finite input at index " +
                              std::to_string(i));
    }
  }
  LayerActivation out{Vector(n), Vector(n), Vector(n)};
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const ScalarActivation s = eval_scalar(kind, y[i]);
    out.value[i] = s.value;
    out.first[i] = s.first;
    out.second[i] = s.second;
  }
  out.value[n - 1] = 1.0;
  out.first[n - 1] = 0.0;
  out.second[n - 1] = 0.0;
  return out;
}

}  // namespace dnnbounds

#endif  // DNNBOUNDS_ACTIVATIONS_HPP
