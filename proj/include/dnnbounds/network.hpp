#ifndef DNNBOUNDS_NETWORK_HPP
#define DNNBOUNDS_NETWORK_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dnnbounds/activations.hpp"

namespace dnnbounds {

/// Architecture of a fully-connected network with k hidden layers.
///
/// `widths` holds L_0 .. L_{k+1}. L_0 = L_in + 1 counts the bias slot of the
/// augmented input, and every hidden width L_j (1 <= j <= k) likewise counts
/// the constant bias slot appended by phi_j. Layer j maps through the matrix
/// V_j of shape L_j x L_{j+1}.
class NetworkSpec {
 public:
  NetworkSpec(std::vector<std::size_t> widths, ActivationKind activation)
      : widths_(std::move(widths)), activation_(activation) {
    if (widths_.size() < 3) {
      throw std::invalid_argument("NetworkSpec: need at least one hidden layer (k >= 1)");
    }
    if (widths_.front() < 2) {
      throw std::invalid_argument("NetworkSpec: L_0 must be >= 2 (one input plus bias slot)");
    }
    for (std::size_t j = 0; j < widths_.size(); ++j) {
      if (widths_[j] < 1) {
        throw std::invalid_argument("NetworkSpec: width L_" + std::to_string(j) +
                                    " must be >= 1");
      }
    }
  }

  /// Number of hidden layers k.
  std::size_t depth() const { return widths_.size() - 2; }
  std::size_t width(std::size_t j) const { return widths_.at(j); }
  const std::vector<std::size_t>& widths() const { return widths_; }
  std::size_t input_size() const { return widths_.front() - 1; }
  std::size_t output_size() const { return widths_.back(); }
  ActivationKind activation() const { return activation_; }

  /// Parameter count of V_j.
  std::size_t layer_size(std::size_t j) const { return widths_.at(j) * widths_.at(j + 1); }

  /// Offset of vec(V_j) inside theta.
  std::size_t layer_offset(std::size_t j) const {
    std::size_t off = 0;
    for (std::size_t l = 0; l < j; ++l) off += layer_size(l);
    return off;
  }

  /// Total parameter count p.
  std::size_t parameter_count() const { return layer_offset(depth() + 1); }

  bool operator==(const NetworkSpec&) const = default;

 private:
  std::vector<std::size_t> widths_;
  ActivationKind activation_;
};

/// Weight-and-bias matrices V_0 .. V_k.
struct Parameters {
  std::vector<Matrix> layers;

  std::size_t size() const { return layers.size(); }
  const Matrix& operator[](std::size_t j) const { return layers[j]; }
  Matrix& operator[](std::size_t j) { return layers[j]; }

  bool operator==(const Parameters& other) const {
    if (layers.size() != other.layers.size()) return false;
    for (std::size_t j = 0; j < layers.size(); ++j) {
      if (layers[j].rows() != other.layers[j].rows() ||
          layers[j].cols() != other.layers[j].cols() || layers[j] != other.layers[j]) {
        return false;
      }
    }
    return true;
  }
};

inline void check_shapes(const NetworkSpec& spec, const Parameters& params) {
  if (params.size() != spec.depth() + 1) {
    throw std::invalid_argument("parameters: expected " + std::to_string(spec.depth() + 1) +
                                " layers, got " + std::to_string(params.size()));
  }
  for (std::size_t j = 0; j < params.size(); ++j) {
    const auto rows = static_cast<Eigen::Index>(spec.width(j));
    const auto cols = static_cast<Eigen::Index>(spec.width(j + 1));
    if (params[j].rows() != rows || params[j].cols() != cols) {
      throw std::invalid_argument("parameters: V_" + std::to_string(j) + " has shape " +
                                  std::to_string(params[j].rows()) + "x" +
                                  std::to_string(params[j].cols()) + ", expected " +
                                  std::to_string(rows) + "x" + std::to_string(cols));
    }
  }
}

inline Parameters zero_parameters(const NetworkSpec& spec) {
  Parameters p;
  for (std::size_t j = 0; j <= spec.depth(); ++j) {
    p.layers.push_back(Matrix::Zero(static_cast<Eigen::Index>(spec.width(j)),
                                    static_cast<Eigen::Index>(spec.width(j + 1))));
  }
  return p;
}

/// [sigma; 1]
inline Vector augment(const Vector& sigma) {
  if (!sigma.allFinite()) throw std::domain_error("augment: non-finite input");
  Vector out(sigma.size() + 1);
  out.head(sigma.size()) = sigma;
  out[sigma.size()] = 1.0;
  return out;
}

/// Column-major stacking.
inline Vector vec(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

inline Matrix unvec(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
  if (rows < 0 || cols < 0 || v.size() != rows * cols) {
    throw std::invalid_argument("unvec: length " + std::to_string(v.size()) +
                                " does not match " + std::to_string(rows) + "x" +
                                std::to_string(cols));
  }
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

/// theta = [vec(V_0); ...; vec(V_k)]
inline Vector flatten(const Parameters& params) {
  Eigen::Index total = 0;
  for (const auto& m : params.layers) total += m.size();
  Vector theta(total);
  Eigen::Index off = 0;
  for (const auto& m : params.layers) {
    theta.segment(off, m.size()) = vec(m);
    off += m.size();
  }
  return theta;
}

inline Parameters unflatten(const Vector& theta, const NetworkSpec& spec) {
  if (static_cast<std::size_t>(theta.size()) != spec.parameter_count()) {
    throw std::invalid_argument("unflatten: theta has length " + std::to_string(theta.size()) +
                                ", spec expects " + std::to_string(spec.parameter_count()));
  }
  Parameters p;
  Eigen::Index off = 0;
  for (std::size_t j = 0; j <= spec.depth(); ++j) {
    const auto rows = static_cast<Eigen::Index>(spec.width(j));
    const auto cols = static_cast<Eigen::Index>(spec.width(j + 1));
    p.layers.push_back(unvec(theta.segment(off, rows * cols), rows, cols));
    off += rows * cols;
  }
  return p;
}

/// Everything computed by one forward pass.
///
/// Index conventions follow the layer recursion: `outputs[j]` is Phi_j
/// (j = 0..k), `activations[j]` is varphi_j (varphi_0 = sigma_a), and
/// `first[j]` / `second[j]` hold the diagonals of phi_j' and phi_j'' at
/// Phi_{j-1}. Slot 0 of `first` and `second` is empty.
struct ForwardTrace {
  Vector input;
  Vector augmented;
  std::vector<Vector> outputs;
  std::vector<Vector> activations;
  std::vector<Vector> first;
  std::vector<Vector> second;

  std::size_t depth() const { return outputs.size() - 1; }
  const Vector& output() const { return outputs.back(); }

  bool operator==(const ForwardTrace&) const = default;
};

inline ForwardTrace forward(const NetworkSpec& spec, const Parameters& params,
                            const Vector& sigma) {
  check_shapes(spec, params);
  if (static_cast<std::size_t>(sigma.size()) != spec.input_size()) {
    throw std::invalid_argument("forward: input has length " + std::to_string(sigma.size()) +
                                ", expected " + std::to_string(spec.input_size()));
  }
  const std::size_t k = spec.depth();
  ForwardTrace t;
  t.input = sigma;
  t.augmented = augment(sigma);
  t.outputs.reserve(k + 1);
  t.activations.reserve(k + 1);
  t.first.resize(k + 1);
  t.second.resize(k + 1);

  t.activations.push_back(t.augmented);
  t.outputs.push_back(params[0].transpose() * t.augmented);
  for (std::size_t j = 1; j <= k; ++j) {
    if (!t.outputs[j - 1].allFinite()) {
      throw std::domain_error("forward: non-finite output at layer " + std::to_string(j - 1));
    }
    LayerActivation a = eval_layer_activation(spec.activation(), t.outputs[j - 1]);
    t.outputs.push_back(params[j].transpose() * a.value);
    t.activations.push_back(std::move(a.value));
    t.first[j] = std::move(a.first);
    t.second[j] = std::move(a.second);
  }
  if (!t.outputs[k].allFinite()) {
    throw std::domain_error("forward: non-finite output at layer " + std::to_string(k));
  }
  return t;
}

/// Network output Phi(sigma, theta) without keeping the trace.
inline Vector evaluate(const NetworkSpec& spec, const Parameters& params, const Vector& sigma) {
  return forward(spec, params, sigma).output();
}

}  // namespace dnnbounds

#endif  // DNNBOUNDS_NETWORK_HPP
