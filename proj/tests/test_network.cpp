#include <gtest/gtest.h>

#include "dnnbounds/network.hpp"
#include "dnnbounds/spectral.hpp"
#include "test_util.hpp"

using namespace dnnbounds;

TEST(NetworkSpec, RejectsInvalidArchitectures) {
  EXPECT_THROW(NetworkSpec({2, 1}, ActivationKind::Tanh), std::invalid_argument);
  EXPECT_THROW(NetworkSpec({1, 3, 1}, ActivationKind::Tanh), std::invalid_argument);
  EXPECT_THROW(NetworkSpec({3, 0, 1}, ActivationKind::Tanh), std::invalid_argument);
  EXPECT_THROW(NetworkSpec({3, 2, 0}, ActivationKind::Tanh), std::invalid_argument);
  EXPECT_NO_THROW(NetworkSpec({2, 1, 1}, ActivationKind::Tanh));
}

TEST(NetworkSpec, ParameterCount) {
  const NetworkSpec spec({3, 4, 5, 2}, ActivationKind::Swish);
  EXPECT_EQ(spec.depth(), 2u);
  EXPECT_EQ(spec.input_size(), 2u);
  EXPECT_EQ(spec.output_size(), 2u);
  EXPECT_EQ(spec.parameter_count(), 3u * 4 + 4 * 5 + 5 * 2);
  EXPECT_EQ(spec.layer_offset(2), 32u);
}

TEST(Network, Augment) {
  EXPECT_EQ(augment(Vector::Zero(2)), Vector::Unit(3, 2));
  Vector s(2);
  s << 1, -2;
  Vector e(3);
  e << 1, -2, 1;
  EXPECT_EQ(augment(s), e);
  auto rng = CounterRng::stream(2, 0, 0);
  for (int n = 0; n < 100; ++n) {
    const Vector v = testutil::normal_vector(rng, 5, 3.0);
    EXPECT_NEAR(augment(v).squaredNorm(), v.squaredNorm() + 1.0, 1e-12 * (1 + v.squaredNorm()));
  }
}

TEST(Network, VecIsColumnMajor) {
  Matrix m(2, 2);
  m << 1, 2, 3, 4;
  Vector e(4);
  e << 1, 3, 2, 4;
  EXPECT_EQ(vec(m), e);
  Matrix row(1, 3);
  row << 5, 6, 7;
  Vector r(3);
  r << 5, 6, 7;
  EXPECT_EQ(vec(row), r);
}

TEST(Network, UnvecRoundTrip) {
  auto rng = CounterRng::stream(2, 0, 1);
  for (int n = 0; n < 100; ++n) {
    const auto rows = static_cast<Eigen::Index>(testutil::uniform_int(rng, 1, 6));
    const auto cols = static_cast<Eigen::Index>(testutil::uniform_int(rng, 1, 6));
    const Matrix m = testutil::normal_matrix(rng, rows, cols);
    EXPECT_EQ(unvec(vec(m), rows, cols), m);
  }
  EXPECT_THROW(unvec(Vector::Zero(5), 2, 3), std::invalid_argument);
}

TEST(Network, FlattenOrder) {
  const NetworkSpec spec({2, 1, 1}, ActivationKind::Tanh);
  Parameters p = zero_parameters(spec);
  p[0] << 10, 20;
  p[1] << 30;
  Vector e(3);
  e << 10, 20, 30;
  EXPECT_EQ(flatten(p), e);
}

TEST(Network, FlattenRoundTripAndLength) {
  auto rng = CounterRng::stream(2, 0, 2);
  for (int n = 0; n < 100; ++n) {
    const auto spec = testutil::random_spec(rng, ActivationKind::Tanh, 3, 6);
    const Parameters p = testutil::random_params(rng, spec);
    const Vector theta = flatten(p);
    EXPECT_EQ(static_cast<std::size_t>(theta.size()), spec.parameter_count());
    EXPECT_EQ(unflatten(theta, spec), p);
  }
  const NetworkSpec spec({2, 2, 1}, ActivationKind::Tanh);
  EXPECT_THROW(unflatten(Vector::Zero(5), spec), std::invalid_argument);
}

TEST(Network, ZeroWeights) {
  const NetworkSpec spec({4, 5, 3, 2}, ActivationKind::Tanh);
  const Vector sigma = Vector::Constant(3, 2.5);
  const ForwardTrace t = forward(spec, zero_parameters(spec), sigma);
  EXPECT_EQ(t.outputs[0], Vector::Zero(5));
  EXPECT_EQ(t.activations[1], Vector::Unit(5, 4));
  for (std::size_t j = 1; j <= spec.depth(); ++j) {
    EXPECT_EQ(t.outputs[j], Vector::Zero(static_cast<Eigen::Index>(spec.width(j + 1))));
  }
}

TEST(Network, BiasOnlyHiddenLayer) {
  // L_1 = 1: the only hidden slot is the bias constant, so Phi_1 = V_1 * 1
  const NetworkSpec spec({2, 1, 1}, ActivationKind::Tanh);
  Parameters p = zero_parameters(spec);
  p[0] << 1, 0;
  p[1] << 2;
  const ForwardTrace t = forward(spec, p, Vector::Constant(1, 0.5));
  EXPECT_EQ(t.outputs[0][0], 0.5);
  EXPECT_EQ(t.output()[0], 2.0);
}

TEST(Network, HandRecursion) {
  const NetworkSpec spec({2, 2, 1}, ActivationKind::Tanh);
  Parameters p = zero_parameters(spec);
  p[0] << 1, -1, 0.5, 2;  // rows: sigma, bias
  p[1] << 3, 4;
  const double sigma = 0.3;
  const ForwardTrace t = forward(spec, p, Vector::Constant(1, sigma));
  const double y0 = 1 * sigma + 0.5;
  EXPECT_DOUBLE_EQ(t.outputs[0][0], y0);
  EXPECT_DOUBLE_EQ(t.output()[0], 3 * std::tanh(y0) + 4);
}

TEST(Network, TraceIsConsistentAndDeterministic) {
  auto rng = CounterRng::stream(2, 0, 3);
  for (auto kind : testutil::kKinds) {
    for (int n = 0; n < 20; ++n) {
      const auto spec = testutil::random_spec(rng, kind, 3, 6);
      const Parameters p = testutil::random_params(rng, spec);
      const Vector sigma = testutil::normal_vector(rng, static_cast<Eigen::Index>(spec.input_size()));
      const ForwardTrace a = forward(spec, p, sigma);
      EXPECT_EQ(a, forward(spec, p, sigma));
      EXPECT_EQ(a.augmented[a.augmented.size() - 1], 1.0);
      EXPECT_EQ(a.outputs[0], Vector(p[0].transpose() * a.augmented));
      for (std::size_t j = 1; j <= spec.depth(); ++j) {
        EXPECT_EQ(a.outputs[j], Vector(p[j].transpose() * a.activations[j]));
        EXPECT_EQ(a.activations[j][a.activations[j].size() - 1], 1.0);
      }
    }
  }
}

TEST(Network, BoundedActivationReducedLayerBound) {
  // a1 = 0: ||Phi_0|| <= theta_bar ||sigma_a||, ||Phi_j|| <= a0 theta_bar
  auto rng = CounterRng::stream(2, 0, 4);
  const double theta_bar = 1.5;
  for (auto kind : {ActivationKind::Tanh, ActivationKind::Logistic}) {
    for (int n = 0; n < 200; ++n) {
      const auto spec = testutil::random_spec(rng, kind, 3, 6);
      Parameters p = testutil::random_params(rng, spec);
      for (auto& m : p.layers) m *= theta_bar / exact_spectral_norm(m);
      const Vector sigma = testutil::normal_vector(rng, static_cast<Eigen::Index>(spec.input_size()), 3.0);
      const ForwardTrace t = forward(spec, p, sigma);
      EXPECT_LE(t.outputs[0].norm(), theta_bar * t.augmented.norm() * (1 + 1e-12));
      double a0 = 0.0;
      for (std::size_t j = 1; j <= spec.depth(); ++j) {
        a0 = std::max(a0, layer_constants(kind, spec.width(j)).a0);
      }
      for (std::size_t j = 1; j <= spec.depth(); ++j) {
        EXPECT_LE(t.outputs[j].norm(), a0 * theta_bar * (1 + 1e-12));
      }
    }
  }
}

TEST(Network, ShapeAndInputErrors) {
  const NetworkSpec spec({3, 2, 1}, ActivationKind::Tanh);
  Parameters p = zero_parameters(spec);
  EXPECT_THROW(forward(spec, p, Vector::Zero(3)), std::invalid_argument);
  p[1] = Matrix::Zero(3, 1);
  EXPECT_THROW(forward(spec, p, Vector::Zero(2)), std::invalid_argument);
  p = zero_parameters(spec);
  Vector bad(2);
  bad << 0, std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(forward(spec, p, bad), std::domain_error);
}

TEST(Network, NonFiniteLayerOutputReported) {
  const NetworkSpec spec({2, 2, 1}, ActivationKind::Swish);
  Parameters p = zero_parameters(spec);
  p[0].fill(1e308);
  try {
    forward(spec, p, Vector::Constant(1, 10.0));
    FAIL() << "expected domain_error";
  } catch (const std::domain_error& e) {
    EXPECT_NE(std::string(e.what()).find("layer 0"), std::string::npos);
  }
}
