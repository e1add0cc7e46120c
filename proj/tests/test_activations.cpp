#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "dnnbounds/activations.hpp"
#include "test_util.hpp"

using namespace dnnbounds;

namespace {

// Grid maxima computed here, independently of the frozen table.
struct GridSup {
  double d0 = 0.0;
  double e0 = 0.0;
  double offset = 0.0;
};

GridSup grid_sup(ActivationKind kind, double lo, double hi, double step) {
  GridSup g;
  const double slope = envelope(kind).slope;
  for (double x = lo; x <= hi; x += step) {
    double f = 0.0;
    double d = 0.0;
    double dd = 0.0;
    switch (kind) {
      case ActivationKind::Tanh:
        f = std::tanh(x);
        d = 1.0 / (std::cosh(x) * std::cosh(x));
        dd = -2.0 * std::tanh(x) * d;
        break;
      case ActivationKind::Logistic: {
        const double e = std::exp(-x);
        f = 1.0 / (1.0 + e);
        d = e / ((1.0 + e) * (1.0 + e));
        dd = e * (e - 1.0) / std::pow(1.0 + e, 3);
        break;
      }
      case ActivationKind::Swish: {
        const double e = std::exp(-x);
        const double s = 1.0 / (1.0 + e);
        f = x * s;
        d = s + x * s * (1.0 - s);
        dd = s * (1.0 - s) * (2.0 + x * (1.0 - 2.0 * s));
        break;
      }
    }
    g.d0 = std::max(g.d0, std::abs(d));
    g.e0 = std::max(g.e0, std::abs(dd));
    // swish's offset is measured against relu, which implies |f| <= |x| + offset
    const double gap = kind == ActivationKind::Swish ? std::abs(f - std::max(x, 0.0))
                                                     : std::abs(f) - slope * std::abs(x);
    g.offset = std::max(g.offset, gap);
  }
  return g;
}

}  // namespace

TEST(Activations, ValuesAtZero) {
  const auto t = eval_scalar(ActivationKind::Tanh, 0.0);
  EXPECT_EQ(t.value, 0.0);
  EXPECT_EQ(t.first, 1.0);
  EXPECT_EQ(t.second, 0.0);
  const auto l = eval_scalar(ActivationKind::Logistic, 0.0);
  EXPECT_EQ(l.value, 0.5);
  EXPECT_EQ(l.first, 0.25);
  EXPECT_EQ(l.second, 0.0);
  const auto s = eval_scalar(ActivationKind::Swish, 0.0);
  EXPECT_EQ(s.value, 0.0);
  EXPECT_EQ(s.first, 0.5);
  EXPECT_EQ(s.second, 0.5);
}

TEST(Activations, LogisticSaturatesWithoutOverflow) {
  EXPECT_EQ(eval_scalar(ActivationKind::Logistic, 1000.0).value, 1.0);
  EXPECT_EQ(eval_scalar(ActivationKind::Logistic, -1000.0).value, 0.0);
  EXPECT_EQ(eval_scalar(ActivationKind::Swish, -1000.0).value, 0.0);
  EXPECT_TRUE(std::isfinite(eval_scalar(ActivationKind::Swish, -1000.0).second));
}

TEST(Activations, DerivativesMatchCentralDifferences) {
  const double h = 1e-5;
  for (auto kind : testutil::kKinds) {
    for (double x = -8.0; x <= 8.0; x += 0.37) {
      const auto s = eval_scalar(kind, x);
      const double d_fd = (eval_scalar(kind, x + h).value - eval_scalar(kind, x - h).value) / (2 * h);
      const double dd_fd =
          (eval_scalar(kind, x + h).first - eval_scalar(kind, x - h).first) / (2 * h);
      EXPECT_NEAR(s.first, d_fd, 1e-8) << to_string(kind) << " x=" << x;
      EXPECT_NEAR(s.second, dd_fd, 1e-8) << to_string(kind) << " x=" << x;
    }
  }
}

TEST(Activations, FrozenConstantsMatchGridOracle) {
  struct Case {
    ActivationKind kind;
    double lo, hi;
  };
  for (const Case c : {Case{ActivationKind::Tanh, -5, 5}, Case{ActivationKind::Logistic, -10, 10},
                       Case{ActivationKind::Swish, -20, 20}}) {
    const GridSup g = grid_sup(c.kind, c.lo, c.hi, 1e-3);
    const ElementwiseEnvelope env = envelope(c.kind);
    // frozen values are the refined suprema: at least the grid max, and close to it
    EXPECT_GE(env.d0, g.d0) << to_string(c.kind);
    EXPECT_GE(env.e0, g.e0) << to_string(c.kind);
    EXPECT_GE(env.offset, g.offset) << to_string(c.kind);
    EXPECT_NEAR(env.d0, g.d0, 1e-6) << to_string(c.kind);
    EXPECT_NEAR(env.e0, g.e0, 1e-6) << to_string(c.kind);
    if (c.kind == ActivationKind::Swish) EXPECT_NEAR(env.offset, g.offset, 1e-6);
  }
}

TEST(Activations, ClosedFormSecondDerivativeSuprema) {
  EXPECT_NEAR(envelope(ActivationKind::Tanh).e0, 4.0 / (3.0 * std::sqrt(3.0)), 1e-14);
  EXPECT_NEAR(envelope(ActivationKind::Logistic).e0, 1.0 / (6.0 * std::sqrt(3.0)), 1e-15);
}

TEST(Activations, ElementwiseEnvelopeHoldsOnRandomSamples) {
  auto rng = CounterRng::stream(1, 2, 3);
  for (auto kind : testutil::kKinds) {
    const ElementwiseEnvelope env = envelope(kind);
    for (int n = 0; n < 10000; ++n) {
      const double x = 100.0 * (rng.uniform() - 0.5);
      const auto s = eval_scalar(kind, x);
      ASSERT_LE(std::abs(s.value), env.slope * std::abs(x) + env.offset) << x;
      ASSERT_LE(std::abs(s.first), env.d0) << x;
      ASSERT_LE(std::abs(s.second), env.e0) << x;
    }
  }
}

TEST(Activations, LayerVectorBoundsHold) {
  auto rng = CounterRng::stream(1, 2, 4);
  for (auto kind : testutil::kKinds) {
    for (int n = 0; n < 2000; ++n) {
      const std::size_t width = testutil::uniform_int(rng, 1, 12);
      const Vector y = testutil::normal_vector(rng, static_cast<Eigen::Index>(width),
                                               5.0 * rng.uniform());
      const auto c = layer_constants(kind, width);
      const auto a = eval_layer_activation(kind, y);
      ASSERT_LE(a.value.norm(), c.a1 * y.norm() + c.a0 + 1e-12);
      ASSERT_LE(a.first.cwiseAbs().maxCoeff(), c.b0);
      ASSERT_LE(a.second.cwiseAbs().maxCoeff(), c.c0);
    }
  }
}

TEST(Activations, BiasSlotIsConstant) {
  auto rng = CounterRng::stream(1, 2, 5);
  for (auto kind : testutil::kKinds) {
    for (int n = 0; n < 100; ++n) {
      const Vector y = testutil::normal_vector(rng, 4, 10.0);
      const auto a = eval_layer_activation(kind, y);
      EXPECT_EQ(a.value[3], 1.0);
      EXPECT_EQ(a.first[3], 0.0);
      EXPECT_EQ(a.second[3], 0.0);
    }
    const auto single = eval_layer_activation(kind, Vector::Constant(1, 7.0));
    EXPECT_EQ(single.value[0], 1.0);
  }
}

TEST(Activations, NonFiniteInputRejectedWithIndex) {
  Vector y(3);
  y << 0.0, std::numeric_limits<double>::quiet_NaN(), 1.0;
  try {
    eval_layer_activation(ActivationKind::Tanh, y);
    FAIL() << "expected domain_error";
  } catch (const std::domain_error& e) {
    EXPECT_NE(std::string(e.what()).find("index 1"), std::string::npos);
  }
  // the bias slot's pre-activation is discarded but must still be finite
  y << 0.0, 0.0, std::numeric_limits<double>::infinity();
  EXPECT_THROW(eval_layer_activation(ActivationKind::Tanh, y), std::domain_error);
}

TEST(Activations, ConstantsMonotoneInWidth) {
  for (auto kind : testutil::kKinds) {
    const auto first = layer_constants(kind, 1);
    EXPECT_EQ(first.a0, 1.0);
    for (std::size_t width = 1; width < 64; ++width) {
      const auto a = layer_constants(kind, width);
      const auto b = layer_constants(kind, width + 1);
      EXPECT_GE(b.a0, a.a0);
      EXPECT_EQ(a.a1, b.a1);
      EXPECT_EQ(a.b0, b.b0);
      EXPECT_EQ(a.c0, b.c0);
    }
  }
  EXPECT_THROW(layer_constants(ActivationKind::Tanh, 0), std::invalid_argument);
}

TEST(Activations, NamesRoundTrip) {
  for (auto kind : testutil::kKinds) EXPECT_EQ(parse_activation(to_string(kind)), kind);
  EXPECT_FALSE(parse_activation("relu").has_value());
  EXPECT_FALSE(parse_activation("Tanh").has_value());
}
