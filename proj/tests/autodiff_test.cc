// Copyright 2026 The Biped Gait Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "biped/autodiff.h"

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "biped/dual.h"
#include "biped/model.h"
#include "test_support.h"

namespace biped::ad {
namespace {

using ::biped::testing::CentralDifferenceJacobian;
using ::biped::testing::MaxRelativeError;

TEST(LiftTest, SeedsIdentity) {
  const DualVector<1> a = Lift<1>(Eigen::VectorXd::Constant(1, 2.0),
                                  std::vector<int>{0});
  EXPECT_EQ(a[0].value, 2.0);
  EXPECT_EQ(a[0].derivs[0], 1.0);

  Eigen::VectorXd x(2);
  x << 0.3, -1.7;
  const DualVector<1> b = Lift<1>(x, std::vector<int>{1});
  EXPECT_EQ(b[0].derivs[0], 0.0);
  EXPECT_EQ(b[1].derivs[0], 1.0);
  EXPECT_EQ(b[1].value, -1.7);

  const DualVector<10> c = Lift<10>(Eigen::VectorXd::LinSpaced(10, 0, 9));
  Eigen::Matrix<double, 10, 10> block;
  for (int i = 0; i < 10; ++i) block.row(i) = c[i].derivs.transpose();
  EXPECT_TRUE(block.isIdentity(0.0));
}

TEST(LiftTest, RejectsOutOfRangeSeed) {
  EXPECT_THROW(Lift<2>(Eigen::VectorXd::Zero(2), std::vector<int>{2}),
               std::out_of_range);
  EXPECT_THROW(Lift<1>(Eigen::VectorXd::Zero(3), std::vector<int>{0, 1}),
               std::invalid_argument);
}

TEST(JacobianTest, Square) {
  const Eigen::MatrixXd j = Jacobian<1>(
      [](const auto& x) {
        using T = typename std::decay_t<decltype(x)>::Scalar;
        Eigen::Matrix<T, Eigen::Dynamic, 1> y(1);
        y[0] = x[0] * x[0];
        return y;
      },
      Eigen::VectorXd::Constant(1, 3.0));
  EXPECT_DOUBLE_EQ(j(0, 0), 6.0);
}

TEST(JacobianTest, SmoothAbsIsFlatAtZero) {
  const Eigen::VectorXd g = Gradient<1>(
      [](const auto& x) { return SmoothAbs(x[0], 0.01); },
      Eigen::VectorXd::Zero(1));
  EXPECT_EQ(g[0], 0.0);
}

TEST(JacobianTest, SqrtAtZeroIsADomainError) {
  EXPECT_THROW(
      Gradient<1>([](const auto& x) { return sqrt(x[0] * x[0]); },
                  Eigen::VectorXd::Zero(1)),
      DomainError);
  EXPECT_THROW(SmoothAbs(Dual<1>(1.0), 0.0), DomainError);
}

TEST(GradientTest, ConstantAndLinear) {
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(11, -1.0, 1.0);
  const Eigen::VectorXd g0 =
      Gradient<4>([](const auto&) { return Dual<4>(3.5); }, x);
  EXPECT_TRUE(g0.isZero(0.0));

  const Eigen::VectorXd coef = Eigen::VectorXd::LinSpaced(11, 2.0, -3.0);
  double value = 0.0;
  const Eigen::VectorXd g1 = Gradient<4>(
      [&coef](const auto& v) {
        Dual<4> s(0.0);
        for (Eigen::Index i = 0; i < v.size(); ++i) s += coef[i] * v[i];
        return s;
      },
      x, &value);
  EXPECT_NEAR((g1 - coef).norm(), 0.0, 1e-15);
  EXPECT_NEAR(value, coef.dot(x), 1e-14);
}

// Every admitted primitive against central differences on random inputs.
TEST(DualPropertyTest, PrimitivesMatchFiniteDifferences) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uniform_real_distribution<double> pos(0.05, 4.0);
  auto check = [](auto&& fn, double x0) {
    const Dual<1> y = fn(Dual<1>::Variable(x0, 0));
    const double h = 1e-6;
    const double fd = (fn(x0 + h) - fn(x0 - h)) / (2 * h);
    EXPECT_LE(std::abs(y.derivs[0] - fd), 1e-6 * std::max(1.0, std::abs(fd)))
        << "at x = " << x0;
  };
  for (int trial = 0; trial < 200; ++trial) {
    const double x = u(rng);
    const double c = u(rng);
    check([](auto v) { using std::sin; return sin(v); }, x);
    check([](auto v) { using std::cos; return cos(v); }, x);
    check([](auto v) { using std::sqrt; return sqrt(v); }, pos(rng));
    check([c](auto v) { return v * v * c - v + 1.0; }, x);
    check([c](auto v) { return (c + 4.0) / (v * v + 1.0); }, x);
    check([c](auto v) { return v / (c * c + 0.5); }, x);
    check([](auto v) { return SmoothAbs(v * v - 1.0, 0.01); }, x);
  }
}

TEST(DualPropertyTest, ChainRuleComposition) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto g = [](const auto& x) {
    using std::cos;
    using std::sin;
    using T = typename std::decay_t<decltype(x)>::Scalar;
    Eigen::Matrix<T, Eigen::Dynamic, 1> y(3);
    y << sin(x[0]) * x[1], x[0] + cos(x[1]), x[0] * x[1] * x[1];
    return y;
  };
  auto f = [](const auto& y) {
    using std::sqrt;
    using T = typename std::decay_t<decltype(y)>::Scalar;
    Eigen::Matrix<T, Eigen::Dynamic, 1> z(2);
    z << y[0] * y[1] - y[2], sqrt(y[0] * y[0] + y[1] * y[1] + 1.0);
    return z;
  };
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd x(2);
    x << u(rng), u(rng);
    Eigen::VectorXd gx;
    const Eigen::MatrixXd jg = Jacobian<2>(g, x, &gx);
    const Eigen::MatrixXd jf = Jacobian<3>(f, gx);
    const Eigen::MatrixXd jfg =
        Jacobian<2>([&](const auto& v) { return f(g(v)); }, x);
    EXPECT_LE((jfg - jf * jg).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(DualPropertyTest, DerivFreeArithmeticIsBitExact) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int trial = 0; trial < 1000; ++trial) {
    const double a = u(rng), b = u(rng);
    const Dual<3> da(a), db(b);
    EXPECT_EQ((da + db).value, a + b);
    EXPECT_EQ((da - db).value, a - b);
    EXPECT_EQ((da * db).value, a * b);
    EXPECT_TRUE((da * db).derivs.isZero(0.0));
  }
}

TEST(SolveLinearDualTest, IdentityPassesDerivativesThrough) {
  Eigen::Matrix<Dual<2>, 3, 3> a;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) a(i, j) = Dual<2>(i == j ? 1.0 : 0.0);
  }
  Eigen::Matrix<Dual<2>, 3, 1> b;
  b << Dual<2>(1.0, Eigen::Vector2d(1, 0)), Dual<2>(-2.0, Eigen::Vector2d(0, 1)),
      Dual<2>(0.5, Eigen::Vector2d(3, -4));
  const auto x = SolveLinearDual(a, b);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(x[i].value, b[i].value);
    EXPECT_EQ(x[i].derivs, b[i].derivs);
  }
}

TEST(SolveLinearDualTest, TwoByTwoMatchesFiniteDifferences) {
  // A(p) x = b(p) with entries depending on p = (p0, p1, p2).
  auto solve = [](const auto& p) {
    using T = typename std::decay_t<decltype(p)>::Scalar;
    using std::sin;
    Eigen::Matrix<T, 2, 2> a;
    a << 2.0 + p[0], sin(p[1]), p[2] * p[0], 3.0 - p[1];
    Eigen::Matrix<T, 2, 1> b;
    b << p[0] * p[1] + 1.0, p[2] - 2.0;
    const Eigen::Matrix<T, 2, 1> x = SolveLinear(a, b);
    Eigen::Matrix<T, Eigen::Dynamic, 1> out(2);
    out << x[0], x[1];
    return out;
  };
  Eigen::VectorXd p(3);
  p << 0.3, -0.7, 1.1;
  const Eigen::MatrixXd jad = Jacobian<3>(solve, p);
  const Eigen::MatrixXd jfd = CentralDifferenceJacobian(solve, p);
  EXPECT_LE(MaxRelativeError(jad, jfd), 1e-8);
}

TEST(SolveLinearDualTest, SingularReportsCondition) {
  Eigen::Matrix<Dual<1>, 2, 2> a;
  a << Dual<1>(1.0), Dual<1>(2.0), Dual<1>(2.0), Dual<1>(4.0);
  Eigen::Matrix<Dual<1>, 2, 1> b;
  b << Dual<1>(1.0), Dual<1>(1.0);
  try {
    SolveLinearDual(a, b);
    FAIL() << "expected SingularMatrixError";
  } catch (const SingularMatrixError& e) {
    EXPECT_GT(e.condition_estimate(), 1e14);
  }
}

class DynamicsJacobianTest : public ::testing::Test {
 protected:
  Biped biped_{RobotParams::Preset(5)};
};

// d/d(q, dq, u) of forward dynamics against central differences.
TEST_F(DynamicsJacobianTest, ForwardDynamicsMatchesFiniteDifferences) {
  std::mt19937 rng(101);
  auto f = [this](const auto& x) {
    using T = typename std::decay_t<decltype(x)>::Scalar;
    const Vec5T<T> q = x.template segment<5>(0);
    const Vec5T<T> dq = x.template segment<5>(5);
    const Eigen::Matrix<T, 4, 1> u = x.template segment<4>(10);
    const Vec5T<T> a = biped_.ForwardDynamics(q, dq, u);
    return Eigen::Matrix<T, Eigen::Dynamic, 1>(a);
  };
  for (int trial = 0; trial < 100; ++trial) {
    const State s = biped::testing::RandomState(rng);
    Eigen::VectorXd x(14);
    x << s.q, s.dq, biped::testing::RandomTorque(rng);
    const Eigen::MatrixXd jad = Jacobian<14>(f, x);
    const Eigen::MatrixXd jfd = CentralDifferenceJacobian(f, x, 1e-6);
    EXPECT_LE(biped::testing::MaxRowRelativeError(jad, jfd), 1e-6)
        << "trial " << trial;
  }
}

}  // namespace
}  // namespace biped::ad
