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

#include "biped/model.h"

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "biped/autodiff.h"
#include "test_support.h"

namespace biped {
namespace {

using ::biped::testing::RandomState;
using ::biped::testing::RandomTorque;
constexpr double kPi = std::numbers::pi;

class BipedTest : public ::testing::Test {
 protected:
  BipedTest() : biped_(RobotParams::Preset(5)) {}

  // dD/dt along dq, by differentiating D(q) with dual numbers.
  Mat5 InertiaRate(const State& s) const {
    Eigen::VectorXd value;
    const Eigen::MatrixXd j = ad::Jacobian<5>(
        [this](const ad::DualVector<5>& q) {
          const Mat5T<ad::Dual<5>> d = biped_.Inertia<ad::Dual<5>>(q);
          ad::DualVector<5> out(25);
          for (int i = 0; i < 25; ++i) out[i] = d(i % 5, i / 5);
          return out;
        },
        Eigen::VectorXd(s.q));
    const Eigen::VectorXd rate = j * s.dq;
    return Eigen::Map<const Mat5>(rate.data());
  }

  Biped biped_;
};

TEST(RobotParamsTest, PresetsMatchTables) {
  const double upper[] = {7, 5, 7, 5, 7};
  const double lower[] = {7, 7, 5, 5, 3};
  const double torso[] = {42, 46, 46, 50, 50};
  for (int set = 1; set <= 5; ++set) {
    const RobotParams p = RobotParams::Preset(set);
    EXPECT_DOUBLE_EQ(p.TotalMass(), 70.0);
    EXPECT_EQ(p.masses[0], upper[set - 1]);
    EXPECT_EQ(p.masses[1], upper[set - 1]);
    EXPECT_EQ(p.masses[2], lower[set - 1]);
    EXPECT_EQ(p.masses[3], lower[set - 1]);
    EXPECT_EQ(p.masses[4], torso[set - 1]);
    EXPECT_EQ(p.lengths[0], 0.4);
    EXPECT_EQ(p.lengths[2], 0.43);
    EXPECT_EQ(p.lengths[4], 0.77);
    for (int i = 0; i < 5; ++i) EXPECT_EQ(p.coms[i], p.lengths[i] / 2);
  }
  EXPECT_THROW(RobotParams::Preset(6), std::out_of_range);
}

TEST(RobotParamsTest, JsonRoundTripAndValidation) {
  const RobotParams p = RobotParams::Preset(3);
  const nlohmann::json j = ToJson(p);
  EXPECT_EQ(RobotParamsFromJson(nlohmann::json::parse(j.dump())), p);

  nlohmann::json extra = j;
  extra["inertias"] = {1, 2, 3, 4, 5};
  EXPECT_THROW(RobotParamsFromJson(extra), std::invalid_argument);

  nlohmann::json bad = j;
  bad["masses"][2] = -1.0;
  EXPECT_THROW(RobotParamsFromJson(bad), std::invalid_argument);
}

TEST_F(BipedTest, StandingPoseKinematics) {
  const Vec5 q(kPi, kPi, 0, 0, 0);
  const BodyPoints p = biped_.ForwardKinematics(q);
  EXPECT_NEAR(p.hip.x(), 0.0, 1e-15);
  EXPECT_NEAR(p.hip.y(), 0.83, 1e-15);
  EXPECT_NEAR(p.swing_tip.x(), 0.0, 1e-15);
  EXPECT_NEAR(p.swing_tip.y(), 0.0, 1e-15);
  EXPECT_NEAR(p.torso_top.y(), 0.83 + 0.77, 1e-15);
  EXPECT_NEAR(p.stance_knee.y(), 0.43, 1e-15);

  Vec2 weighted = Vec2::Zero();
  double mass = 0.0;
  for (int i = 0; i < 5; ++i) {
    weighted += biped_.params().masses[i] * p.link_com[i];
    mass += biped_.params().masses[i];
  }
  EXPECT_DOUBLE_EQ(mass, 70.0);
  EXPECT_NEAR((weighted / mass - p.com).norm(), 0.0, 1e-15);
}

TEST_F(BipedTest, KneeFlexionMovesFootBackward) {
  // Negative knee angles swing the tibia behind the femur when walking +x.
  const BodyPoints p = biped_.ForwardKinematics(Vec5(kPi, kPi, 0, -0.5, 0));
  EXPECT_LT(p.swing_tip.x(), 0.0);
  EXPECT_GT(p.swing_tip.y(), 0.0);
}

TEST_F(BipedTest, InertiaSymmetricPositiveDefinite) {
  std::mt19937 rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const State s = RandomState(rng);
    const Mat5 d = biped_.Inertia(s.q);
    EXPECT_LE((d - d.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    const Eigen::SelfAdjointEigenSolver<Mat5> eig(d);
    EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
  }
}

TEST_F(BipedTest, GravityVanishesOnHipsAndKneesWhenStanding) {
  const Vec5 g = biped_.Gravity(Vec5(kPi, kPi, 0, 0, 0));
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(g[i], 0.0, 1e-12);
}

TEST_F(BipedTest, GravityIsPotentialGradient) {
  std::mt19937 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const State s = RandomState(rng);
    const Eigen::MatrixXd fd = biped::testing::CentralDifferenceJacobian(
        [this](const Eigen::VectorXd& q) {
          return Eigen::VectorXd::Constant(1, biped_.PotentialEnergy(q));
        },
        Eigen::VectorXd(s.q));
    EXPECT_LE((fd.transpose() - biped_.Gravity(s.q)).cwiseAbs().maxCoeff(),
              1e-6);
  }
}

TEST_F(BipedTest, CoriolisSkewSymmetry) {
  std::mt19937 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const State s = RandomState(rng);
    const Mat5 skew = InertiaRate(s) - 2.0 * biped_.Coriolis(s.q, s.dq);
    Vec5 x;
    for (int i = 0; i < 5; ++i) x[i] = n(rng);
    EXPECT_LE(std::abs(x.dot(skew * x)), 1e-8);
    EXPECT_LE((biped_.Coriolis(s.q, s.dq) * s.dq -
               biped_.CoriolisForce(s.q, s.dq))
                  .cwiseAbs()
                  .maxCoeff(),
              1e-12);
  }
}

TEST_F(BipedTest, ForwardDynamicsSolvesManipulatorEquation) {
  std::mt19937 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const State s = RandomState(rng);
    const Vec4 u = RandomTorque(rng);
    const Vec5 ddq = biped_.Accelerations(s, u);
    const DynTerms t = biped_.ComputeDynTerms(s);
    const Vec5 r = t.inertia * ddq + t.coriolis * s.dq + t.gravity -
                   t.input_map * u;
    EXPECT_LE(r.cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST_F(BipedTest, AtRestAccelerationIsPureGravity) {
  State s;
  s.q << kPi + 0.1, kPi - 0.2, -0.1, -0.3, 0.05;
  const Vec5 ddq = biped_.Accelerations(s, Vec4::Zero());
  const Vec5 expected = biped_.Inertia(s.q).ldlt().solve(-biped_.Gravity(s.q));
  EXPECT_LE((ddq - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST_F(BipedTest, GroundReactionStaticAndFreeFall) {
  const Vec5 standing(kPi, kPi, 0, 0, 0);
  const Vec2 f = biped_.GroundReaction<double>(standing, Vec5::Zero(),
                                               Vec5::Zero());
  EXPECT_NEAR(f.x(), 0.0, 1e-12);
  EXPECT_NEAR(f.y(), 70.0 * 9.81, 1e-9);

  // Accelerations that put the COM in free fall need no contact force.
  State s;
  s.q << kPi + 0.2, kPi - 0.3, -0.2, -0.4, 0.1;
  const Eigen::Matrix<double, 2, 5> j = biped_.PointJacobian(
      biped_.com_weights(), s.q);
  const Vec5 ddq = j.transpose() * (j * j.transpose()).ldlt().solve(
                                       Vec2(0.0, -9.81));
  const Vec2 f0 = biped_.GroundReaction<double>(s.q, s.dq, ddq);
  EXPECT_LE(f0.norm(), 1e-10);
}

// The floating-base momentum balance, with dJ/dt dq from dual numbers.
TEST_F(BipedTest, GroundReactionMatchesFloatingBaseBalance) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const State s = RandomState(rng);
    const Vec5 ddq = biped_.Accelerations(s, RandomTorque(rng));
    Eigen::VectorXd v;
    const Eigen::MatrixXd jv = ad::Jacobian<5>(
        [&](const ad::DualVector<5>& q) {
          const Eigen::Matrix<ad::Dual<5>, 2, 5> jc =
              Biped::PointJacobian(biped_.com_weights(), Vec5T<ad::Dual<5>>(q));
          const Vec5T<ad::Dual<5>> dq = s.dq.cast<ad::Dual<5>>();
          const Vec2T<ad::Dual<5>> vel = jc * dq;
          ad::DualVector<5> out(2);
          out << vel[0], vel[1];
          return out;
        },
        Eigen::VectorXd(s.q), &v);
    const Eigen::Matrix<double, 2, 5> jc =
        Biped::PointJacobian(biped_.com_weights(), s.q);
    const Vec2 acc = jc * ddq + jv * s.dq;
    const Vec2 expected = biped_.total_mass() * (acc + Vec2(0.0, 9.81));
    const Vec2 f = biped_.GroundReaction<double>(s.q, s.dq, ddq);
    EXPECT_LE((f - expected).norm(), 1e-9 * std::max(1.0, expected.norm()));
  }
}

TEST_F(BipedTest, ComVelocityByDifferentiationMatchesAnalytic) {
  std::mt19937 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const State s = RandomState(rng);
    EXPECT_LE((biped_.ComVelocity(s) -
               biped_.ComVelocityAnalytic<double>(s.q, s.dq))
                  .norm(),
              1e-13);
  }
}

TEST_F(BipedTest, EnergyAtRestIsPotential) {
  State s;
  s.q << kPi + 0.3, kPi - 0.3, -0.1, -0.2, 0.1;
  const BodyPoints p = biped_.ForwardKinematics(s.q);
  double expected = 0.0;
  for (int i = 0; i < 5; ++i) {
    expected += biped_.params().masses[i] * 9.81 * p.link_com[i].y();
  }
  EXPECT_NEAR(biped_.TotalEnergy(s), expected, 1e-10);
}

TEST_F(BipedTest, ImpactAtRestIsIdentity) {
  State s;
  s.q << kPi + 0.37, kPi - 0.37, 0, 0, 0;
  const ImpactResult r = biped_.Impact(s);
  EXPECT_EQ(r.state_plus.q, SwapLegs(s).q);
  EXPECT_EQ(r.state_plus.dq, Vec5::Zero());
  EXPECT_EQ(r.impulse, Vec2::Zero());
  EXPECT_EQ(r.energy_loss, 0.0);
}

TEST_F(BipedTest, ImpactDissipatesAndConservesContactMomentum) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const State minus = RandomState(rng);
    State plus;
    Vec2 impulse, old_stance_velocity;
    biped_.ImpactUnchecked<double>(minus.q, minus.dq, &plus.q, &plus.dq,
                                   &impulse, &old_stance_velocity);
    // Contact point comes to rest (old labels, floating base).
    const Vec5 dq_old_labels = SwapLegs<double>(plus.dq);
    const Vec2 tip_velocity =
        Biped::PointJacobian(biped_.swing_tip_weights(), minus.q) *
            dq_old_labels +
        old_stance_velocity;
    EXPECT_LE(tip_velocity.norm(), 1e-9);
    EXPECT_LE(biped_.KineticEnergy(plus), biped_.KineticEnergy(minus) + 1e-12);

    const Vec2 contact = biped_.SwingTip<double>(minus.q);
    const double h_minus = biped_.AngularMomentum(minus, contact);
    const double h_plus = biped_.AngularMomentum(plus, Vec2::Zero());
    EXPECT_NEAR(h_minus, h_plus, 1e-8);
  }
}

TEST_F(BipedTest, LegSwapIsAnInvolution) {
  std::mt19937 rng(8);
  const State s = RandomState(rng);
  const State back = SwapLegs(SwapLegs(s));
  EXPECT_EQ(back.q, s.q);
  EXPECT_EQ(back.dq, s.dq);
}

TEST_F(BipedTest, ZeroPushIsIdentity) {
  std::mt19937 rng(9);
  const State s = RandomState(rng);
  for (PushPoint p :
       {PushPoint::kHip, PushPoint::kStanceKnee, PushPoint::kTorso}) {
    const State out = biped_.Push(s, p, Vec2::Zero());
    EXPECT_EQ(out.q, s.q);
    EXPECT_EQ(out.dq, s.dq);
  }
}

// Pinned-foot push against a floating-base solve with an explicit contact
// impulse at the stance tip.
TEST_F(BipedTest, PushMatchesFloatingBaseMomentum) {
  std::mt19937 rng(10);
  const double m = biped_.total_mass();
  for (int trial = 0; trial < 30; ++trial) {
    const State s = RandomState(rng);
    for (PushPoint point :
         {PushPoint::kHip, PushPoint::kStanceKnee, PushPoint::kTorso}) {
      const Vec2 impulse(10.0, 0.0);
      const State out = biped_.Push(s, point, impulse);

      Eigen::Matrix<double, 9, 9> k = Eigen::Matrix<double, 9, 9>::Zero();
      const Eigen::Matrix<double, 2, 5> jc =
          Biped::PointJacobian(biped_.com_weights(), s.q);
      const Eigen::Matrix<double, 2, 5> jp =
          Biped::PointJacobian(biped_.point_weights(point), s.q);
      k.block<5, 5>(0, 0) = biped_.Inertia(s.q);
      k.block<5, 2>(0, 5) = m * jc.transpose();
      k.block<2, 5>(5, 0) = m * jc;
      k.block<2, 2>(5, 5) = m * Eigen::Matrix2d::Identity();
      k.block<2, 2>(5, 7) = -Eigen::Matrix2d::Identity();  // contact impulse
      k.block<2, 2>(7, 5) = Eigen::Matrix2d::Identity();   // tip stays put
      Eigen::Matrix<double, 9, 1> rhs = Eigen::Matrix<double, 9, 1>::Zero();
      rhs.head<5>() = jp.transpose() * impulse;
      rhs.segment<2>(5) = impulse;
      const Eigen::Matrix<double, 9, 1> sol = k.fullPivLu().solve(rhs);
      EXPECT_LE((sol.head<5>() - (out.dq - s.dq)).cwiseAbs().maxCoeff(), 1e-10);

      const Vec2 contact = sol.segment<2>(7);
      const Vec2 dv_com = biped_.ComVelocityAnalytic<double>(out.q, out.dq) -
                          biped_.ComVelocityAnalytic<double>(s.q, s.dq);
      EXPECT_LE((m * dv_com - (impulse + contact)).norm(), 1e-9);
    }
  }
}

TEST_F(BipedTest, SmallPushConvergesLinearly) {
  std::mt19937 rng(11);
  const State s = RandomState(rng);
  const double d1 =
      (biped_.Push(s, PushPoint::kTorso, Vec2(1e-3, 0)).dq - s.dq).norm();
  const double d2 =
      (biped_.Push(s, PushPoint::kTorso, Vec2(1e-4, 0)).dq - s.dq).norm();
  EXPECT_NEAR(d1 / d2, 10.0, 1e-8);
}

}  // namespace
}  // namespace biped
