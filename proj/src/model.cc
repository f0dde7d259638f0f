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
#include <set>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/LU>

namespace biped {
namespace {

// Shared segment lengths of the reference walker (m).
constexpr double kUpperLegLength = 0.4;
constexpr double kLowerLegLength = 0.43;
constexpr double kTorsoLength = 0.77;

Vec5 Unit(int a, double scale) {
  Vec5 v = Vec5::Zero();
  v[a] = scale;
  return v;
}

std::array<double, 5> ReadArray(const nlohmann::json& j, const char* key) {
  const nlohmann::json& a = j.at(key);
  if (!a.is_array() || a.size() != 5) {
    throw std::invalid_argument(std::string("robot params: '") + key +
                                "' must be an array of 5 numbers");
  }
  std::array<double, 5> out{};
  for (int i = 0; i < 5; ++i) out[i] = a[i].get<double>();
  return out;
}

}  // namespace

double RobotParams::TotalMass() const {
  double m = 0.0;
  for (double mi : masses) m += mi;
  return m;
}

void RobotParams::Validate() const {
  for (int i = 0; i < 5; ++i) {
    if (!(masses[i] > 0.0) || !(lengths[i] > 0.0)) {
      throw std::invalid_argument("robot params: link " + std::to_string(i + 1) +
                                  " needs positive mass and length");
    }
    if (!(coms[i] >= 0.0) || coms[i] > lengths[i]) {
      throw std::invalid_argument("robot params: com offset of link " +
                                  std::to_string(i + 1) +
                                  " must lie on the link");
    }
  }
  if (!(gravity > 0.0)) {
    throw std::invalid_argument("robot params: gravity must be positive");
  }
}

RobotParams RobotParams::FromMasses(double upper_leg, double lower_leg,
                                    double torso) {
  RobotParams p;
  p.masses = {upper_leg, upper_leg, lower_leg, lower_leg, torso};
  p.lengths = {kUpperLegLength, kUpperLegLength, kLowerLegLength,
               kLowerLegLength, kTorsoLength};
  for (int i = 0; i < 5; ++i) p.coms[i] = 0.5 * p.lengths[i];
  p.gravity = 9.81;
  return p;
}

RobotParams RobotParams::Preset(int set) {
  switch (set) {
    case 1:
      return FromMasses(7.0, 7.0, 42.0);
    case 2:
      return FromMasses(5.0, 7.0, 46.0);
    case 3:
      return FromMasses(7.0, 5.0, 46.0);
    case 4:
      return FromMasses(5.0, 5.0, 50.0);
    case 5:
      return FromMasses(7.0, 3.0, 50.0);
    default:
      throw std::out_of_range("no mass set " + std::to_string(set) +
                              " (expected 1..5)");
  }
}

nlohmann::json ToJson(const RobotParams& p) {
  return nlohmann::json{{"masses", p.masses},
                        {"lengths", p.lengths},
                        {"coms", p.coms},
                        {"gravity", p.gravity}};
}

RobotParams RobotParamsFromJson(const nlohmann::json& j) {
  if (!j.is_object()) {
    throw std::invalid_argument("robot params must be a JSON object");
  }
  static const std::set<std::string> kKeys = {"masses", "lengths", "coms",
                                              "gravity"};
  for (const auto& [key, value] : j.items()) {
    if (!kKeys.contains(key)) {
      throw std::invalid_argument("robot params: unknown key '" + key + "'");
    }
  }
  RobotParams p;
  p.masses = ReadArray(j, "masses");
  p.lengths = ReadArray(j, "lengths");
  if (j.contains("coms")) {
    p.coms = ReadArray(j, "coms");
  } else {
    for (int i = 0; i < 5; ++i) p.coms[i] = 0.5 * p.lengths[i];
  }
  if (j.contains("gravity")) p.gravity = j.at("gravity").get<double>();
  p.Validate();
  return p;
}

Vec10 State::Stacked() const {
  Vec10 x;
  x << q, dq;
  return x;
}

State State::FromStacked(const Vec10& x) {
  State s;
  s.q = x.head<5>();
  s.dq = x.tail<5>();
  return s;
}

State SwapLegs(const State& s) {
  return State{SwapLegs<double>(s.q), SwapLegs<double>(s.dq)};
}

std::string ToString(PushPoint p) {
  switch (p) {
    case PushPoint::kHip:
      return "hip";
    case PushPoint::kStanceKnee:
      return "stance_knee";
    case PushPoint::kTorso:
      return "torso";
  }
  return "unknown";
}

PushPoint PushPointFromString(const std::string& name) {
  if (name == "hip") return PushPoint::kHip;
  if (name == "stance_knee" || name == "knee") return PushPoint::kStanceKnee;
  if (name == "torso") return PushPoint::kTorso;
  throw std::invalid_argument("unknown push point '" + name +
                              "' (expected hip, stance_knee or torso)");
}

Biped::Biped(const RobotParams& params) : params_(params) {
  params_.Validate();
  total_mass_ = params_.TotalMass();
  const auto& l = params_.lengths;
  const auto& c = params_.coms;

  // Stance chain is walked from the tip upward, so its weights are negative.
  stance_knee_w_ = Unit(kStanceTibia, -l[kStanceTibia]);
  hip_w_ = stance_knee_w_ + Unit(kStanceFemur, -l[kStanceFemur]);
  swing_knee_w_ = hip_w_ + Unit(kSwingFemur, l[kSwingFemur]);
  swing_tip_w_ = swing_knee_w_ + Unit(kSwingTibia, l[kSwingTibia]);
  torso_top_w_ = hip_w_ + Unit(kTorso, l[kTorso]);

  link_com_w_[kStanceTibia] =
      Unit(kStanceTibia, -(l[kStanceTibia] - c[kStanceTibia]));
  link_com_w_[kStanceFemur] =
      stance_knee_w_ + Unit(kStanceFemur, -(l[kStanceFemur] - c[kStanceFemur]));
  link_com_w_[kSwingFemur] = hip_w_ + Unit(kSwingFemur, c[kSwingFemur]);
  link_com_w_[kSwingTibia] = swing_knee_w_ + Unit(kSwingTibia, c[kSwingTibia]);
  link_com_w_[kTorso] = hip_w_ + Unit(kTorso, c[kTorso]);
  torso_com_w_ = link_com_w_[kTorso];

  mass_moment_.setZero();
  coupling_.setZero();
  for (int i = 0; i < 5; ++i) {
    const double m = params_.masses[i];
    mass_moment_ += m * link_com_w_[i];
    coupling_ += m * link_com_w_[i] * link_com_w_[i].transpose();
    rot_inertia_[i] = m * l[i] * l[i] / 12.0;
  }
  com_w_ = mass_moment_ / total_mass_;
}

const Vec5& Biped::point_weights(PushPoint p) const {
  switch (p) {
    case PushPoint::kHip:
      return hip_w_;
    case PushPoint::kStanceKnee:
      return stance_knee_w_;
    case PushPoint::kTorso:
      return torso_com_w_;
  }
  return hip_w_;
}

BodyPoints Biped::ForwardKinematics(const Vec5& q) const {
  const Vec5 th = AbsoluteAngles(q);
  BodyPoints p;
  p.hip = PointPosition(hip_w_, th);
  p.stance_knee = PointPosition(stance_knee_w_, th);
  p.swing_knee = PointPosition(swing_knee_w_, th);
  p.swing_tip = PointPosition(swing_tip_w_, th);
  p.torso_top = PointPosition(torso_top_w_, th);
  for (int i = 0; i < 5; ++i) p.link_com[i] = PointPosition(link_com_w_[i], th);
  p.com = PointPosition(com_w_, th);
  return p;
}

DynTerms Biped::ComputeDynTerms(const State& s) const {
  DynTerms t;
  t.inertia = Inertia(s.q);
  t.coriolis = Coriolis(s.q, s.dq);
  t.gravity = Gravity(s.q);
  t.input_map.setZero();
  t.input_map.topRows<4>().setIdentity();
  return t;
}

ImpactResult Biped::Impact(const State& minus) const {
  ImpactResult r;
  ImpactUnchecked<double>(minus.q, minus.dq, &r.state_plus.q,
                          &r.state_plus.dq, &r.impulse);
  r.energy_loss = KineticEnergy(minus) - KineticEnergy(r.state_plus);
  if (r.impulse[1] < 0.0) {
    throw InfeasibleImpactError(
        "impact needs a negative normal impulse (" +
            std::to_string(r.impulse[1]) + " N s)",
        r);
  }
  return r;
}

State Biped::Push(const State& s, PushPoint point, const Vec2& impulse) const {
  const Eigen::Matrix<double, 2, 5> e = PointJacobian(point_weights(point), s.q);
  const Eigen::LDLT<Mat5> ldlt(Inertia(s.q));
  State out = s;
  out.dq += ldlt.solve(e.transpose() * impulse);
  return out;
}

double Biped::KineticEnergy(const State& s) const {
  return 0.5 * s.dq.dot(Inertia(s.q) * s.dq);
}

double Biped::PotentialEnergy(const Vec5& q) const {
  const Vec5 th = AbsoluteAngles(q);
  double v = 0.0;
  for (int a = 0; a < 5; ++a) v += mass_moment_[a] * std::cos(th[a]);
  return params_.gravity * v;
}

Vec2 Biped::ComVelocity(const State& s) const {
  const Eigen::MatrixXd j = ad::Jacobian<5>(
      [this](const ad::DualVector<5>& q) {
        const Vec2T<ad::Dual<5>> p = Com<ad::Dual<5>>(q);
        ad::DualVector<5> out(2);
        out << p[0], p[1];
        return out;
      },
      Eigen::VectorXd(s.q));
  return j * s.dq;
}

double Biped::AngularMomentum(const State& s, const Vec2& about) const {
  const Vec5 th = AbsoluteAngles(s.q);
  const Vec5 dth = AbsoluteAngles(s.dq);
  double h = 0.0;
  for (int i = 0; i < 5; ++i) {
    const Vec2 r = PointPosition(link_com_w_[i], th) - about;
    const Vec2 v = PointVelocity(link_com_w_[i], th, dth);
    h += params_.masses[i] * (r[0] * v[1] - r[1] * v[0]) +
         rot_inertia_[i] * dth[i];
  }
  return h;
}

}  // namespace biped
