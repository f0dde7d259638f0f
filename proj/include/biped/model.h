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

// Planar five-link biped with a point-foot stance contact.
//
// Coordinates: q1 stance femur relative to torso, q2 swing femur relative to
// torso, q3 stance knee, q4 swing knee, q5 torso angle from world vertical.
// All angles are counter-clockwise positive. A link at absolute angle theta
// points along (-sin theta, cos theta); legs hang from the hip and the torso
// rises from it. Absolute link angles are
//   stance femur q5+q1, swing femur q5+q2, stance tibia q5+q1+q3,
//   swing tibia q5+q2+q4, torso q5.
// The stance tip is pinned at the world origin and the ground is y = 0.

#ifndef BIPED_MODEL_H_
#define BIPED_MODEL_H_

#include <array>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "biped/autodiff.h"

namespace biped {

template <typename T>
using Vec2T = Eigen::Matrix<T, 2, 1>;
template <typename T>
using Vec5T = Eigen::Matrix<T, 5, 1>;
template <typename T>
using Mat5T = Eigen::Matrix<T, 5, 5>;
using Vec2 = Vec2T<double>;
using Vec4 = Eigen::Matrix<double, 4, 1>;
using Vec5 = Vec5T<double>;
using Vec10 = Eigen::Matrix<double, 10, 1>;
using Mat5 = Mat5T<double>;

inline constexpr int kNumJoints = 5;
inline constexpr int kNumActuators = 4;

// Link order used by every per-link array: stance femur, swing femur,
// stance tibia, swing tibia, torso.
enum Link : int {
  kStanceFemur = 0,
  kSwingFemur = 1,
  kStanceTibia = 2,
  kSwingTibia = 3,
  kTorso = 4,
};

struct RobotParams {
  std::array<double, 5> masses{};   // kg
  std::array<double, 5> lengths{};  // m
  std::array<double, 5> coms{};     // m, from the proximal joint
  double gravity = 9.81;            // m/s^2

  double TotalMass() const;
  // Throws std::invalid_argument on non-positive masses or lengths.
  void Validate() const;

  // Rod links with the shared segment lengths and mid-length COMs.
  static RobotParams FromMasses(double upper_leg, double lower_leg,
                                double torso);
  // Mass sets 1..5 of the reference study; throws std::out_of_range.
  static RobotParams Preset(int set);

  bool operator==(const RobotParams&) const = default;
};

nlohmann::json ToJson(const RobotParams& params);
// Accepts {masses, lengths, coms, gravity}; rejects anything else.
RobotParams RobotParamsFromJson(const nlohmann::json& j);

struct State {
  Vec5 q = Vec5::Zero();
  Vec5 dq = Vec5::Zero();

  Vec10 Stacked() const;
  static State FromStacked(const Vec10& x);
};

// Swaps the stance and swing leg labels: (q1, q2), (q3, q4). Involution.
template <typename T>
Vec5T<T> SwapLegs(const Vec5T<T>& v) {
  Vec5T<T> out;
  out << v[1], v[0], v[3], v[2], v[4];
  return out;
}
State SwapLegs(const State& s);

struct DynTerms {
  Mat5 inertia;                           // D(q)
  Mat5 coriolis;                          // C(q, dq)
  Vec5 gravity;                           // G(q)
  Eigen::Matrix<double, 5, 4> input_map;  // B
};

struct BodyPoints {
  Vec2 hip, stance_knee, swing_knee, swing_tip, torso_top;
  std::array<Vec2, 5> link_com;
  Vec2 com;
};

struct ImpactResult {
  State state_plus;  // relabeled, new stance tip at the origin
  Vec2 impulse;      // N s, acting on the new stance tip
  double energy_loss = 0.0;
};

class InfeasibleImpactError : public std::runtime_error {
 public:
  InfeasibleImpactError(const std::string& what, ImpactResult result)
      : std::runtime_error(what), result_(std::move(result)) {}
  const ImpactResult& result() const { return result_; }

 private:
  ImpactResult result_;
};

enum class PushPoint { kHip, kStanceKnee, kTorso };
std::string ToString(PushPoint p);
// Throws std::invalid_argument for unknown names.
PushPoint PushPointFromString(const std::string& name);

// The model evaluated from one parameter set. Everything that enters the
// optimizer is templated on the scalar type so dual numbers flow through.
class Biped {
 public:
  explicit Biped(const RobotParams& params);

  const RobotParams& params() const { return params_; }
  double total_mass() const { return total_mass_; }

  // Absolute link angles in link order.
  template <typename T>
  static Vec5T<T> AbsoluteAngles(const Vec5T<T>& q);

  // Position of a point given by its coefficients on the link directions.
  template <typename T>
  static Vec2T<T> PointPosition(const Vec5& weights, const Vec5T<T>& theta);
  template <typename T>
  static Vec2T<T> PointVelocity(const Vec5& weights, const Vec5T<T>& theta,
                                const Vec5T<T>& dtheta);
  // 2x5 Jacobian of a point with respect to q.
  template <typename T>
  static Eigen::Matrix<T, 2, 5> PointJacobian(const Vec5& weights,
                                              const Vec5T<T>& q);

  template <typename T>
  Mat5T<T> Inertia(const Vec5T<T>& q) const;
  // C(q, dq) dq.
  template <typename T>
  Vec5T<T> CoriolisForce(const Vec5T<T>& q, const Vec5T<T>& dq) const;
  template <typename T>
  Mat5T<T> Coriolis(const Vec5T<T>& q, const Vec5T<T>& dq) const;
  template <typename T>
  Vec5T<T> Gravity(const Vec5T<T>& q) const;

  // D(q) \ (B u - C dq - G).
  template <typename T, typename U>
  Vec5T<T> ForwardDynamics(const Vec5T<T>& q, const Vec5T<T>& dq,
                           const Eigen::Matrix<U, 4, 1>& u) const;

  // Stance-tip contact force from the total-COM momentum balance.
  template <typename T>
  Vec2T<T> GroundReaction(const Vec5T<T>& q, const Vec5T<T>& dq,
                          const Vec5T<T>& ddq) const;

  template <typename T>
  Vec2T<T> SwingTip(const Vec5T<T>& q) const {
    return PointPosition(swing_tip_w_, AbsoluteAngles(q));
  }
  template <typename T>
  Vec2T<T> SwingTipVelocity(const Vec5T<T>& q, const Vec5T<T>& dq) const {
    return PointVelocity(swing_tip_w_, AbsoluteAngles(q), AbsoluteAngles(dq));
  }
  template <typename T>
  Vec2T<T> Com(const Vec5T<T>& q) const {
    return PointPosition(com_w_, AbsoluteAngles(q));
  }
  template <typename T>
  Vec2T<T> ComVelocityAnalytic(const Vec5T<T>& q, const Vec5T<T>& dq) const {
    return PointVelocity(com_w_, AbsoluteAngles(q), AbsoluteAngles(dq));
  }

  // Plastic no-slip impact at the swing tip followed by leg relabeling.
  // Post-impact joint rates and the tip impulse (x, y); optionally the
  // post-impact velocity of the old stance tip. No feasibility check.
  template <typename T>
  void ImpactUnchecked(const Vec5T<T>& q, const Vec5T<T>& dq,
                       Vec5T<T>* q_plus, Vec5T<T>* dq_plus,
                       Vec2T<T>* impulse,
                       Vec2T<T>* old_stance_velocity = nullptr) const;

  BodyPoints ForwardKinematics(const Vec5& q) const;
  DynTerms ComputeDynTerms(const State& s) const;
  Vec5 Accelerations(const State& s, const Vec4& u) const {
    return ForwardDynamics<double, double>(s.q, s.dq, u);
  }
  // Throws InfeasibleImpactError when the normal impulse is negative.
  ImpactResult Impact(const State& minus) const;
  // Velocity jump from an impulse (N s) applied at the given point.
  State Push(const State& s, PushPoint point, const Vec2& impulse) const;

  double KineticEnergy(const State& s) const;
  double PotentialEnergy(const Vec5& q) const;
  double TotalEnergy(const State& s) const {
    return KineticEnergy(s) + PotentialEnergy(s.q);
  }
  // COM velocity by differentiating the COM position.
  Vec2 ComVelocity(const State& s) const;
  // Angular momentum about a world point.
  double AngularMomentum(const State& s, const Vec2& about) const;

  const Vec5& point_weights(PushPoint p) const;
  const Vec5& hip_weights() const { return hip_w_; }
  const Vec5& swing_tip_weights() const { return swing_tip_w_; }
  const Vec5& com_weights() const { return com_w_; }

 private:
  RobotParams params_;
  double total_mass_;
  std::array<Vec5, 5> link_com_w_;
  Vec5 hip_w_, stance_knee_w_, swing_knee_w_, swing_tip_w_, torso_top_w_;
  Vec5 torso_com_w_;
  Vec5 com_w_;        // total COM
  Vec5 mass_moment_;  // sum_i m_i W(i, a)
  Mat5 coupling_;     // sum_i m_i W(i, a) W(i, b)
  Vec5 rot_inertia_;  // rod inertia about each COM
};

// --- implementation of the templated members -------------------------------

template <typename T>
Vec5T<T> Biped::AbsoluteAngles(const Vec5T<T>& q) {
  Vec5T<T> th;
  th[kStanceFemur] = q[4] + q[0];
  th[kSwingFemur] = q[4] + q[1];
  th[kStanceTibia] = q[4] + q[0] + q[2];
  th[kSwingTibia] = q[4] + q[1] + q[3];
  th[kTorso] = q[4];
  return th;
}

template <typename T>
Vec2T<T> Biped::PointPosition(const Vec5& w, const Vec5T<T>& theta) {
  using std::cos;
  using std::sin;
  Vec2T<T> p(T(0.0), T(0.0));
  for (int a = 0; a < 5; ++a) {
    if (w[a] == 0.0) continue;
    p[0] -= w[a] * sin(theta[a]);
    p[1] += w[a] * cos(theta[a]);
  }
  return p;
}

template <typename T>
Vec2T<T> Biped::PointVelocity(const Vec5& w, const Vec5T<T>& theta,
                              const Vec5T<T>& dtheta) {
  using std::cos;
  using std::sin;
  Vec2T<T> v(T(0.0), T(0.0));
  for (int a = 0; a < 5; ++a) {
    if (w[a] == 0.0) continue;
    v[0] -= w[a] * cos(theta[a]) * dtheta[a];
    v[1] -= w[a] * sin(theta[a]) * dtheta[a];
  }
  return v;
}

template <typename T>
Eigen::Matrix<T, 2, 5> Biped::PointJacobian(const Vec5& w,
                                            const Vec5T<T>& q) {
  using std::cos;
  using std::sin;
  const Vec5T<T> th = AbsoluteAngles(q);
  // d p / d theta, then chain through theta = A q.
  Eigen::Matrix<T, 2, 5> jt;
  for (int a = 0; a < 5; ++a) {
    jt(0, a) = -w[a] * cos(th[a]);
    jt(1, a) = -w[a] * sin(th[a]);
  }
  Eigen::Matrix<T, 2, 5> jq;
  for (int r = 0; r < 2; ++r) {
    jq(r, 0) = jt(r, kStanceFemur) + jt(r, kStanceTibia);
    jq(r, 1) = jt(r, kSwingFemur) + jt(r, kSwingTibia);
    jq(r, 2) = jt(r, kStanceTibia);
    jq(r, 3) = jt(r, kSwingTibia);
    jq(r, 4) = jt.row(r).sum();
  }
  return jq;
}

namespace internal {

// Maps a matrix in absolute-angle coordinates to joint coordinates: A^T M A.
template <typename T>
Mat5T<T> ToJointCoordinates(const Mat5T<T>& m) {
  // Rows of A^T M: combine rows of M.
  Mat5T<T> r;
  r.row(0) = m.row(kStanceFemur) + m.row(kStanceTibia);
  r.row(1) = m.row(kSwingFemur) + m.row(kSwingTibia);
  r.row(2) = m.row(kStanceTibia);
  r.row(3) = m.row(kSwingTibia);
  r.row(4) = m.colwise().sum();
  Mat5T<T> out;
  out.col(0) = r.col(kStanceFemur) + r.col(kStanceTibia);
  out.col(1) = r.col(kSwingFemur) + r.col(kSwingTibia);
  out.col(2) = r.col(kStanceTibia);
  out.col(3) = r.col(kSwingTibia);
  out.col(4) = r.rowwise().sum();
  return out;
}

// A^T v for a generalized force in absolute-angle coordinates.
template <typename T>
Vec5T<T> ForceToJointCoordinates(const Vec5T<T>& v) {
  Vec5T<T> out;
  out[0] = v[kStanceFemur] + v[kStanceTibia];
  out[1] = v[kSwingFemur] + v[kSwingTibia];
  out[2] = v[kStanceTibia];
  out[3] = v[kSwingTibia];
  out[4] = v.sum();
  return out;
}

}  // namespace internal

template <typename T>
Mat5T<T> Biped::Inertia(const Vec5T<T>& q) const {
  using std::cos;
  const Vec5T<T> th = AbsoluteAngles(q);
  Mat5T<T> m;
  for (int a = 0; a < 5; ++a) {
    m(a, a) = T(coupling_(a, a) + rot_inertia_[a]);
    for (int b = a + 1; b < 5; ++b) {
      m(a, b) = coupling_(a, b) * cos(th[a] - th[b]);
      m(b, a) = m(a, b);
    }
  }
  return internal::ToJointCoordinates(m);
}

// In absolute angles the inertia entries are a_ab cos(th_a - th_b); the
// Christoffel contraction then reduces to C_ab = a_ab sin(th_a - th_b) dth_b.
template <typename T>
Mat5T<T> Biped::Coriolis(const Vec5T<T>& q, const Vec5T<T>& dq) const {
  using std::sin;
  const Vec5T<T> th = AbsoluteAngles(q);
  const Vec5T<T> dth = AbsoluteAngles(dq);
  Mat5T<T> c;
  for (int a = 0; a < 5; ++a) {
    c(a, a) = T(0.0);
    for (int b = 0; b < 5; ++b) {
      if (a == b) continue;
      c(a, b) = coupling_(a, b) * sin(th[a] - th[b]) * dth[b];
    }
  }
  return internal::ToJointCoordinates(c);
}

template <typename T>
Vec5T<T> Biped::CoriolisForce(const Vec5T<T>& q, const Vec5T<T>& dq) const {
  using std::sin;
  const Vec5T<T> th = AbsoluteAngles(q);
  const Vec5T<T> dth = AbsoluteAngles(dq);
  Vec5T<T> sq;
  for (int b = 0; b < 5; ++b) sq[b] = dth[b] * dth[b];
  Vec5T<T> h = Vec5T<T>::Constant(T(0.0));
  for (int a = 0; a < 5; ++a) {
    for (int b = a + 1; b < 5; ++b) {
      const T s = coupling_(a, b) * sin(th[a] - th[b]);
      h[a] += s * sq[b];
      h[b] -= s * sq[a];
    }
  }
  return internal::ForceToJointCoordinates(h);
}

template <typename T>
Vec5T<T> Biped::Gravity(const Vec5T<T>& q) const {
  using std::sin;
  const Vec5T<T> th = AbsoluteAngles(q);
  Vec5T<T> g;
  for (int a = 0; a < 5; ++a) {
    g[a] = -params_.gravity * mass_moment_[a] * sin(th[a]);
  }
  return internal::ForceToJointCoordinates(g);
}

template <typename T, typename U>
Vec5T<T> Biped::ForwardDynamics(const Vec5T<T>& q, const Vec5T<T>& dq,
                                const Eigen::Matrix<U, 4, 1>& u) const {
  Vec5T<T> rhs = -CoriolisForce(q, dq) - Gravity(q);
  for (int i = 0; i < kNumActuators; ++i) rhs[i] += u[i];
  return ad::SolveLinear(Inertia(q), rhs);
}

template <typename T>
Vec2T<T> Biped::GroundReaction(const Vec5T<T>& q, const Vec5T<T>& dq,
                               const Vec5T<T>& ddq) const {
  using std::cos;
  using std::sin;
  const Vec5T<T> th = AbsoluteAngles(q);
  const Vec5T<T> dth = AbsoluteAngles(dq);
  const Vec5T<T> ddth = AbsoluteAngles(ddq);
  // Total linear momentum rate: sum_a mu_a (ddth dir'(th) - dth^2 dir(th)).
  Vec2T<T> f(T(0.0), T(total_mass_ * params_.gravity));
  for (int a = 0; a < 5; ++a) {
    const T s = sin(th[a]);
    const T c = cos(th[a]);
    const T w2 = dth[a] * dth[a];
    f[0] += mass_moment_[a] * (-c * ddth[a] + s * w2);
    f[1] += mass_moment_[a] * (-s * ddth[a] - c * w2);
  }
  return f;
}

template <typename T>
void Biped::ImpactUnchecked(const Vec5T<T>& q, const Vec5T<T>& dq,
                            Vec5T<T>* q_plus, Vec5T<T>* dq_plus,
                            Vec2T<T>* impulse,
                            Vec2T<T>* old_stance_velocity) const {
  // Floating-base extension: q_e = (q, x_stance, y_stance).
  using Mat9 = Eigen::Matrix<T, 9, 9>;
  using Vec9 = Eigen::Matrix<T, 9, 1>;
  const Mat5T<T> d = Inertia(q);
  const Eigen::Matrix<T, 2, 5> jcom = PointJacobian(com_w_, q);
  const Eigen::Matrix<T, 2, 5> jtip = PointJacobian(swing_tip_w_, q);
  const double m = total_mass_;

  Mat9 k = Mat9::Constant(T(0.0));
  k.template block<5, 5>(0, 0) = d;
  k.template block<5, 2>(0, 5) = m * jcom.transpose();
  k.template block<2, 5>(5, 0) = m * jcom;
  k(5, 5) = T(m);
  k(6, 6) = T(m);
  // Contact rows: the swing tip stops, E = [J_tip, I].
  k.template block<2, 5>(7, 0) = jtip;
  k(7, 5) = T(1.0);
  k(8, 6) = T(1.0);
  k.template block<5, 2>(0, 7) = -jtip.transpose();
  k(5, 7) = T(-1.0);
  k(6, 8) = T(-1.0);

  Vec9 rhs = Vec9::Constant(T(0.0));
  rhs.template head<5>() = d * dq;
  rhs.template segment<2>(5) = m * (jcom * dq);
  const Vec9 sol = ad::SolveLinear(k, rhs);

  *q_plus = SwapLegs<T>(q);
  *dq_plus = SwapLegs<T>(Vec5T<T>(sol.template head<5>()));
  *impulse = sol.template segment<2>(7);
  if (old_stance_velocity != nullptr) {
    *old_stance_velocity = sol.template segment<2>(5);
  }
}

}  // namespace biped

#endif  // BIPED_MODEL_H_
