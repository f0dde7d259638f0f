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

#include "biped/simulate.h"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/LU>

namespace biped {

using Eigen::VectorXd;

namespace {

// Reciprocal condition number below which the decoupling matrix counts as
// singular.
constexpr double kMinDecouplingRcond = 1e-12;
constexpr int kWorkIndex = 10;

class SingularDecoupling : public std::runtime_error {
 public:
  SingularDecoupling() : std::runtime_error("singular decoupling matrix") {}
};

State ToState(const VectorXd& y) {
  State s;
  s.q = y.head<5>();
  s.dq = y.segment<5>(5);
  return s;
}

VectorXd ToVector(const State& s, double work) {
  VectorXd y(11);
  y << s.q, s.dq, work;
  return y;
}

// Reference on interval k at time t, so a torque switch at a knot is
// never decided by rounding.
Reference ReferenceOnInterval(const GaitSolution& gait, double h, int k,
                              double t, const ControllerConfig& ctrl) {
  const int n = gait.NumIntervals();
  Reference r;
  if (k >= n) {
    r.q = gait.knots[n].q;
    r.dq = gait.knots[n].dq;
    r.torque = gait.torques[n - 1];
    return r;
  }
  const double s = std::clamp((t - k * h) / h, 0.0, 1.0);
  const Knot& a = gait.knots[k];
  const Knot& b = gait.knots[k + 1];
  r.ddq = (b.dq - a.dq) / h;
  if (ctrl.interpolation == ControllerConfig::Interpolation::kCubic) {
    const double s2 = s * s, s3 = s2 * s;
    r.q = (2 * s3 - 3 * s2 + 1) * a.q + (s3 - 2 * s2 + s) * h * a.dq +
          (-2 * s3 + 3 * s2) * b.q + (s3 - s2) * h * b.dq;
    r.dq = ((6 * s2 - 6 * s) / h) * a.q + (3 * s2 - 4 * s + 1) * a.dq +
           ((-6 * s2 + 6 * s) / h) * b.q + (3 * s2 - 2 * s) * b.dq;
  } else if (ctrl.interpolation ==
             ControllerConfig::Interpolation::kQuadratic) {
    const double tau = s * h;
    r.q = a.q + tau * a.dq + (0.5 * tau * s) * (b.dq - a.dq);
    r.dq = (1 - s) * a.dq + s * b.dq;
  } else {
    r.q = (1 - s) * a.q + s * b.q;
    r.dq = (1 - s) * a.dq + s * b.dq;
  }
  if (ctrl.feedforward == ControllerConfig::Feedforward::kLinear &&
      k + 1 < n) {
    r.torque = (1 - s) * gait.torques[k] + s * gait.torques[k + 1];
  } else {
    r.torque = gait.torques[k];
  }
  return r;
}

struct Decoupling {
  Eigen::LDLT<Mat5> inertia;
  Vec5 bias;  // C dq + G
  Eigen::Matrix<double, 4, 4> a;  // S D^-1 B
  Vec4 b;                         // S D^-1 (C dq + G)
  bool singular = false;
};

Decoupling Decouple(const Biped& biped, const State& s) {
  Decoupling d;
  d.inertia.compute(biped.Inertia<double>(s.q));
  d.bias = biped.CoriolisForce<double>(s.q, s.dq) + biped.Gravity<double>(s.q);
  const Eigen::Matrix<double, 4, 5> sel = SelectionMatrix();
  Eigen::Matrix<double, 5, 4> input = Eigen::Matrix<double, 5, 4>::Zero();
  input.topRows<4>().setIdentity();
  d.a = sel * d.inertia.solve(input);
  d.b = sel * d.inertia.solve(d.bias);
  const Eigen::FullPivLU<Eigen::Matrix<double, 4, 4>> lu(d.a);
  d.singular = lu.rcond() < kMinDecouplingRcond;
  return d;
}

// Either S f(q, dq, u_ff) + v_fb, which pushed through the decoupling law
// reduces to u_ff + (S D^-1 B)^-1 v_fb, or the computed-torque form that
// asks for S (ddq_ref + v_fb) outright.
Vec4 ControlTorque(const Decoupling& d, const State& s, const Reference& ref,
                   const ControllerConfig& ctrl) {
  const Eigen::Matrix<double, 4, 5> sel = SelectionMatrix();
  const Vec5 accel = -ctrl.kp() * (s.q - ref.q) - ctrl.kd() * (s.dq - ref.dq);
  if (ctrl.law == ControllerConfig::Law::kComputedTorque) {
    return d.a.partialPivLu().solve(sel * (ref.ddq + accel) + d.b);
  }
  return ref.torque + d.a.partialPivLu().solve(sel * accel);
}

}  // namespace

Eigen::Matrix<double, 4, 5> SelectionMatrix() {
  Eigen::Matrix<double, 4, 5> s;
  s << 0, 1, 0, 0, 0,  //
      1, 0, 1, 0, 0,   //
      0, 0, 0, 1, 0,   //
      0, 0, 0, 0, 1;
  return s;
}

std::optional<Vec4> DecouplingTorque(const Biped& biped, const State& s,
                                     const Vec4& v) {
  const Decoupling d = Decouple(biped, s);
  if (d.singular) return std::nullopt;
  return Vec4(d.a.partialPivLu().solve(v + d.b));
}

std::optional<Vec4> PflTorque(const Biped& biped, const State& s,
                              const Reference& ref,
                              const ControllerConfig& ctrl) {
  const Decoupling d = Decouple(biped, s);
  if (d.singular) return std::nullopt;
  return ControlTorque(d, s, ref, ctrl);
}

Reference ReferenceAt(const GaitSolution& gait, double h, double t,
                      const ControllerConfig& ctrl) {
  const int n = gait.NumIntervals();
  const int k = std::clamp(static_cast<int>(std::floor(t / h + 1e-9)), 0, n);
  return ReferenceOnInterval(gait, h, k, t, ctrl);
}

Simulator::Simulator(const RobotParams& params, const GaitSolution& gait,
                     double h, const ControllerConfig& ctrl,
                     const SimOptions& options)
    : params_(params),
      biped_(params),
      gait_(gait),
      h_(h),
      duration_(h * gait.NumIntervals()),
      ctrl_(ctrl),
      opt_(options) {
  if (gait.NumIntervals() < 1 ||
      gait.knots.size() != gait.torques.size() + 1) {
    throw std::invalid_argument("Simulator: malformed gait");
  }
  if (!(h > 0.0)) throw std::invalid_argument("Simulator: h must be > 0");
}

State Simulator::InitialState() const {
  State s;
  s.q = gait_.knots.front().q;
  s.dq = gait_.knots.front().dq;
  return s;
}

std::optional<StepEvent> Simulator::Walk(const State& start, int step,
                                         double t0,
                                         std::vector<SimSample>* samples,
                                         std::string* failure) const {
  const int n = gait_.NumIntervals();
  const double max_time = opt_.max_step_time_factor * duration_;
  int k = 0;
  auto rhs = [&](double t, const VectorXd& y) -> VectorXd {
    const State s = ToState(y);
    const Reference ref = ReferenceOnInterval(gait_, h_, k, t, ctrl_);
    const Decoupling d = Decouple(biped_, s);
    if (d.singular) throw SingularDecoupling();
    const Vec4 u = ControlTorque(d, s, ref, ctrl_);
    Vec5 force = -d.bias;
    force.head<4>() += u;
    VectorXd dy(11);
    dy.head<5>() = s.dq;
    dy.segment<5>(5) = d.inertia.solve(force);
    dy[kWorkIndex] = (u.array() * s.dq.head<4>().array()).abs().sum();
    return dy;
  };
  auto record = [&](double phase, const VectorXd& y) {
    if (samples == nullptr) return;
    SimSample sample;
    sample.t = t0 + phase;
    sample.step = step;
    sample.phase = phase;
    sample.state = ToState(y);
    const Reference ref = ReferenceOnInterval(gait_, h_, k, phase, ctrl_);
    sample.torque =
        PflTorque(biped_, sample.state, ref, ctrl_).value_or(Vec4::Zero());
    sample.energy = biped_.TotalEnergy(sample.state);
    samples->push_back(std::move(sample));
  };
  auto fail = [&](const std::string& why) -> std::optional<StepEvent> {
    if (failure != nullptr) *failure = why;
    return std::nullopt;
  };
  auto tip_height = [this](const VectorXd& y) {
    return biped_.SwingTip<double>(y.head<5>())[1];
  };

  ode::DormandPrince integrator(rhs, opt_.ode);
  VectorXd y = ToVector(start, 0.0);
  double phase = 0.0;
  record(phase, y);
  try {
    while (true) {
      const double seg_end = k < n ? (k + 1) * h_ : max_time;
      const ode::Step s = integrator.Advance(phase, y, seg_end);
      const double g0 = tip_height(s.y0);
      const double g1 = tip_height(s.y1);
      if (g0 >= 0.0 && g1 < 0.0) {
        const double t_hit = ode::LocateRoot(s, tip_height,
                                             opt_.event_tolerance);
        const VectorXd y_hit = integrator.FixedStep(s.t0, s.y0, t_hit - s.t0);
        const State pre = ToState(y_hit);
        const Vec2 tip = biped_.SwingTip<double>(pre.q);
        if (tip[0] > opt_.min_step_length) {
          StepEvent event;
          event.step = step;
          event.time = t0 + t_hit;
          event.duration = t_hit;
          event.pre = pre;
          event.work = y_hit[kWorkIndex];
          event.step_length = tip[0];
          try {
            const ImpactResult impact = biped_.Impact(pre);
            event.post = impact.state_plus;
            event.impulse = impact.impulse;
            event.energy_loss = impact.energy_loss;
          } catch (const InfeasibleImpactError& e) {
            return fail(std::string("infeasible impact: ") + e.what());
          }
          return event;
        }
      }
      y = s.y1;
      phase = s.t1;
      record(phase, y);
      const State now = ToState(y);
      if (biped_.ForwardKinematics(now.q).hip[1] < opt_.min_hip_height) {
        return fail("hip below minimum height");
      }
      if (std::abs(now.q[4]) > opt_.max_torso_angle) {
        return fail("torso angle out of range");
      }
      if (phase >= max_time) return fail("step time exceeded");
      if (phase >= seg_end && k < n) ++k;
    }
  } catch (const SingularDecoupling&) {
    return fail("singular decoupling matrix");
  } catch (const ode::StepSizeUnderflow& e) {
    return fail(std::string("integration failure: ") + e.what());
  }
}

std::optional<StepEvent> Simulator::StepMap(const State& start,
                                            std::string* failure) const {
  return Walk(start, 0, 0.0, nullptr, failure);
}

SimResult Simulator::Rollout(int n_steps, const std::optional<State>& initial,
                             const std::optional<PushSpec>& push) const {
  SimResult result;
  State x = initial.value_or(InitialState());
  double t = 0.0;
  for (int step = 0; step < n_steps; ++step) {
    if (push && push->at_step == step) {
      x = biped_.Push(x, push->point, push->impulse);
    }
    result.sections.push_back(x);
    std::string failure;
    const std::optional<StepEvent> event =
        Walk(x, step, t, opt_.record_samples ? &result.samples : nullptr,
             &failure);
    if (!event) {
      result.fell = true;
      result.fall_reason = failure;
      break;
    }
    result.events.push_back(*event);
    ++result.steps_completed;
    t = event->time;
    x = event->post;
  }
  return result;
}

State IntegrateStance(
    const Biped& biped, const State& initial, double duration,
    const std::function<Vec4(double, const State&)>& torque,
    const ode::Options& options,
    std::vector<std::pair<double, State>>* trace) {
  auto rhs = [&](double t, const VectorXd& y) -> VectorXd {
    const State s = ToState(y);
    VectorXd dy(10);
    dy.head<5>() = s.dq;
    dy.tail<5>() = biped.Accelerations(s, torque(t, s));
    return dy;
  };
  ode::DormandPrince integrator(rhs, options);
  VectorXd y(10);
  y << initial.q, initial.dq;
  double t = 0.0;
  if (trace != nullptr) trace->emplace_back(t, initial);
  while (t < duration) {
    const ode::Step s = integrator.Advance(t, y, duration);
    t = s.t1;
    y = s.y1;
    if (trace != nullptr) trace->emplace_back(t, ToState(y));
  }
  return ToState(y);
}

double MeasureCot(const SimResult& result, const RobotParams& params,
                  int skip_steps) {
  double work = 0.0, distance = 0.0;
  for (const StepEvent& e : result.events) {
    if (e.step < skip_steps) continue;
    work += e.work;
    distance += e.step_length;
  }
  if (distance <= 0.0) {
    throw std::invalid_argument("MeasureCot: no completed step to measure");
  }
  return work / (params.TotalMass() * params.gravity * distance);
}

double SectionDistance(const State& a, const State& b) {
  constexpr double kRateScale = 10.0;
  Vec10 d;
  d << a.q - b.q, (a.dq - b.dq) / kRateScale;
  return d.norm();
}

LimitCycle FindLimitCycle(const Simulator& sim, int max_steps,
                          double tolerance) {
  LimitCycle lc;
  State x = sim.InitialState();
  for (int i = 0; i < max_steps; ++i) {
    std::string failure;
    const std::optional<StepEvent> e = sim.StepMap(x, &failure);
    if (!e) {
      lc.reason = "fell after " + std::to_string(i) + " steps: " + failure;
      lc.fixed_point = x;
      lc.steps = i;
      return lc;
    }
    lc.last_difference = SectionDistance(e->post, x);
    x = e->post;
    lc.steps = i + 1;
    if (lc.last_difference <= tolerance) {
      lc.converged = true;
      lc.fixed_point = x;
      return lc;
    }
  }
  lc.fixed_point = x;
  lc.reason = "no convergence within " + std::to_string(max_steps) + " steps";
  return lc;
}

void WriteCsv(std::ostream& out, const SimResult& result) {
  out << "t,step,phase,q1,q2,q3,q4,q5,dq1,dq2,dq3,dq4,dq5,u1,u2,u3,u4,"
         "energy\n";
  out.precision(17);
  for (const SimSample& s : result.samples) {
    out << s.t << ',' << s.step << ',' << s.phase;
    for (int i = 0; i < 5; ++i) out << ',' << s.state.q[i];
    for (int i = 0; i < 5; ++i) out << ',' << s.state.dq[i];
    for (int i = 0; i < 4; ++i) out << ',' << s.torque[i];
    out << ',' << s.energy << '\n';
  }
}

nlohmann::json ToJson(const SimResult& result) {
  auto vec = [](const auto& v) {
    return std::vector<double>(v.begin(), v.end());
  };
  nlohmann::json events = nlohmann::json::array();
  for (const StepEvent& e : result.events) {
    events.push_back({{"step", e.step},
                      {"time", e.time},
                      {"duration", e.duration},
                      {"step_length", e.step_length},
                      {"work", e.work},
                      {"energy_loss", e.energy_loss},
                      {"impulse", vec(e.impulse)},
                      {"pre", {{"q", vec(e.pre.q)}, {"dq", vec(e.pre.dq)}}},
                      {"post", {{"q", vec(e.post.q)}, {"dq", vec(e.post.dq)}}}});
  }
  return {{"steps_completed", result.steps_completed},
          {"fell", result.fell},
          {"fall_reason", result.fall_reason},
          {"events", events}};
}

}  // namespace biped
