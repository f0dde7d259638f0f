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

// Closed-loop hybrid simulation of the walker: partial feedback
// linearization around an optimized gait, impact detection, leg relabeling
// and multi-step rollouts.

#ifndef BIPED_SIMULATE_H_
#define BIPED_SIMULATE_H_

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "biped/model.h"
#include "biped/ode.h"
#include "biped/transcription.h"

namespace biped {

struct ControllerConfig {
  enum class Feedforward { kZeroOrderHold, kLinear };
  enum class Interpolation { kLinear, kCubic, kQuadratic };
  // kTorqueFeedforward adds the decoupled feedback to the planned torque.
  // kComputedTorque instead commands the planned accelerations plus the
  // feedback through the decoupling law, so the selected errors obey the
  // linear second-order dynamics exactly.
  enum class Law { kTorqueFeedforward, kComputedTorque };

  double omega_n = 80.0;  // rad/s
  double zeta = 1.0;
  // How the feedforward torque is read between knots.
  Feedforward feedforward = Feedforward::kZeroOrderHold;
  // Position/rate reference between knots. kCubic is the Hermite cubic
  // through the knot positions and rates, with its own derivative as the
  // rate reference; kLinear interpolates positions and rates separately.
  Interpolation interpolation = Interpolation::kLinear;
  Law law = Law::kTorqueFeedforward;

  double kp() const { return omega_n * omega_n; }
  double kd() const { return 2.0 * zeta * omega_n; }
};

// Rows select the controlled combinations q2, q1 + q3, q4 and q5.
Eigen::Matrix<double, 4, 5> SelectionMatrix();

// Torque that makes S * qdd equal v exactly at state s:
// (S D^-1 B)^-1 (v + S D^-1 (C dq + G)). Empty when S D^-1 B is singular.
std::optional<Vec4> DecouplingTorque(const Biped& biped, const State& s,
                                     const Vec4& v);

struct Reference {
  Vec5 q = Vec5::Zero();
  Vec5 dq = Vec5::Zero();
  Vec5 ddq = Vec5::Zero();  // constant over each interval
  Vec4 torque = Vec4::Zero();
};

// Tracking law around a reference: the feedforward torque plus the
// decoupled correction that adds -Kp e - Kd de to the selected
// accelerations. Equivalently S * qdd = S f(q, dq, u_ff) + v_fb.
// Empty when the decoupling matrix is singular.
std::optional<Vec4> PflTorque(const Biped& biped, const State& s,
                              const Reference& ref,
                              const ControllerConfig& ctrl);

// Reference at time t within the step: positions and rates linearly
// interpolated between knots, torque held or interpolated per ctrl. Times
// past the last knot clamp to it.
Reference ReferenceAt(const GaitSolution& gait, double h, double t,
                      const ControllerConfig& ctrl);

struct SimOptions {
  ode::Options ode;
  double event_tolerance = 1e-10;  // s
  // Touchdowns closer than this to the stance tip are scuffing, not steps.
  double min_step_length = 0.3;    // m
  double min_hip_height = 0.5;     // m
  double max_torso_angle = 1.0;    // rad
  double max_step_time_factor = 2.0;
  bool record_samples = true;
};

struct PushSpec {
  PushPoint point = PushPoint::kHip;
  Vec2 impulse = Vec2(10.0, 0.0);  // N s, world frame
  // Applied to the state that starts this step (0 = initial state).
  int at_step = 0;
};

struct StepEvent {
  int step = 0;            // index of the step that ended here
  double time = 0.0;       // s, since the start of the rollout
  double duration = 0.0;   // s
  State pre;               // before impact, old labels
  State post;              // after impact and relabeling
  Vec2 impulse = Vec2::Zero();
  double energy_loss = 0.0;
  double work = 0.0;        // integral of sum |u_n dq_n| over the step
  double step_length = 0.0;  // m
};

struct SimSample {
  double t = 0.0;
  int step = 0;
  double phase = 0.0;  // time within the step
  State state;
  Vec4 torque = Vec4::Zero();
  double energy = 0.0;
};

struct SimResult {
  std::vector<SimSample> samples;
  std::vector<StepEvent> events;
  // Post-impact states at the start of each step; the first is the
  // initial state (after any push).
  std::vector<State> sections;
  int steps_completed = 0;
  bool fell = false;
  std::string fall_reason;
};

class Simulator {
 public:
  Simulator(const RobotParams& params, const GaitSolution& gait, double h,
            const ControllerConfig& ctrl, const SimOptions& options = {});

  // Walks up to n_steps from `initial` (the gait's first knot if empty).
  SimResult Rollout(int n_steps, const std::optional<State>& initial = {},
                    const std::optional<PushSpec>& push = {}) const;

  // One step of the closed-loop return map from a post-impact state.
  // Empty on a fall, with the reason in *failure when given.
  std::optional<StepEvent> StepMap(const State& start,
                                   std::string* failure = nullptr) const;

  State InitialState() const;

  const Biped& biped() const { return biped_; }
  double nominal_duration() const { return duration_; }

 private:
  RobotParams params_;
  Biped biped_;
  GaitSolution gait_;
  double h_;
  double duration_;
  ControllerConfig ctrl_;
  SimOptions opt_;

  // Integrates one step; appends samples when `samples` is given.
  std::optional<StepEvent> Walk(const State& start, int step, double t0,
                                std::vector<SimSample>* samples,
                                std::string* failure) const;
};

// Integrates the stance dynamics under a torque law without impacts.
// Returns the final state; `trace` receives every accepted step end.
State IntegrateStance(
    const Biped& biped, const State& initial, double duration,
    const std::function<Vec4(double, const State&)>& torque,
    const ode::Options& options = {},
    std::vector<std::pair<double, State>>* trace = nullptr);

// Measured cost of transport: sum of |u_n dq_n| integrated over the
// completed steps after `skip_steps`, divided by M g times the distance
// walked in them. Throws std::invalid_argument without such steps.
double MeasureCot(const SimResult& result, const RobotParams& params,
                  int skip_steps = 0);

// Distance between post-impact states with angles in rad and rates
// divided by 10 rad/s.
double SectionDistance(const State& a, const State& b);

struct LimitCycle {
  bool converged = false;
  State fixed_point;
  int steps = 0;
  double last_difference = 0.0;
  std::string reason;
};

// Iterates the closed-loop step map from the gait's initial state until
// successive post-impact states differ by at most `tolerance`.
LimitCycle FindLimitCycle(const Simulator& sim, int max_steps = 80,
                          double tolerance = 1e-8);

// Dense series: t, step, phase, q1..q5, dq1..dq5, u1..u4, energy.
void WriteCsv(std::ostream& out, const SimResult& result);
// Events and summary metrics; dense samples are left to the CSV.
nlohmann::json ToJson(const SimResult& result);

}  // namespace biped

#endif  // BIPED_SIMULATE_H_
