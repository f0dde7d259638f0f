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

// Direct transcription of the periodic single-support walking problem:
// knot states, zero-order-hold torques, trapezoidal defects, periodicity
// through the impact map, path constraints and the smoothed cost of
// transport.

#ifndef BIPED_TRANSCRIPTION_H_
#define BIPED_TRANSCRIPTION_H_

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "biped/model.h"
#include "biped/nlp.h"

namespace biped {

struct GaitProblem {
  double stride_length = 0.6;   // m
  double step_duration = 0.6;   // s
  double h = 0.01;              // s
  double clearance = 0.02;      // m
  int clearance_exempt_knots = 5;
  double torque_bound = 150.0;  // N m
  double epsilon_sq = 0.01;     // (N m rad/s)^2
  double grf_margin = 1.0;      // N
  double knee_min = -1.5;       // rad
  double knee_max = 0.1;        // rad

  // step_duration / h; Validate() requires it to be a positive integer.
  int NumIntervals() const;
  void Validate() const;
  bool operator==(const GaitProblem&) const = default;
};

nlohmann::json ToJson(const GaitProblem& problem);
// Missing keys keep their defaults; unknown keys are rejected.
GaitProblem GaitProblemFromJson(const nlohmann::json& j);

struct Knot {
  double t = 0.0;
  Vec5 q = Vec5::Zero();
  Vec5 dq = Vec5::Zero();
};

struct GaitSolution {
  std::vector<Knot> knots;    // N + 1
  std::vector<Vec4> torques;  // N, held over [t_k, t_k+1)
  double cot_opt = 0.0;
  nlp::SolveReport report;

  int NumIntervals() const { return static_cast<int>(torques.size()); }
  // Torque active at time t within the step (zero-order hold).
  Vec4 TorqueAt(double t, double h) const;
};

nlohmann::json ToJson(const GaitSolution& solution);
GaitSolution GaitSolutionFromJson(const nlohmann::json& j);
// One row per knot: t, q1..q5, dq1..dq5, u1..u4. The last knot has no
// torque of its own and leaves the torque columns empty.
void WriteCsv(std::ostream& out, const GaitSolution& solution);

// Smoothed cost of transport: per interval and actuated joint the average
// of sqrt(P^2 + eps^2) at both ends, with P = u_k * dq at knots k and k+1.
double CotObjective(const std::vector<Knot>& knots,
                    const std::vector<Vec4>& torques,
                    const RobotParams& params, const GaitProblem& problem);

// The transcribed NLP. Variables are interleaved by time,
// [z_0, u_0, z_1, u_1, ..., u_{N-1}, z_N] with z_k = (q_k, dq_k), so every
// constraint touches a contiguous window of at most two knots, except the
// periodicity rows that close the cycle.
class GaitNlp {
 public:
  static constexpr int kStateSize = 10;
  static constexpr int kStride = kStateSize + kNumActuators;

  // kTorqueSquared replaces the cost of transport by
  // sum_k |u_k / (100 N m)|^2 h, which is smooth and convex in the torques
  // and serves as a warm-up for the cost of transport.
  enum class Cost { kCostOfTransport, kTorqueSquared };

  GaitNlp(const RobotParams& params, const GaitProblem& problem,
          Cost cost = Cost::kCostOfTransport);

  const RobotParams& params() const { return params_; }
  const GaitProblem& gait_problem() const { return problem_; }
  const Biped& biped() const { return biped_; }
  int num_intervals() const { return n_; }
  int num_variables() const { return kStride * n_ + kStateSize; }
  static int StateOffset(int k) { return kStride * k; }
  static int TorqueOffset(int k) { return kStride * k + kStateSize; }

  // Equality rows: 10 defect rows per interval (position then velocity),
  // then swing-tip height and forward position at k = N, then
  // impact(z_N) - z_0.
  int num_equalities() const { return kStateSize * n_ + 12; }
  static int DefectRow(int k) { return kStateSize * k; }
  int TipHeightRow() const { return kStateSize * n_; }
  int StrideRow() const { return kStateSize * n_ + 1; }
  int PeriodicityRow() const { return kStateSize * n_ + 2; }

  // Inequality rows (g >= 0): vertical ground reaction minus margin at each
  // knot, swing-tip height at knots 1..N-1 (clearance inside the window,
  // ground contact outside it), and the descending swing tip at k = N.
  int num_inequalities() const { return 2 * n_ + 1; }
  static int GrfRow(int k) { return k; }
  int TipRow(int k) const { return n_ + k; }
  int DescentRow() const { return 2 * n_; }
  // Required swing-tip height at interior knot k.
  double TipFloor(int k) const;

  // The NLP with analytic-quality derivatives: dense per-block Jacobians
  // from forward-mode AD and block Hessians from differences of AD
  // gradients.
  nlp::Problem Problem() const;

  Eigen::VectorXd Pack(const std::vector<Knot>& knots,
                       const std::vector<Vec4>& torques) const;
  // Knots, torques and cot_opt; the report is left empty.
  GaitSolution Unpack(const Eigen::VectorXd& x) const;

  double Objective(const Eigen::VectorXd& x) const;
  Eigen::VectorXd ObjectiveGradient(const Eigen::VectorXd& x) const;
  void Constraints(const Eigen::VectorXd& x, Eigen::VectorXd* eq,
                   Eigen::VectorXd* ineq) const;
  void ConstraintJacobian(const Eigen::VectorXd& x, nlp::SparseMatrix* eq,
                          nlp::SparseMatrix* ineq) const;
  nlp::SparseMatrix LagrangianHessian(const Eigen::VectorXd& x,
                                      double obj_factor,
                                      const Eigen::VectorXd& w_eq,
                                      const Eigen::VectorXd& w_in) const;

  // Kinematically consistent seed: the legs-split start pose interpolated
  // linearly to its mirror image, constant joint rates, zero torques.
  // jitter > 0 adds seeded Gaussian noise (rad) to the interior knot angles.
  Eigen::VectorXd InitialGuess(double jitter = 0.0, unsigned seed = 0) const;

  // Replaces every torque by the least-squares fit to its velocity defect
  // rows (the dynamics are affine in the torque), clamped to the bounds.
  Eigen::VectorXd FitTorques(const Eigen::VectorXd& x) const;

 private:
  // A group of constraint rows (and possibly cost terms) that depends on a
  // small set of variables.
  struct Block {
    enum class Kind { kInterval, kKnot, kBoundary };
    Kind kind;
    int k = 0;
    std::vector<int> vars;
    std::vector<int> eq_rows;
    std::vector<int> ineq_rows;
  };
  template <typename T>
  void EvaluateBlock(const Block& b, const Eigen::Matrix<T, -1, 1>& v,
                     T* cost, Eigen::Matrix<T, -1, 1>* eq,
                     Eigen::Matrix<T, -1, 1>* ineq) const;

  RobotParams params_;
  GaitProblem problem_;
  Biped biped_;
  Cost cost_ = Cost::kCostOfTransport;
  int n_ = 0;
  double cost_scale_ = 0.0;  // h / (M g d)
  std::vector<Block> blocks_;
};

struct GaitSolveOptions {
  nlp::Options solver;
  // Solve the torque-squared problem first when no guess is supplied.
  bool torque_squared_warmup = true;
  // Smoothing levels solved in sequence before the problem's own, each
  // warm-starting the next. Levels not above epsilon_sq are skipped.
  std::vector<double> continuation = {10.0, 1.0, 0.1};
  double warm_barrier = 1e-3;
  double warm_bound_push = 1e-5;
  double torque_scale = 100.0;
  double objective_scale = 100.0;
  // Seeded jitter (rad) for the default starting point.
  double jitter = 0.0;
  unsigned seed = 0;
};

// Optimizes a gait from `guess` (InitialGuess() when empty). The report
// describes the final smoothing level.
GaitSolution OptimizeGait(const RobotParams& params,
                          const GaitProblem& problem,
                          const GaitSolveOptions& options = {},
                          const Eigen::VectorXd& guess = {});

}  // namespace biped

#endif  // BIPED_TRANSCRIPTION_H_
