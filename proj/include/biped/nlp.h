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

// Sparse nonlinear programming by a primal-dual interior-point method.
//
// Problems have the form
//   minimize f(x)  subject to  c(x) = 0,  g(x) >= 0,  lower <= x <= upper.
// Multipliers follow the Lagrangian
//   f - y_eq^T c - y_in^T g - z_lower^T (x - lower) - z_upper^T (upper - x)
// so y_in, z_lower and z_upper are nonnegative at a KKT point.

#ifndef BIPED_NLP_H_
#define BIPED_NLP_H_

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace biped::nlp {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct Problem {
  int num_variables = 0;
  int num_equalities = 0;
  int num_inequalities = 0;
  // Infinite entries mean unbounded.
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  // Optional typical magnitudes of the variables; the solver iterates on
  // x / variable_scaling. Empty means unit scaling.
  Eigen::VectorXd variable_scaling;
  // The solver minimizes objective_scaling * f. Tolerances and residual
  // reports refer to this scaled problem.
  double objective_scaling = 1.0;

  std::function<double(const Eigen::VectorXd&)> objective;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
  std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd* eq,
                     Eigen::VectorXd* ineq)>
      constraints;
  std::function<void(const Eigen::VectorXd& x, SparseMatrix* jac_eq,
                     SparseMatrix* jac_ineq)>
      jacobian;
  // Optional. Symmetric Hessian of
  //   obj_factor * f + sum_i w_eq[i] c_i + sum_j w_in[j] g_j.
  // When absent the solver differentiates the Lagrangian gradient
  // numerically, which is only sensible for small problems.
  std::function<SparseMatrix(const Eigen::VectorXd& x, double obj_factor,
                             const Eigen::VectorXd& w_eq,
                             const Eigen::VectorXd& w_in)>
      hessian;

  // Throws std::invalid_argument if sizes or callbacks are inconsistent.
  void Validate() const;
};

struct Options {
  int max_iterations = 3000;
  double feasibility_tolerance = 1e-6;
  double optimality_tolerance = 1e-4;
  double initial_barrier = 0.1;
  // Infeasible after this many iterations without a 10% reduction of the
  // best constraint violation seen so far. Iterates whose violation is at or
  // below stall_floor count as nearly feasible and reset the count.
  int stall_iterations = 50;
  double stall_improvement = 0.1;
  double stall_floor = 1e-3;
  // Rows whose Jacobian (in scaled variables) at the starting point exceeds
  // this infinity norm are scaled down to it internally. Zero disables.
  double max_row_gradient = 100.0;
  // Relative distance by which the starting point is pushed off its bounds.
  double bound_push = 1e-2;
  int verbosity = 0;
};

enum class Status { kOptimal, kMaxIterations, kInfeasible, kNumerical };
std::string ToString(Status s);

struct Multipliers {
  Eigen::VectorXd equality;
  Eigen::VectorXd inequality;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

// One accepted step: the merit function (fixed barrier and penalty) before
// and after.
struct MeritStep {
  int iteration = 0;
  double barrier = 0.0;
  double penalty = 0.0;
  double before = 0.0;
  double after = 0.0;
};

struct SolveReport {
  Status status = Status::kNumerical;
  int iterations = 0;
  double feasibility = 0.0;
  double stationarity = 0.0;
  double complementarity = 0.0;
  double objective = 0.0;
  double wall_time = 0.0;  // seconds
  std::string message;
  std::vector<MeritStep> merit_trace;
};

struct Result {
  Eigen::VectorXd x;
  Multipliers multipliers;
  SolveReport report;
};

// Local solve from x0. Deterministic for a given (problem, x0, options).
// Optional multipliers warm-start the dual iterates; a start that already
// satisfies the tolerances returns after zero iterations.
Result Solve(const Problem& problem, const Eigen::VectorXd& x0,
             const Options& options = {},
             const Multipliers* initial_multipliers = nullptr);

struct KktResiduals {
  double stationarity = 0.0;
  double feasibility = 0.0;
  double complementarity = 0.0;
};

// First-order optimality residuals at (x, multipliers), independent of the
// solver internals. Feasibility is the largest violation of any constraint
// or bound; complementarity also counts multipliers of the wrong sign.
KktResiduals CheckKkt(const Problem& problem, const Eigen::VectorXd& x,
                      const Multipliers& multipliers);

}  // namespace biped::nlp

#endif  // BIPED_NLP_H_
