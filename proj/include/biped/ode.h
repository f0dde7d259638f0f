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

// Dormand-Prince 5(4) integrator with PI step-size control, dense output
// and root localization on the dense interpolant.

#ifndef BIPED_ODE_H_
#define BIPED_ODE_H_

#include <array>
#include <functional>
#include <limits>
#include <stdexcept>

#include <Eigen/Core>

namespace biped::ode {

struct Options {
  double rel_tol = 1e-9;
  double abs_tol = 1e-9;
  double initial_step = 1e-4;
  double max_step = std::numeric_limits<double>::infinity();
  double min_step = 1e-14;
};

class StepSizeUnderflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One accepted step together with its continuous extension.
struct Step {
  double t0 = 0.0;
  double t1 = 0.0;
  Eigen::VectorXd y0;
  Eigen::VectorXd y1;
  // Fourth-order interpolant for t in [t0, t1].
  Eigen::VectorXd Interpolate(double t) const;

  std::array<Eigen::VectorXd, 5> coeffs;
};

class DormandPrince {
 public:
  using Rhs = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;

  DormandPrince(Rhs rhs, const Options& options = {});

  // Takes one accepted step from (t, y) that does not pass t_end. The step
  // size adapts across calls; rejected attempts are retried internally.
  // Throws StepSizeUnderflow when the step would fall below min_step.
  Step Advance(double t, const Eigen::VectorXd& y, double t_end);

  // A single unchecked step of size h; used to land on located events
  // with the accuracy of the accepted step that bracketed them.
  Eigen::VectorXd FixedStep(double t, const Eigen::VectorXd& y,
                            double h) const;

  // Integrates to t_end and returns the final state.
  Eigen::VectorXd Integrate(double t0, const Eigen::VectorXd& y0,
                            double t_end);

  int evaluations() const { return evaluations_; }
  int rejected() const { return rejected_; }
  double step_size() const { return h_; }
  void set_step_size(double h) { h_ = h; }

 private:
  Rhs rhs_;
  Options opt_;
  double h_;
  double err_old_ = 1e-4;
  int evaluations_ = 0;
  int rejected_ = 0;
};

// Locates a sign change of g on [step.t0, step.t1] with the Illinois
// variant of regula falsi on the dense output, to |dt| <= tolerance.
// Requires g(t0) and g(t1) of opposite sign (or g(t1) == 0).
double LocateRoot(const Step& step,
                  const std::function<double(const Eigen::VectorXd&)>& g,
                  double tolerance);

}  // namespace biped::ode

#endif  // BIPED_ODE_H_
