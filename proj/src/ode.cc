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

#include "biped/ode.h"

#include <algorithm>
#include <cmath>
#include <utility>

namespace biped::ode {

using Eigen::VectorXd;

namespace {

// Butcher tableau of the Dormand-Prince pair.
constexpr double kC2 = 1.0 / 5, kC3 = 3.0 / 10, kC4 = 4.0 / 5, kC5 = 8.0 / 9;
constexpr double kA21 = 1.0 / 5;
constexpr double kA31 = 3.0 / 40, kA32 = 9.0 / 40;
constexpr double kA41 = 44.0 / 45, kA42 = -56.0 / 15, kA43 = 32.0 / 9;
constexpr double kA51 = 19372.0 / 6561, kA52 = -25360.0 / 2187,
                 kA53 = 64448.0 / 6561, kA54 = -212.0 / 729;
constexpr double kA61 = 9017.0 / 3168, kA62 = -355.0 / 33,
                 kA63 = 46732.0 / 5247, kA64 = 49.0 / 176,
                 kA65 = -5103.0 / 18656;
constexpr double kA71 = 35.0 / 384, kA73 = 500.0 / 1113, kA74 = 125.0 / 192,
                 kA75 = -2187.0 / 6784, kA76 = 11.0 / 84;
// Difference between the fifth- and fourth-order weights.
constexpr double kE1 = 71.0 / 57600, kE3 = -71.0 / 16695, kE4 = 71.0 / 1920,
                 kE5 = -17253.0 / 339200, kE6 = 22.0 / 525, kE7 = -1.0 / 40;
// Shampine's dense output.
constexpr double kD1 = -12715105075.0 / 11282082432,
                 kD3 = 87487479700.0 / 32700410799,
                 kD4 = -10690763975.0 / 1880347072,
                 kD5 = 701980252875.0 / 199316789632,
                 kD6 = -1453857185.0 / 822651844,
                 kD7 = 69997945.0 / 29380423;

// PI controller constants.
constexpr double kSafety = 0.9;
constexpr double kBeta = 0.04;
constexpr double kExponent = 0.2 - 0.75 * kBeta;
constexpr double kMaxGrowth = 10.0;
constexpr double kMaxShrink = 5.0;

struct Stages {
  VectorXd k1, k2, k3, k4, k5, k6, k7, y_new;
};

Stages RunStages(const DormandPrince::Rhs& f, double t, const VectorXd& y,
                 double h, const VectorXd& k1) {
  Stages s;
  s.k1 = k1;
  s.k2 = f(t + kC2 * h, y + h * kA21 * s.k1);
  s.k3 = f(t + kC3 * h, y + h * (kA31 * s.k1 + kA32 * s.k2));
  s.k4 = f(t + kC4 * h, y + h * (kA41 * s.k1 + kA42 * s.k2 + kA43 * s.k3));
  s.k5 = f(t + kC5 * h, y + h * (kA51 * s.k1 + kA52 * s.k2 + kA53 * s.k3 +
                                 kA54 * s.k4));
  s.k6 = f(t + h, y + h * (kA61 * s.k1 + kA62 * s.k2 + kA63 * s.k3 +
                           kA64 * s.k4 + kA65 * s.k5));
  s.y_new = y + h * (kA71 * s.k1 + kA73 * s.k3 + kA74 * s.k4 + kA75 * s.k5 +
                     kA76 * s.k6);
  s.k7 = f(t + h, s.y_new);
  return s;
}

}  // namespace

VectorXd Step::Interpolate(double t) const {
  const double h = t1 - t0;
  if (h == 0.0) return y0;
  const double th = (t - t0) / h;
  const double th1 = 1.0 - th;
  return coeffs[0] +
         th * (coeffs[1] +
               th1 * (coeffs[2] + th * (coeffs[3] + th1 * coeffs[4])));
}

DormandPrince::DormandPrince(Rhs rhs, const Options& options)
    : rhs_(std::move(rhs)), opt_(options), h_(options.initial_step) {}

Step DormandPrince::Advance(double t, const VectorXd& y, double t_end) {
  const VectorXd k1 = rhs_(t, y);
  ++evaluations_;
  while (true) {
    double h = std::min({h_, opt_.max_step, t_end - t});
    // Avoid leaving a sliver before t_end.
    if (t + 1.01 * h >= t_end) h = t_end - t;
    if (h < opt_.min_step && t_end - t > opt_.min_step) {
      throw StepSizeUnderflow("step size underflow at t = " +
                              std::to_string(t));
    }
    Stages s = RunStages(rhs_, t, y, h, k1);
    evaluations_ += 6;
    const VectorXd err =
        h * (kE1 * s.k1 + kE3 * s.k3 + kE4 * s.k4 + kE5 * s.k5 + kE6 * s.k6 +
             kE7 * s.k7);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double scale =
          opt_.abs_tol +
          opt_.rel_tol * std::max(std::abs(y[i]), std::abs(s.y_new[i]));
      sum += (err[i] / scale) * (err[i] / scale);
    }
    const double e = std::sqrt(sum / static_cast<double>(y.size()));
    if (!std::isfinite(e)) {
      ++rejected_;
      h_ = 0.1 * h;
      continue;
    }
    const double fac11 = std::pow(std::max(e, 1e-300), kExponent);
    if (e <= 1.0) {
      double fac = fac11 / std::pow(err_old_, kBeta) / kSafety;
      fac = std::clamp(fac, 1.0 / kMaxGrowth, kMaxShrink);
      err_old_ = std::max(e, 1e-4);
      // Keep the controller's proposal when the step was clipped at t_end.
      const double proposal = h / fac;
      h_ = (h < h_) ? std::max(h_, proposal) : proposal;
      Step step;
      step.t0 = t;
      step.t1 = (h == t_end - t) ? t_end : t + h;
      step.y0 = y;
      step.y1 = s.y_new;
      const VectorXd diff = s.y_new - y;
      const VectorXd bspl = h * s.k1 - diff;
      step.coeffs[0] = y;
      step.coeffs[1] = diff;
      step.coeffs[2] = bspl;
      step.coeffs[3] = diff - h * s.k7 - bspl;
      step.coeffs[4] = h * (kD1 * s.k1 + kD3 * s.k3 + kD4 * s.k4 +
                            kD5 * s.k5 + kD6 * s.k6 + kD7 * s.k7);
      return step;
    }
    ++rejected_;
    h_ = h / std::min(kMaxShrink, fac11 / kSafety);
  }
}

VectorXd DormandPrince::FixedStep(double t, const VectorXd& y,
                                  double h) const {
  if (h == 0.0) return y;
  return RunStages(rhs_, t, y, h, rhs_(t, y)).y_new;
}

VectorXd DormandPrince::Integrate(double t0, const VectorXd& y0,
                                  double t_end) {
  double t = t0;
  VectorXd y = y0;
  while (t < t_end) {
    Step s = Advance(t, y, t_end);
    t = s.t1;
    y = std::move(s.y1);
  }
  return y;
}

double LocateRoot(const Step& step,
                  const std::function<double(const VectorXd&)>& g,
                  double tolerance) {
  double a = step.t0, b = step.t1;
  double ga = g(step.y0), gb = g(step.y1);
  if (gb == 0.0) return b;
  if (ga == 0.0) return a;
  if ((ga > 0) == (gb > 0)) {
    throw std::invalid_argument("LocateRoot: no sign change on the step");
  }
  int side = 0;
  for (int it = 0; it < 200 && b - a > tolerance; ++it) {
    double c = (a * gb - b * ga) / (gb - ga);
    // Guard against stagnation at an endpoint.
    if (!(c > a && c < b)) c = 0.5 * (a + b);
    const double gc = g(step.Interpolate(c));
    if (gc == 0.0) return c;
    if ((gc > 0) == (gb > 0)) {
      b = c;
      gb = gc;
      if (side == -1) ga *= 0.5;
      side = -1;
    } else {
      a = c;
      ga = gc;
      if (side == 1) gb *= 0.5;
      side = 1;
    }
    // Regula falsi can leave one end fixed; bisect when progress stalls.
    if (it % 8 == 7) {
      const double m = 0.5 * (a + b);
      const double gm = g(step.Interpolate(m));
      if (gm == 0.0) return m;
      if ((gm > 0) == (gb > 0)) {
        b = m;
        gb = gm;
      } else {
        a = m;
        ga = gm;
      }
    }
  }
  return b;
}

}  // namespace biped::ode
