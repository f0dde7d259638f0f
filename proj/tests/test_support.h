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

// Shared helpers for the test suites: finite differences and seeded random
// walker states.

#ifndef BIPED_TESTS_TEST_SUPPORT_H_
#define BIPED_TESTS_TEST_SUPPORT_H_

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Core>

#include "biped/model.h"

namespace biped::testing {

// Central finite-difference Jacobian of f: R^n -> R^m.
template <typename F>
Eigen::MatrixXd CentralDifferenceJacobian(F&& f, const Eigen::VectorXd& x,
                                          double step = 1e-6) {
  const Eigen::VectorXd f0 = f(x);
  Eigen::MatrixXd jac(f0.size(), x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Eigen::VectorXd xp = x, xm = x;
    xp[j] += step;
    xm[j] -= step;
    jac.col(j) = (f(xp) - f(xm)) / (2.0 * step);
  }
  return jac;
}

// max |a - b| / max(1, |b|) elementwise.
inline double MaxRelativeError(const Eigen::MatrixXd& a,
                               const Eigen::MatrixXd& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      worst = std::max(worst, std::abs(a(i, j) - b(i, j)) /
                                  std::max(1.0, std::abs(b(i, j))));
    }
  }
  return worst;
}

// Like MaxRelativeError but each row is scaled by its largest FD entry, so
// large outputs with small sensitivities are not judged by roundoff alone.
inline double MaxRowRelativeError(const Eigen::MatrixXd& a,
                                  const Eigen::MatrixXd& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double scale = std::max(1.0, b.row(i).cwiseAbs().maxCoeff());
    worst = std::max(worst, (a.row(i) - b.row(i)).cwiseAbs().maxCoeff() / scale);
  }
  return worst;
}

// Configurations in the neighbourhood of walking poses.
inline State RandomState(std::mt19937& rng, double rate_scale = 3.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double pi = std::numbers::pi;
  State s;
  s.q << pi + 0.6 * u(rng), pi + 0.6 * u(rng), -0.65 + 0.6 * u(rng),
      -0.65 + 0.6 * u(rng), 0.4 * u(rng);
  for (int i = 0; i < 5; ++i) s.dq[i] = rate_scale * u(rng);
  return s;
}

inline Vec4 RandomTorque(std::mt19937& rng, double scale = 50.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec4 t;
  for (int i = 0; i < 4; ++i) t[i] = scale * u(rng);
  return t;
}

}  // namespace biped::testing

#endif  // BIPED_TESTS_TEST_SUPPORT_H_
