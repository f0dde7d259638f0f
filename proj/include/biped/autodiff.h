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

#ifndef BIPED_AUTODIFF_H_
#define BIPED_AUTODIFF_H_

#include <algorithm>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

#include "biped/dual.h"

namespace biped::ad {

template <int N>
using DualVector = Eigen::Matrix<Dual<N>, Eigen::Dynamic, 1>;

// Raised by the linear solves used inside differentiated code.
class SingularMatrixError : public std::runtime_error {
 public:
  explicit SingularMatrixError(double condition_estimate)
      : std::runtime_error("singular matrix (condition estimate " +
                           std::to_string(condition_estimate) + ")"),
        condition_estimate_(condition_estimate) {}
  double condition_estimate() const { return condition_estimate_; }

 private:
  double condition_estimate_;
};

// Reciprocal condition numbers below this are treated as singular.
inline constexpr double kSingularRcond = 1e-14;

// Value parts equal x; entry seed[j] carries unit derivative in direction j.
template <int N>
DualVector<N> Lift(const Eigen::VectorXd& x, std::span<const int> seed) {
  if (static_cast<int>(seed.size()) > N) {
    throw std::invalid_argument("more seeds than dual directions");
  }
  DualVector<N> out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = Dual<N>(x[i]);
  for (int j = 0; j < static_cast<int>(seed.size()); ++j) {
    if (seed[j] < 0 || seed[j] >= x.size()) {
      throw std::out_of_range("seed index " + std::to_string(seed[j]) +
                              " outside vector of length " +
                              std::to_string(x.size()));
    }
    out[seed[j]].derivs[j] = 1.0;
  }
  return out;
}

// Seeds every entry; requires x.size() <= N.
template <int N>
DualVector<N> Lift(const Eigen::VectorXd& x) {
  std::vector<int> seed(x.size());
  for (int i = 0; i < static_cast<int>(seed.size()); ++i) seed[i] = i;
  return Lift<N>(x, seed);
}

// Jacobian of a vector function written generically over its scalar type:
// `f(const Eigen::Matrix<T, Dynamic, 1>&)` returning a vector of T. Columns
// are evaluated in chunks of N seed directions.
template <int N = 8, typename F>
Eigen::MatrixXd Jacobian(F&& f, const Eigen::VectorXd& x,
                         Eigen::VectorXd* value = nullptr) {
  const int n = static_cast<int>(x.size());
  Eigen::MatrixXd jac;
  std::vector<int> seed;
  for (int start = 0; start < std::max(n, 1); start += N) {
    seed.clear();
    for (int j = start; j < std::min(n, start + N); ++j) seed.push_back(j);
    const DualVector<N> xd = Lift<N>(x, seed);
    const DualVector<N> y = f(xd);
    if (start == 0) {
      jac.setZero(y.size(), n);
      if (value != nullptr) {
        value->resize(y.size());
        for (Eigen::Index i = 0; i < y.size(); ++i) (*value)[i] = y[i].value;
      }
    }
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      for (int j = 0; j < static_cast<int>(seed.size()); ++j) {
        jac(i, seed[j]) = y[i].derivs[j];
      }
    }
  }
  return jac;
}

// Gradient of a scalar function written generically over its scalar type.
template <int N = 8, typename F>
Eigen::VectorXd Gradient(F&& f, const Eigen::VectorXd& x,
                         double* value = nullptr) {
  const int n = static_cast<int>(x.size());
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(n);
  std::vector<int> seed;
  for (int start = 0; start < std::max(n, 1); start += N) {
    seed.clear();
    for (int j = start; j < std::min(n, start + N); ++j) seed.push_back(j);
    const Dual<N> y = f(Lift<N>(x, seed));
    if (start == 0 && value != nullptr) *value = y.value;
    for (int j = 0; j < static_cast<int>(seed.size()); ++j) {
      grad[seed[j]] = y.derivs[j];
    }
  }
  return grad;
}

namespace internal {

template <typename Lu>
void CheckConditioning(const Lu& lu) {
  const double rcond = lu.rcond();
  if (!(rcond > kSingularRcond)) {
    throw SingularMatrixError(rcond > 0.0
                                  ? 1.0 / rcond
                                  : std::numeric_limits<double>::infinity());
  }
}

}  // namespace internal

// Solves A x = b where A and b carry derivatives. The value part solves the
// plain system; derivatives satisfy A dx = db - dA x.
template <int N, int Rows>
Eigen::Matrix<Dual<N>, Rows, 1> SolveLinearDual(
    const Eigen::Matrix<Dual<N>, Rows, Rows>& a,
    const Eigen::Matrix<Dual<N>, Rows, 1>& b) {
  const Eigen::Index n = b.size();
  Eigen::Matrix<double, Rows, Rows> av(n, n);
  Eigen::Matrix<double, Rows, 1> bv(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    bv[i] = b[i].value;
    for (Eigen::Index j = 0; j < n; ++j) av(i, j) = a(i, j).value;
  }
  const Eigen::PartialPivLU<Eigen::Matrix<double, Rows, Rows>> lu(av);
  internal::CheckConditioning(lu);
  const Eigen::Matrix<double, Rows, 1> xv = lu.solve(bv);

  Eigen::Matrix<double, Rows, N> rhs(n, N);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Matrix<double, N, 1> r = b[i].derivs;
    for (Eigen::Index k = 0; k < n; ++k) r -= xv[k] * a(i, k).derivs;
    rhs.row(i) = r.transpose();
  }
  const Eigen::Matrix<double, Rows, N> dx = lu.solve(rhs);

  Eigen::Matrix<Dual<N>, Rows, 1> x(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x[i] = Dual<N>(xv[i], dx.row(i).transpose());
  }
  return x;
}

// Scalar-generic entry point used by the dynamics code.
template <int Rows>
Eigen::Matrix<double, Rows, 1> SolveLinear(
    const Eigen::Matrix<double, Rows, Rows>& a,
    const Eigen::Matrix<double, Rows, 1>& b) {
  const Eigen::PartialPivLU<Eigen::Matrix<double, Rows, Rows>> lu(a);
  internal::CheckConditioning(lu);
  return lu.solve(b);
}

template <int N, int Rows>
Eigen::Matrix<Dual<N>, Rows, 1> SolveLinear(
    const Eigen::Matrix<Dual<N>, Rows, Rows>& a,
    const Eigen::Matrix<Dual<N>, Rows, 1>& b) {
  return SolveLinearDual<N, Rows>(a, b);
}

}  // namespace biped::ad

#endif  // BIPED_AUTODIFF_H_
