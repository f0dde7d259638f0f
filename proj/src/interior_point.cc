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

// Primal-dual interior-point method with slack variables for the
// inequalities, an augmented Lagrangian merit line search with second-order
// correction, and inertia-corrected sparse LDL^T factorization of the
// regularized KKT matrix.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/SparseCholesky>

#include "biped/nlp.h"

namespace biped::nlp {
namespace {

using Eigen::VectorXd;
using Triplet = Eigen::Triplet<double>;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Line search and barrier parameters.
constexpr double kArmijo = 1e-4;
constexpr double kMinStep = 1e-12;
constexpr double kBarrierDecrease = 0.2;
constexpr double kBarrierPower = 1.5;
constexpr double kBarrierErrorFactor = 10.0;
constexpr double kMinFractionToBoundary = 0.99;
constexpr double kPenaltyGrowth = 2.0;
constexpr double kInitialPenalty = 1e-6;
constexpr double kMultiplierSafeguard = 1e10;
constexpr double kConstraintRegularization = 1e-8;
constexpr double kMaxInitialMultiplier = 1e3;

// Inertia correction schedule.
constexpr double kFirstHessianShift = 1e-4;
constexpr double kMinHessianShift = 1e-20;
constexpr double kMaxHessianShift = 1e40;
constexpr double kShiftIncrease = 8.0;
constexpr double kFirstShiftIncrease = 100.0;
constexpr double kShiftDecrease = 1.0 / 3.0;

// Levenberg-style primal damping after heavily backtracked steps.
constexpr double kMinDamping = 1e-4;
constexpr double kMaxDamping = 1e6;
constexpr double kDampingIncrease = 4.0;
constexpr double kDampingDecrease = 0.25;
constexpr int kDampingBacktracks = 3;

// Feasibility restoration.
constexpr double kRestorationMinStep = 1e-4;
constexpr double kRestorationPenalty = 1e3;
constexpr double kRestorationReduction = 0.9;
constexpr double kMinSlack = 1e-12;
constexpr double kRestorationThreshold = 1e-3;
constexpr int kRestorationBudget = 500;

double InfNorm(const VectorXd& v) {
  return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>();
}

double L1Norm(const VectorXd& v) {
  return v.size() == 0 ? 0.0 : v.lpNorm<1>();
}

struct Values {
  double objective = 0.0;
  VectorXd residual;  // [c(x); g(x) - s]
  bool finite = false;
};

struct Derivatives {
  VectorXd gradient;  // over [x; s]
  SparseMatrix jacobian;
};

class InteriorPoint {
 public:
  InteriorPoint(const Problem& problem, const Options& options)
      : p_(problem), opt_(options) {
    p_.Validate();
    n_ = p_.num_variables;
    me_ = p_.num_equalities;
    mi_ = p_.num_inequalities;
    ny_ = n_ + mi_;
    m_ = me_ + mi_;
    scale_ = p_.variable_scaling.size() == n_ ? p_.variable_scaling
                                              : VectorXd::Ones(n_);
    sigma_ = p_.objective_scaling;
    lower_.resize(ny_);
    upper_.resize(ny_);
    lower_.head(n_) = p_.lower.cwiseQuotient(scale_);
    upper_.head(n_) = p_.upper.cwiseQuotient(scale_);
    lower_.tail(mi_).setZero();
    upper_.tail(mi_).setConstant(kInf);
    row_scale_ = VectorXd::Ones(m_);
  }

  Result Run(const VectorXd& x0, const Multipliers* warm);

 private:
  struct Restoration {
    VectorXd y;
    int iterations = 0;
    Status status = Status::kNumerical;
    bool reached = false;
  };

  VectorXd Unscaled(const VectorXd& y) const {
    return y.head(n_).cwiseProduct(scale_);
  }
  bool HasLower(int i) const { return std::isfinite(lower_[i]); }
  bool HasUpper(int i) const { return std::isfinite(upper_[i]); }

  Values EvaluateValues(const VectorXd& y) const;
  Derivatives EvaluateDerivatives(const VectorXd& y) const;
  SparseMatrix LagrangianHessian(const VectorXd& y, const VectorXd& lambda)
      const;
  double LogBarrier(const VectorXd& y) const;
  VectorXd LogBarrierGradient(const VectorXd& y) const;
  double FractionToBoundary(const VectorXd& y, const VectorXd& dy,
                            double tau) const;
  Multipliers ToUser(const VectorXd& lambda, const VectorXd& z_lower,
                     const VectorXd& z_upper) const;

  // Factorizes [H + diag(shift) , A^T; A, -reg I] (lower triangle). Returns
  // false if the factorization failed or the inertia is wrong.
  bool Factorize(const SparseMatrix& hessian_lower, const VectorXd& diagonal,
                 const SparseMatrix& jacobian, double shift, double reg);
  VectorXd SolveKkt(const VectorXd& rhs) const;

  // Reduces the l1 infeasibility of [x; s] near y_ref by solving an elastic
  // feasibility problem with a proximity term, stopping once the violation
  // has dropped by a fixed fraction.
  Restoration Restore(const VectorXd& y_ref, double mu, int budget) const;

  Problem p_;
  Options opt_;
  int n_ = 0, me_ = 0, mi_ = 0, ny_ = 0, m_ = 0;
  VectorXd scale_;
  double sigma_ = 1.0;
  VectorXd lower_, upper_;
  VectorXd row_scale_;  // internal constraint = row_scale_ * user constraint

  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower> ldlt_;
  SparseMatrix kkt_;             // lower triangle as factorized
  SparseMatrix kkt_unreg_full_;  // full symmetric, without the -reg block

  bool allow_restoration_ = true;
  std::function<bool(const VectorXd&)> stop_early_;
  bool stopped_early_ = false;
};

void CheckSize(const VectorXd& v, int n, const char* what) {
  if (v.size() != n) {
    throw std::invalid_argument(std::string("nlp: wrong size of ") + what);
  }
}

Values InteriorPoint::EvaluateValues(const VectorXd& y) const {
  Values v;
  const VectorXd x = Unscaled(y);
  v.objective = sigma_ * p_.objective(x);
  VectorXd eq, ineq;
  p_.constraints(x, &eq, &ineq);
  CheckSize(eq, me_, "equality constraints");
  CheckSize(ineq, mi_, "inequality constraints");
  v.residual.resize(m_);
  v.residual << row_scale_.head(me_).cwiseProduct(eq),
      row_scale_.tail(mi_).cwiseProduct(ineq) - y.tail(mi_);
  v.finite = std::isfinite(v.objective) && v.residual.allFinite();
  return v;
}

Derivatives InteriorPoint::EvaluateDerivatives(const VectorXd& y) const {
  Derivatives d;
  const VectorXd x = Unscaled(y);
  const VectorXd g = p_.gradient(x);
  CheckSize(g, n_, "gradient");
  d.gradient = VectorXd::Zero(ny_);
  d.gradient.head(n_) = sigma_ * g.cwiseProduct(scale_);

  SparseMatrix jeq, jin;
  p_.jacobian(x, &jeq, &jin);
  if (jeq.rows() != me_ || jeq.cols() != n_ || jin.rows() != mi_ ||
      jin.cols() != n_) {
    throw std::invalid_argument("nlp: Jacobian shape mismatch");
  }
  std::vector<Triplet> t;
  t.reserve(jeq.nonZeros() + jin.nonZeros() + mi_);
  for (int k = 0; k < jeq.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(jeq, k); it; ++it) {
      t.emplace_back(it.row(), it.col(),
                     row_scale_[it.row()] * it.value() * scale_[it.col()]);
    }
  }
  for (int k = 0; k < jin.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(jin, k); it; ++it) {
      t.emplace_back(me_ + it.row(), it.col(),
                     row_scale_[me_ + it.row()] * it.value() *
                         scale_[it.col()]);
    }
  }
  for (int i = 0; i < mi_; ++i) t.emplace_back(me_ + i, n_ + i, -1.0);
  d.jacobian.resize(m_, ny_);
  d.jacobian.setFromTriplets(t.begin(), t.end());
  return d;
}

// Lower triangle of the Hessian of sigma f + lambda^T C over [x; s], in the
// internal scaling. The slack block is zero.
SparseMatrix InteriorPoint::LagrangianHessian(const VectorXd& y,
                                              const VectorXd& lambda) const {
  const VectorXd x = Unscaled(y);
  const VectorXd w_eq = row_scale_.head(me_).cwiseProduct(lambda.head(me_));
  const VectorXd w_in = row_scale_.tail(mi_).cwiseProduct(lambda.tail(mi_));
  SparseMatrix h;
  if (p_.hessian) {
    h = p_.hessian(x, sigma_, w_eq, w_in);
    if (h.rows() != n_ || h.cols() != n_) {
      throw std::invalid_argument("nlp: Hessian shape mismatch");
    }
  } else {
    auto lagrangian_gradient = [&](const VectorXd& xx) {
      SparseMatrix jeq, jin;
      p_.jacobian(xx, &jeq, &jin);
      VectorXd g = sigma_ * p_.gradient(xx);
      if (me_ > 0) g += jeq.transpose() * w_eq;
      if (mi_ > 0) g += jin.transpose() * w_in;
      return g;
    };
    Eigen::MatrixXd dense(n_, n_);
    for (int j = 0; j < n_; ++j) {
      const double step = 1e-5 * std::max(1.0, std::abs(x[j]));
      VectorXd xp = x, xm = x;
      xp[j] += step;
      xm[j] -= step;
      dense.col(j) =
          (lagrangian_gradient(xp) - lagrangian_gradient(xm)) / (2 * step);
    }
    h = (0.5 * (dense + dense.transpose())).sparseView();
  }
  std::vector<Triplet> t;
  t.reserve(h.nonZeros());
  for (int k = 0; k < h.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(h, k); it; ++it) {
      if (it.row() >= it.col()) {
        t.emplace_back(it.row(), it.col(),
                       it.value() * scale_[it.row()] * scale_[it.col()]);
      }
    }
  }
  SparseMatrix out(ny_, ny_);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

// Unweighted log-barrier; the caller applies the barrier parameter.
double InteriorPoint::LogBarrier(const VectorXd& y) const {
  double b = 0.0;
  for (int i = 0; i < ny_; ++i) {
    if (HasLower(i)) b -= std::log(y[i] - lower_[i]);
    if (HasUpper(i)) b -= std::log(upper_[i] - y[i]);
  }
  return b;
}

VectorXd InteriorPoint::LogBarrierGradient(const VectorXd& y) const {
  VectorXd g = VectorXd::Zero(ny_);
  for (int i = 0; i < ny_; ++i) {
    if (HasLower(i)) g[i] -= 1.0 / (y[i] - lower_[i]);
    if (HasUpper(i)) g[i] += 1.0 / (upper_[i] - y[i]);
  }
  return g;
}

double InteriorPoint::FractionToBoundary(const VectorXd& y,
                                         const VectorXd& dy,
                                         double tau) const {
  double alpha = 1.0;
  for (int i = 0; i < y.size(); ++i) {
    if (dy[i] < 0 && HasLower(i)) {
      alpha = std::min(alpha, -tau * (y[i] - lower_[i]) / dy[i]);
    }
    if (dy[i] > 0 && HasUpper(i)) {
      alpha = std::min(alpha, tau * (upper_[i] - y[i]) / dy[i]);
    }
  }
  return alpha;
}

double FractionToBoundaryPositive(const VectorXd& z, const VectorXd& dz,
                                  double tau) {
  double alpha = 1.0;
  for (int i = 0; i < z.size(); ++i) {
    if (dz[i] < 0 && z[i] > 0) alpha = std::min(alpha, -tau * z[i] / dz[i]);
  }
  return alpha;
}

Multipliers InteriorPoint::ToUser(const VectorXd& lambda,
                                  const VectorXd& z_lower,
                                  const VectorXd& z_upper) const {
  Multipliers mult;
  mult.equality = -row_scale_.head(me_).cwiseProduct(lambda.head(me_)) /
                  sigma_;
  // The slack bound multiplier equals -lambda_in at stationarity; using it
  // keeps the reported inequality multipliers nonnegative.
  mult.inequality =
      row_scale_.tail(mi_).cwiseProduct(z_lower.tail(mi_)) / sigma_;
  mult.lower = z_lower.head(n_).cwiseQuotient(scale_) / sigma_;
  mult.upper = z_upper.head(n_).cwiseQuotient(scale_) / sigma_;
  return mult;
}

bool InteriorPoint::Factorize(const SparseMatrix& hessian_lower,
                              const VectorXd& diagonal,
                              const SparseMatrix& jacobian, double shift,
                              double reg) {
  const int dim = ny_ + m_;
  std::vector<Triplet> t;
  t.reserve(hessian_lower.nonZeros() + jacobian.nonZeros() + dim);
  for (int k = 0; k < hessian_lower.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(hessian_lower, k); it; ++it) {
      t.emplace_back(it.row(), it.col(), it.value());
    }
  }
  for (int i = 0; i < ny_; ++i) t.emplace_back(i, i, diagonal[i] + shift);
  for (int k = 0; k < jacobian.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(jacobian, k); it; ++it) {
      t.emplace_back(ny_ + it.row(), it.col(), it.value());
    }
  }
  // Structural zeros keep the pattern; the regularization is added below.
  for (int i = 0; i < m_; ++i) t.emplace_back(ny_ + i, ny_ + i, 0.0);
  SparseMatrix lower(dim, dim);
  lower.setFromTriplets(t.begin(), t.end());
  SparseMatrix full = lower.selfadjointView<Eigen::Lower>();
  kkt_unreg_full_ = std::move(full);
  for (int i = 0; i < m_; ++i) lower.coeffRef(ny_ + i, ny_ + i) -= reg;
  kkt_ = std::move(lower);

  ldlt_.compute(kkt_);
  if (ldlt_.info() != Eigen::Success) return false;
  const VectorXd d = ldlt_.vectorD();
  if (!d.allFinite()) return false;
  int positive = 0, negative = 0;
  for (int i = 0; i < dim; ++i) {
    if (d[i] > 0) ++positive;
    if (d[i] < 0) ++negative;
  }
  return positive == ny_ && negative == m_;
}

// Solves with the factorization and refines against the unregularized
// matrix, keeping refinement steps only while they reduce the residual.
VectorXd InteriorPoint::SolveKkt(const VectorXd& rhs) const {
  VectorXd sol = ldlt_.solve(rhs);
  VectorXd res = rhs - kkt_unreg_full_ * sol;
  double res_norm = InfNorm(res);
  for (int k = 0; k < 3 && res_norm > 1e-14 * (1.0 + InfNorm(rhs)); ++k) {
    const VectorXd trial = sol + ldlt_.solve(res);
    const VectorXd trial_res = rhs - kkt_unreg_full_ * trial;
    const double trial_norm = InfNorm(trial_res);
    if (!(trial_norm < res_norm)) break;
    sol = trial;
    res = trial_res;
    res_norm = trial_norm;
  }
  return sol;
}

InteriorPoint::Restoration InteriorPoint::Restore(const VectorXd& y_ref,
                                                  double mu,
                                                  int budget) const {
  Restoration out;
  out.y = y_ref;
  const VectorXd x_ref = Unscaled(y_ref);
  const VectorXd residual_ref = EvaluateValues(y_ref).residual;
  const double target = kRestorationReduction * L1Norm(residual_ref);
  const double mu_r = std::max(mu, InfNorm(residual_ref));
  const double rho = kRestorationPenalty;
  const double zeta = std::sqrt(mu_r);
  const int nr = n_ + 2 * me_ + mi_;
  const VectorXd rs_eq = row_scale_.head(me_);
  const VectorXd rs_in = row_scale_.tail(mi_);

  // Proximity weights in the internal scaling.
  VectorXd prox(n_);
  for (int i = 0; i < n_; ++i) {
    const double d = std::min(1.0, 1.0 / std::abs(y_ref[i]));
    prox[i] = zeta * d * d / (scale_[i] * scale_[i]);
  }

  // Variables [x; p; q; e]: rs*c(x) - p + q = 0 and rs*g(x) + e >= 0.
  Problem r;
  r.num_variables = nr;
  r.num_equalities = me_;
  r.num_inequalities = mi_;
  r.lower = VectorXd::Zero(nr);
  r.upper = VectorXd::Constant(nr, kInf);
  r.lower.head(n_) = p_.lower;
  r.upper.head(n_) = p_.upper;
  r.variable_scaling = VectorXd::Ones(nr);
  r.variable_scaling.head(n_) = scale_;
  r.objective = [&](const VectorXd& v) {
    const VectorXd dx = v.head(n_) - x_ref;
    return rho * v.tail(nr - n_).sum() +
           0.5 * dx.cwiseAbs2().dot(prox);
  };
  r.gradient = [&](const VectorXd& v) {
    VectorXd g = VectorXd::Constant(nr, rho);
    g.head(n_) = prox.cwiseProduct(v.head(n_) - x_ref);
    return g;
  };
  r.constraints = [&](const VectorXd& v, VectorXd* eq, VectorXd* in) {
    VectorXd c, g;
    p_.constraints(v.head(n_), &c, &g);
    *eq = rs_eq.cwiseProduct(c) - v.segment(n_, me_) +
          v.segment(n_ + me_, me_);
    *in = rs_in.cwiseProduct(g) + v.tail(mi_);
  };
  r.jacobian = [&](const VectorXd& v, SparseMatrix* je, SparseMatrix* ji) {
    SparseMatrix jc, jg;
    p_.jacobian(v.head(n_), &jc, &jg);
    std::vector<Triplet> t;
    t.reserve(jc.nonZeros() + 2 * me_);
    for (int k = 0; k < jc.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(jc, k); it; ++it) {
        t.emplace_back(it.row(), it.col(), rs_eq[it.row()] * it.value());
      }
    }
    for (int j = 0; j < me_; ++j) {
      t.emplace_back(j, n_ + j, -1.0);
      t.emplace_back(j, n_ + me_ + j, 1.0);
    }
    je->resize(me_, nr);
    je->setFromTriplets(t.begin(), t.end());
    t.clear();
    for (int k = 0; k < jg.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(jg, k); it; ++it) {
        t.emplace_back(it.row(), it.col(), rs_in[it.row()] * it.value());
      }
    }
    for (int j = 0; j < mi_; ++j) t.emplace_back(j, n_ + 2 * me_ + j, 1.0);
    ji->resize(mi_, nr);
    ji->setFromTriplets(t.begin(), t.end());
  };
  if (p_.hessian) {
    r.hessian = [&](const VectorXd& v, double obj_factor,
                    const VectorXd& w_eq, const VectorXd& w_in) {
      const SparseMatrix h = p_.hessian(v.head(n_), 0.0,
                                        rs_eq.cwiseProduct(w_eq),
                                        rs_in.cwiseProduct(w_in));
      std::vector<Triplet> t;
      t.reserve(h.nonZeros() + n_);
      for (int k = 0; k < h.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(h, k); it; ++it) {
          t.emplace_back(it.row(), it.col(), it.value());
        }
      }
      for (int i = 0; i < n_; ++i) t.emplace_back(i, i, obj_factor * prox[i]);
      SparseMatrix full(nr, nr);
      full.setFromTriplets(t.begin(), t.end());
      return full;
    };
  }

  // Elastic variables start at the minimizer of their barrier subproblem.
  VectorXd v0(nr);
  v0.head(n_) = x_ref;
  for (int j = 0; j < me_; ++j) {
    const double c = residual_ref[j];
    const double a = (mu_r - rho * c) / (2 * rho);
    const double q = a + std::sqrt(a * a + mu_r * c / (2 * rho));
    v0[n_ + j] = c + q;
    v0[n_ + me_ + j] = q;
  }
  for (int j = 0; j < mi_; ++j) {
    // residual_ref holds rs*g - s with s > 0, so rs*g > residual.
    v0[n_ + 2 * me_ + j] =
        std::max(0.0, -(residual_ref[me_ + j] + y_ref[n_ + j])) +
        mu_r / rho;
  }

  auto restored = [&](const VectorXd& v) {
    VectorXd y(ny_);
    y.head(n_) = v.head(n_).cwiseQuotient(scale_);
    VectorXd c, g;
    p_.constraints(v.head(n_), &c, &g);
    y.tail(mi_) = (rs_in.cwiseProduct(g) + v.tail(mi_)).cwiseMax(kMinSlack);
    return y;
  };

  Options o = opt_;
  o.initial_barrier = mu_r;
  o.max_iterations = std::max(0, budget);
  o.bound_push = kMinSlack;
  o.max_row_gradient = 0;
  InteriorPoint inner(r, o);
  inner.allow_restoration_ = false;
  inner.stop_early_ = [&](const VectorXd& v) {
    const Values val = EvaluateValues(restored(v));
    return val.finite && L1Norm(val.residual) <= target;
  };
  const Result res = inner.Run(v0, nullptr);
  out.iterations = res.report.iterations;
  out.status = res.report.status;
  out.reached = inner.stopped_early_;
  if (out.reached) out.y = restored(res.x);
  return out;
}

Result InteriorPoint::Run(const VectorXd& x0, const Multipliers* warm) {
  const auto start_time = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_time)
        .count();
  };
  CheckSize(x0, n_, "x0");
  if (!x0.allFinite()) throw std::invalid_argument("nlp: x0 not finite");

  Result result;
  SolveReport& report = result.report;
  auto finish = [&](const VectorXd& x, Multipliers mult, Status status,
                    int iterations, std::string message) {
    result.x = x;
    result.multipliers = std::move(mult);
    const KktResiduals kkt = CheckKkt(p_, x, result.multipliers);
    report.status = status;
    report.iterations = iterations;
    report.feasibility = kkt.feasibility;
    report.stationarity = kkt.stationarity;
    report.complementarity = kkt.complementarity;
    report.objective = p_.objective(x);
    report.wall_time = elapsed();
    report.message = std::move(message);
    return result;
  };
  auto converged = [&](const KktResiduals& kkt) {
    return kkt.feasibility <= opt_.feasibility_tolerance &&
           kkt.stationarity <= opt_.optimality_tolerance &&
           kkt.complementarity <= opt_.optimality_tolerance;
  };

  if (warm != nullptr) {
    CheckSize(warm->equality, me_, "warm equality multipliers");
    CheckSize(warm->inequality, mi_, "warm inequality multipliers");
    CheckSize(warm->lower, n_, "warm lower multipliers");
    CheckSize(warm->upper, n_, "warm upper multipliers");
    if (converged(CheckKkt(p_, x0, *warm))) {
      return finish(x0, *warm, Status::kOptimal, 0, "start is optimal");
    }
  }

  // Primal start pushed into the interior.
  VectorXd y(ny_);
  y.head(n_) = x0.cwiseQuotient(scale_);
  if (opt_.max_row_gradient > 0 && m_ > 0) {
    SparseMatrix jeq, jin;
    p_.jacobian(x0, &jeq, &jin);
    VectorXd row_max = VectorXd::Zero(m_);
    for (int k = 0; k < jeq.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(jeq, k); it; ++it) {
        row_max[it.row()] = std::max(row_max[it.row()],
                                     std::abs(it.value() * scale_[it.col()]));
      }
    }
    for (int k = 0; k < jin.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(jin, k); it; ++it) {
        const int r = me_ + static_cast<int>(it.row());
        row_max[r] =
            std::max(row_max[r], std::abs(it.value() * scale_[it.col()]));
      }
    }
    for (int i = 0; i < m_; ++i) {
      if (row_max[i] > opt_.max_row_gradient) {
        row_scale_[i] = std::max(1e-8, opt_.max_row_gradient / row_max[i]);
      }
    }
  }
  {
    VectorXd eq, ineq;
    p_.constraints(x0, &eq, &ineq);
    CheckSize(ineq, mi_, "inequality constraints");
    y.tail(mi_) = row_scale_.tail(mi_).cwiseProduct(ineq);
  }
  const double push = opt_.bound_push;
  for (int i = 0; i < ny_; ++i) {
    const bool lo = HasLower(i), hi = HasUpper(i);
    double pl = lo ? push * std::max(1.0, std::abs(lower_[i])) : 0.0;
    double pu = hi ? push * std::max(1.0, std::abs(upper_[i])) : 0.0;
    if (lo && hi) {
      if (upper_[i] <= lower_[i]) {
        throw std::invalid_argument("nlp: empty bound interval");
      }
      pl = std::min(pl, push * (upper_[i] - lower_[i]));
      pu = std::min(pu, push * (upper_[i] - lower_[i]));
    }
    if (lo) y[i] = std::max(y[i], lower_[i] + pl);
    if (hi) y[i] = std::min(y[i], upper_[i] - pu);
  }

  double mu = opt_.initial_barrier;
  VectorXd z_lower = VectorXd::Zero(ny_), z_upper = VectorXd::Zero(ny_);
  VectorXd lambda = VectorXd::Zero(m_);

  Values values = EvaluateValues(y);
  if (!values.finite) {
    throw std::invalid_argument("nlp: callbacks not finite at x0");
  }
  Derivatives derivs = EvaluateDerivatives(y);

  // Least-squares estimate of the constraint multipliers.
  auto estimate_multipliers = [&] {
    lambda.setZero();
    if (m_ == 0) return;
    const SparseMatrix empty(ny_, ny_);
    if (Factorize(empty, VectorXd::Ones(ny_), derivs.jacobian, 0.0,
                  kConstraintRegularization) ||
        ldlt_.info() == Eigen::Success) {
      VectorXd rhs = VectorXd::Zero(ny_ + m_);
      rhs.head(ny_) = -(derivs.gradient - z_lower + z_upper);
      lambda = SolveKkt(rhs).tail(m_);
      if (!lambda.allFinite() || InfNorm(lambda) > kMaxInitialMultiplier) {
        lambda.setZero();
      }
    }
  };

  if (warm != nullptr) {
    lambda.head(me_) =
        -sigma_ * warm->equality.cwiseQuotient(row_scale_.head(me_));
    lambda.tail(mi_) =
        -sigma_ * warm->inequality.cwiseQuotient(row_scale_.tail(mi_));
    for (int i = 0; i < n_; ++i) {
      if (HasLower(i)) z_lower[i] = sigma_ * scale_[i] * warm->lower[i];
      if (HasUpper(i)) z_upper[i] = sigma_ * scale_[i] * warm->upper[i];
    }
    z_lower.tail(mi_) = -lambda.tail(mi_);
    for (int i = 0; i < ny_; ++i) {
      if (HasLower(i)) {
        z_lower[i] = std::max(z_lower[i], mu / (y[i] - lower_[i]));
      }
      if (HasUpper(i)) {
        z_upper[i] = std::max(z_upper[i], mu / (upper_[i] - y[i]));
      }
    }
  } else {
    for (int i = 0; i < ny_; ++i) {
      if (HasLower(i)) z_lower[i] = 1.0;
      if (HasUpper(i)) z_upper[i] = 1.0;
    }
    estimate_multipliers();
  }

  double penalty = kInitialPenalty;
  double last_shift = 0.0;
  double damping = 0.0;
  double best_infeasibility = kInf;
  int stall_count = 0;
  int failed_searches = 0;
  int iteration = 0;

  // Counts iterations without a sufficient drop of the violation since the
  // iterates last left the feasible region.
  auto stalled = [&] {
    const double infeasibility = InfNorm(values.residual);
    if (infeasibility <=
        std::max(opt_.feasibility_tolerance, opt_.stall_floor)) {
      best_infeasibility = kInf;
      stall_count = 0;
    } else if (infeasibility <
               (1 - opt_.stall_improvement) * best_infeasibility) {
      best_infeasibility = infeasibility;
      stall_count = 0;
    } else {
      return ++stall_count >= opt_.stall_iterations;
    }
    return false;
  };

  auto internal_errors = [&](double barrier, double* dual, double* primal,
                             double* compl_err) {
    const VectorXd rd = derivs.gradient +
                        derivs.jacobian.transpose() * lambda - z_lower +
                        z_upper;
    *dual = InfNorm(rd);
    *primal = InfNorm(values.residual);
    double c = 0.0;
    for (int i = 0; i < ny_; ++i) {
      if (HasLower(i)) {
        c = std::max(c, std::abs(z_lower[i] * (y[i] - lower_[i]) - barrier));
      }
      if (HasUpper(i)) {
        c = std::max(c, std::abs(z_upper[i] * (upper_[i] - y[i]) - barrier));
      }
    }
    *compl_err = c;
  };

  for (;; ++iteration) {
    if (stop_early_ && iteration > 0 && stop_early_(Unscaled(y))) {
      stopped_early_ = true;
      return finish(Unscaled(y), ToUser(lambda, z_lower, z_upper),
                    Status::kOptimal, iteration, "target reached");
    }
    double dual_err, primal_err, compl_err;
    internal_errors(0.0, &dual_err, &primal_err, &compl_err);
    if (primal_err <= opt_.feasibility_tolerance &&
        dual_err <= opt_.optimality_tolerance &&
        compl_err <= opt_.optimality_tolerance) {
      const VectorXd x = Unscaled(y);
      Multipliers mult = ToUser(lambda, z_lower, z_upper);
      if (converged(CheckKkt(p_, x, mult))) {
        return finish(x, std::move(mult), Status::kOptimal, iteration,
                      "converged");
      }
    }
    if (iteration >= opt_.max_iterations) {
      return finish(Unscaled(y), ToUser(lambda, z_lower, z_upper),
                    Status::kMaxIterations, iteration,
                    "iteration limit reached");
    }

    // Barrier update (possibly several times per iteration).
    const double mu_min =
        std::min(opt_.feasibility_tolerance, opt_.optimality_tolerance) / 10;
    for (;;) {
      double d_err, p_err, c_err;
      internal_errors(mu, &d_err, &p_err, &c_err);
      if (std::max({d_err, p_err, c_err}) > kBarrierErrorFactor * mu ||
          mu <= mu_min) {
        break;
      }
      mu = std::max(mu_min, std::min(kBarrierDecrease * mu,
                                     std::pow(mu, kBarrierPower)));
    }
    const double tau = std::max(kMinFractionToBoundary, 1.0 - mu);

    // Newton system.
    const SparseMatrix hessian = LagrangianHessian(y, lambda);
    VectorXd sigma_diag = VectorXd::Zero(ny_);
    for (int i = 0; i < ny_; ++i) {
      if (HasLower(i)) sigma_diag[i] += z_lower[i] / (y[i] - lower_[i]);
      if (HasUpper(i)) sigma_diag[i] += z_upper[i] / (upper_[i] - y[i]);
    }
    const VectorXd barrier_grad =
        derivs.gradient + mu * LogBarrierGradient(y);
    VectorXd rhs(ny_ + m_);
    rhs.head(ny_) =
        -(barrier_grad + derivs.jacobian.transpose() * lambda);
    rhs.tail(m_) = -values.residual;

    double shift = damping;
    if (failed_searches > 0) {
      shift = std::max(kFirstHessianShift, 10.0 * last_shift);
      if (shift > kMaxHessianShift) {
        return finish(Unscaled(y), ToUser(lambda, z_lower, z_upper),
                      Status::kNumerical, iteration, "line search failed");
      }
    }
    bool factored = Factorize(hessian, sigma_diag, derivs.jacobian, shift,
                              kConstraintRegularization);
    if (!factored) {
      shift = shift > 0   ? shift * kShiftIncrease
              : last_shift == 0.0
                  ? kFirstHessianShift
                  : std::max(kMinHessianShift, kShiftDecrease * last_shift);
      while (!(factored = Factorize(hessian, sigma_diag, derivs.jacobian,
                                    shift, kConstraintRegularization))) {
        shift *= last_shift == 0.0 ? kFirstShiftIncrease : kShiftIncrease;
        if (shift > kMaxHessianShift) break;
      }
      if (!factored) {
        return finish(Unscaled(y), ToUser(lambda, z_lower, z_upper),
                      Status::kNumerical, iteration,
                      "KKT matrix could not be regularized");
      }
    }
    if (shift > 0) last_shift = shift;

    const VectorXd sol = SolveKkt(rhs);
    const VectorXd dy = sol.head(ny_);
    const VectorXd dlambda = sol.tail(m_);
    if (!sol.allFinite()) {
      return finish(Unscaled(y), ToUser(lambda, z_lower, z_upper),
                    Status::kNumerical, iteration, "non-finite step");
    }
    VectorXd dz_lower = VectorXd::Zero(ny_), dz_upper = VectorXd::Zero(ny_);
    for (int i = 0; i < ny_; ++i) {
      if (HasLower(i)) {
        const double s = y[i] - lower_[i];
        dz_lower[i] = mu / s - z_lower[i] - z_lower[i] / s * dy[i];
      }
      if (HasUpper(i)) {
        const double s = upper_[i] - y[i];
        dz_upper[i] = mu / s - z_upper[i] + z_upper[i] / s * dy[i];
      }
    }

    // Augmented Lagrangian merit over (y, lambda); the penalty makes the
    // step a descent direction with a curvature-based margin.
    const double infeas = L1Norm(values.residual);
    const double slope_barrier = barrier_grad.dot(dy);
    const VectorXd curvature_vec =
        kkt_unreg_full_.topLeftCorner(ny_, ny_) * dy;
    const double curvature = std::max(0.0, dy.dot(curvature_vec));
    const VectorXd jdy = derivs.jacobian * dy;
    const double slope_lagrangian = slope_barrier + lambda.dot(jdy) +
                                    dlambda.dot(values.residual);
    const double slope_penalty = values.residual.dot(jdy);
    // Recomputed every step so a transient spike does not freeze a large
    // penalty for the rest of the solve.
    if (slope_penalty < 0) {
      const double needed =
          (slope_lagrangian + 0.5 * curvature) / -slope_penalty;
      penalty = std::max(kInitialPenalty, kPenaltyGrowth * needed);
    }
    const double slope = slope_lagrangian + penalty * slope_penalty;

    auto merit = [&](const VectorXd& yy, const Values& v,
                     const VectorXd& lam) {
      return v.objective + mu * LogBarrier(yy) + lam.dot(v.residual) +
             0.5 * penalty * v.residual.squaredNorm();
    };
    const double merit0 = merit(y, values, lambda);
    const double alpha_max = FractionToBoundary(y, dy, tau);
    const double alpha_z_lower =
        FractionToBoundaryPositive(z_lower, dz_lower, tau);
    const double alpha_z_upper =
        FractionToBoundaryPositive(z_upper, dz_upper, tau);
    const double alpha_z = std::min(alpha_z_lower, alpha_z_upper);

    // Far from feasibility a collapsing step hands over to restoration.
    const bool may_restore =
        allow_restoration_ &&
        InfNorm(values.residual) >
            std::max(kRestorationThreshold, opt_.feasibility_tolerance);
    const double min_step = may_restore ? kRestorationMinStep : kMinStep;
    bool accepted = false;
    int backtracks = 0;
    double alpha = alpha_max;
    VectorXd y_new;
    Values v_new;
    double merit_new = 0.0;
    if (slope < 0) {
      for (int trial = 0; alpha >= min_step;
           ++trial, alpha *= 0.5, ++backtracks) {
        y_new = y + alpha * dy;
        v_new = EvaluateValues(y_new);
        if (v_new.finite) {
          merit_new = merit(y_new, v_new, lambda + alpha * dlambda);
          if (merit_new <= merit0 + kArmijo * alpha * slope) {
            accepted = true;
            break;
          }
        }
        if (trial == 0 && v_new.finite &&
            L1Norm(v_new.residual) >= infeas && m_ > 0) {
          // Second-order correction.
          VectorXd soc_rhs = VectorXd::Zero(ny_ + m_);
          soc_rhs.tail(m_) = -v_new.residual;
          const VectorXd correction = SolveKkt(soc_rhs).head(ny_);
          const VectorXd dy_soc = alpha * dy + correction;
          const double alpha_soc = FractionToBoundary(y, dy_soc, tau);
          if (alpha_soc >= 1.0 && correction.allFinite()) {
            const VectorXd y_soc = y + dy_soc;
            const Values v_soc = EvaluateValues(y_soc);
            if (v_soc.finite) {
              const double merit_soc =
                  merit(y_soc, v_soc, lambda + alpha * dlambda);
              if (merit_soc <= merit0 + kArmijo * alpha * slope) {
                y_new = y_soc;
                v_new = v_soc;
                merit_new = merit_soc;
                accepted = true;
                break;
              }
            }
          }
        }
      }
    }

    if (opt_.verbosity > 0) {
      double d_err, p_err, c_err;
      internal_errors(0.0, &d_err, &p_err, &c_err);
      std::fprintf(stderr,
                   "%5d f=% .8e inf_pr=%.2e inf_du=%.2e compl=%.2e "
                   "lg(mu)=%.1f shift=%.1e alpha=%.2e/%.2e nu=%.1e%s\n",
                   iteration, values.objective / sigma_, p_err, d_err, c_err,
                   std::log10(mu), shift, accepted ? alpha : 0.0, alpha_max,
                   penalty,
                   accepted ? "" : " (rejected)");
    }

    if (!accepted && may_restore) {
      const Restoration rest =
          Restore(y, mu,
                  std::min(kRestorationBudget,
                           opt_.max_iterations - iteration - 1));
      iteration += rest.iterations;
      if (opt_.verbosity > 0) {
        std::fprintf(stderr, "restoration: %d iterations, %s\n",
                     rest.iterations,
                     rest.reached ? "reached target" : "failed");
      }
      if (!rest.reached) {
        return finish(Unscaled(y), ToUser(lambda, z_lower, z_upper),
                      rest.status == Status::kMaxIterations
                          ? Status::kMaxIterations
                          : Status::kInfeasible,
                      iteration + 1, "restoration failed");
      }
      y = rest.y;
      values = EvaluateValues(y);
      derivs = EvaluateDerivatives(y);
      for (int i = 0; i < ny_; ++i) {
        if (HasLower(i)) z_lower[i] = mu / (y[i] - lower_[i]);
        if (HasUpper(i)) z_upper[i] = mu / (upper_[i] - y[i]);
      }
      estimate_multipliers();
      penalty = kInitialPenalty;
      failed_searches = 0;
      damping = 0.0;
      if (stalled()) {
        return finish(Unscaled(y), ToUser(lambda, z_lower, z_upper),
                      Status::kInfeasible, iteration + 1,
                      "constraint violation stalled");
      }
      continue;
    }
    if (!accepted) {
      ++failed_searches;
      if (failed_searches > 12) {
        return finish(Unscaled(y), ToUser(lambda, z_lower, z_upper),
                      Status::kNumerical, iteration + 1,
                      "line search failed");
      }
      if (last_shift == 0.0) last_shift = kFirstHessianShift;
      continue;
    }
    failed_searches = 0;
    if (backtracks == 0) {
      damping *= kDampingDecrease;
      if (damping < kMinDamping) damping = 0.0;
    } else if (backtracks >= kDampingBacktracks) {
      damping = std::min(kMaxDamping,
                         std::max(kMinDamping, damping * kDampingIncrease));
    }
    report.merit_trace.push_back(
        {iteration, mu, penalty, merit0, merit_new});

    y = std::move(y_new);
    values = std::move(v_new);
    lambda += alpha * dlambda;
    z_lower += alpha_z * dz_lower;
    z_upper += alpha_z * dz_upper;
    for (int i = 0; i < ny_; ++i) {
      if (HasLower(i)) {
        const double s = y[i] - lower_[i];
        z_lower[i] = std::clamp(z_lower[i], mu / (kMultiplierSafeguard * s),
                                kMultiplierSafeguard * mu / s);
      }
      if (HasUpper(i)) {
        const double s = upper_[i] - y[i];
        z_upper[i] = std::clamp(z_upper[i], mu / (kMultiplierSafeguard * s),
                                kMultiplierSafeguard * mu / s);
      }
    }
    derivs = EvaluateDerivatives(y);

    if (stalled()) {
      return finish(Unscaled(y), ToUser(lambda, z_lower, z_upper),
                    Status::kInfeasible, iteration + 1,
                    "constraint violation stalled");
    }
  }
}

}  // namespace

void Problem::Validate() const {
  if (num_variables <= 0 || num_equalities < 0 || num_inequalities < 0) {
    throw std::invalid_argument("nlp: invalid problem dimensions");
  }
  if (lower.size() != num_variables || upper.size() != num_variables) {
    throw std::invalid_argument("nlp: bound vectors have wrong size");
  }
  if ((lower.array() > upper.array()).any()) {
    throw std::invalid_argument("nlp: lower bound exceeds upper bound");
  }
  if (variable_scaling.size() != 0 &&
      (variable_scaling.size() != num_variables ||
       (variable_scaling.array() <= 0).any())) {
    throw std::invalid_argument("nlp: invalid variable scaling");
  }
  if (!(objective_scaling > 0) || !std::isfinite(objective_scaling)) {
    throw std::invalid_argument("nlp: invalid objective scaling");
  }
  if (!objective || !gradient || !constraints || !jacobian) {
    throw std::invalid_argument("nlp: missing callback");
  }
}

std::string ToString(Status s) {
  switch (s) {
    case Status::kOptimal:
      return "optimal";
    case Status::kMaxIterations:
      return "max_iter";
    case Status::kInfeasible:
      return "infeasible";
    case Status::kNumerical:
      return "numerical";
  }
  return "unknown";
}

Result Solve(const Problem& problem, const VectorXd& x0,
             const Options& options, const Multipliers* initial_multipliers) {
  InteriorPoint solver(problem, options);
  return solver.Run(x0, initial_multipliers);
}

KktResiduals CheckKkt(const Problem& problem, const VectorXd& x,
                      const Multipliers& mult) {
  problem.Validate();
  const int n = problem.num_variables;
  const int me = problem.num_equalities;
  const int mi = problem.num_inequalities;
  CheckSize(x, n, "x");
  CheckSize(mult.equality, me, "equality multipliers");
  CheckSize(mult.inequality, mi, "inequality multipliers");
  CheckSize(mult.lower, n, "lower multipliers");
  CheckSize(mult.upper, n, "upper multipliers");
  const VectorXd scale = problem.variable_scaling.size() == n
                             ? problem.variable_scaling
                             : VectorXd::Ones(n);
  const double sigma = problem.objective_scaling;

  VectorXd eq, ineq;
  problem.constraints(x, &eq, &ineq);
  SparseMatrix jeq, jin;
  problem.jacobian(x, &jeq, &jin);
  VectorXd grad = problem.gradient(x) - mult.lower + mult.upper;
  if (me > 0) grad -= jeq.transpose() * mult.equality;
  if (mi > 0) grad -= jin.transpose() * mult.inequality;

  KktResiduals r;
  r.stationarity = sigma * InfNorm(grad.cwiseProduct(scale));
  double feas = InfNorm(eq);
  for (int j = 0; j < mi; ++j) feas = std::max(feas, -ineq[j]);
  for (int i = 0; i < n; ++i) {
    feas = std::max({feas, problem.lower[i] - x[i], x[i] - problem.upper[i]});
  }
  r.feasibility = std::max(feas, 0.0);

  double compl_err = 0.0;
  for (int j = 0; j < mi; ++j) {
    compl_err = std::max({compl_err, std::abs(mult.inequality[j] * ineq[j]),
                          -mult.inequality[j]});
  }
  for (int i = 0; i < n; ++i) {
    const double zl = mult.lower[i], zu = mult.upper[i];
    const double gap_l = std::isfinite(problem.lower[i])
                             ? std::abs(zl * (x[i] - problem.lower[i]))
                             : std::abs(zl);
    const double gap_u = std::isfinite(problem.upper[i])
                             ? std::abs(zu * (problem.upper[i] - x[i]))
                             : std::abs(zu);
    compl_err = std::max({compl_err, gap_l, gap_u, -zl, -zu});
  }
  r.complementarity = sigma * compl_err;
  return r;
}

}  // namespace biped::nlp
