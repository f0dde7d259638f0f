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

#include "biped/transcription.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <limits>
#include <memory>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/QR>

#include "biped/autodiff.h"
#include "biped/dual.h"

namespace biped {
namespace {

using Eigen::VectorXd;
using Triplet = Eigen::Triplet<double>;
template <typename T>
using VecX = Eigen::Matrix<T, Eigen::Dynamic, 1>;

// Every block has at most 24 inputs (two knot states and one torque).
constexpr int kMaxBlockInputs = 24;
using BlockDual = ad::Dual<kMaxBlockInputs>;

template <typename T>
Vec5T<T> Segment5(const VecX<T>& v, int start) {
  return v.template segment<5>(start);
}

// Smoothed absolute power of one interval, summed over the actuated
// joints, before multiplying by h / (M g d).
template <typename T>
T IntervalPower(const Vec5T<T>& dq0, const Eigen::Matrix<T, 4, 1>& u,
                const Vec5T<T>& dq1, double eps_sq) {
  T sum(0.0);
  for (int n = 0; n < kNumActuators; ++n) {
    sum += 0.5 * (ad::SmoothAbs(T(u[n] * dq0[n]), eps_sq) +
                  ad::SmoothAbs(T(u[n] * dq1[n]), eps_sq));
  }
  return sum;
}

double CostScale(const RobotParams& params, const GaitProblem& problem) {
  return problem.h /
         (params.TotalMass() * params.gravity * problem.stride_length);
}

void CheckKey(const nlohmann::json& j, std::initializer_list<const char*> keys,
              const char* what) {
  if (!j.is_object()) {
    throw std::invalid_argument(std::string(what) + " must be an object");
  }
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* k : keys) known = known || key == k;
    if (!known) {
      throw std::invalid_argument(std::string("unknown key '") + key +
                                  "' in " + what);
    }
  }
}

}  // namespace

// --- GaitProblem -------------------------------------------------------------

int GaitProblem::NumIntervals() const {
  return static_cast<int>(std::lround(step_duration / h));
}

void GaitProblem::Validate() const {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(std::string("GaitProblem: ") + msg);
  };
  require(std::isfinite(step_duration) && step_duration > 0,
          "step_duration must be positive");
  require(std::isfinite(h) && h > 0, "h must be positive");
  const int n = NumIntervals();
  require(n >= 1 && std::abs(n * h - step_duration) <= 1e-9 * step_duration,
          "step_duration must be an integer multiple of h");
  require(std::isfinite(stride_length) && stride_length > 0,
          "stride_length must be positive");
  require(std::isfinite(clearance) && clearance >= 0,
          "clearance must be nonnegative");
  require(clearance_exempt_knots >= 0,
          "clearance_exempt_knots must be nonnegative");
  require(torque_bound > 0, "torque_bound must be positive");
  require(std::isfinite(epsilon_sq) && epsilon_sq > 0,
          "epsilon_sq must be positive");
  require(std::isfinite(grf_margin), "grf_margin must be finite");
  require(knee_min < knee_max, "knee_min must be below knee_max");
}

nlohmann::json ToJson(const GaitProblem& p) {
  return {{"stride_length", p.stride_length},
          {"step_duration", p.step_duration},
          {"h", p.h},
          {"clearance", p.clearance},
          {"clearance_exempt_knots", p.clearance_exempt_knots},
          {"torque_bound", p.torque_bound},
          {"epsilon_sq", p.epsilon_sq},
          {"grf_margin", p.grf_margin},
          {"knee_min", p.knee_min},
          {"knee_max", p.knee_max}};
}

GaitProblem GaitProblemFromJson(const nlohmann::json& j) {
  CheckKey(j,
           {"stride_length", "step_duration", "h", "clearance",
            "clearance_exempt_knots", "torque_bound", "epsilon_sq",
            "grf_margin", "knee_min", "knee_max"},
           "gait problem");
  GaitProblem p;
  p.stride_length = j.value("stride_length", p.stride_length);
  p.step_duration = j.value("step_duration", p.step_duration);
  p.h = j.value("h", p.h);
  p.clearance = j.value("clearance", p.clearance);
  p.clearance_exempt_knots =
      j.value("clearance_exempt_knots", p.clearance_exempt_knots);
  p.torque_bound = j.value("torque_bound", p.torque_bound);
  p.epsilon_sq = j.value("epsilon_sq", p.epsilon_sq);
  p.grf_margin = j.value("grf_margin", p.grf_margin);
  p.knee_min = j.value("knee_min", p.knee_min);
  p.knee_max = j.value("knee_max", p.knee_max);
  p.Validate();
  return p;
}

// --- GaitSolution ------------------------------------------------------------

Vec4 GaitSolution::TorqueAt(double t, double h) const {
  if (torques.empty()) return Vec4::Zero();
  const int k = static_cast<int>(std::floor(t / h + 1e-9));
  return torques[std::clamp(k, 0, NumIntervals() - 1)];
}

nlohmann::json ToJson(const GaitSolution& s) {
  nlohmann::json knots = nlohmann::json::array();
  for (const Knot& k : s.knots) {
    knots.push_back({{"t", k.t},
                     {"q", std::vector<double>(k.q.begin(), k.q.end())},
                     {"dq", std::vector<double>(k.dq.begin(), k.dq.end())}});
  }
  nlohmann::json torques = nlohmann::json::array();
  for (const Vec4& u : s.torques) {
    torques.push_back(std::vector<double>(u.begin(), u.end()));
  }
  return {{"knots", knots},
          {"torques", torques},
          {"cot_opt", s.cot_opt},
          {"solver_report",
           {{"status", nlp::ToString(s.report.status)},
            {"iterations", s.report.iterations},
            {"feasibility", s.report.feasibility},
            {"stationarity", s.report.stationarity},
            {"complementarity", s.report.complementarity},
            {"objective", s.report.objective},
            {"wall_time", s.report.wall_time},
            {"message", s.report.message}}}};
}

GaitSolution GaitSolutionFromJson(const nlohmann::json& j) {
  CheckKey(j, {"knots", "torques", "cot_opt", "solver_report"},
           "gait solution");
  GaitSolution s;
  for (const auto& k : j.at("knots")) {
    Knot knot;
    knot.t = k.at("t").get<double>();
    const auto q = k.at("q").get<std::vector<double>>();
    const auto dq = k.at("dq").get<std::vector<double>>();
    if (q.size() != 5 || dq.size() != 5) {
      throw std::invalid_argument("knot states must have 5 entries");
    }
    knot.q = Vec5(q.data());
    knot.dq = Vec5(dq.data());
    s.knots.push_back(knot);
  }
  for (const auto& u : j.at("torques")) {
    const auto v = u.get<std::vector<double>>();
    if (v.size() != 4) throw std::invalid_argument("torques need 4 entries");
    s.torques.push_back(Vec4(v.data()));
  }
  if (s.knots.size() != s.torques.size() + 1) {
    throw std::invalid_argument("expected one more knot than torque sample");
  }
  s.cot_opt = j.at("cot_opt").get<double>();
  if (j.contains("solver_report")) {
    const auto& r = j.at("solver_report");
    const std::string status = r.value("status", "numerical");
    for (nlp::Status st : {nlp::Status::kOptimal, nlp::Status::kMaxIterations,
                           nlp::Status::kInfeasible, nlp::Status::kNumerical}) {
      if (nlp::ToString(st) == status) s.report.status = st;
    }
    s.report.iterations = r.value("iterations", 0);
    s.report.feasibility = r.value("feasibility", 0.0);
    s.report.stationarity = r.value("stationarity", 0.0);
    s.report.complementarity = r.value("complementarity", 0.0);
    s.report.objective = r.value("objective", 0.0);
    s.report.wall_time = r.value("wall_time", 0.0);
    s.report.message = r.value("message", "");
  }
  return s;
}

void WriteCsv(std::ostream& out, const GaitSolution& s) {
  out << "t,q1,q2,q3,q4,q5,dq1,dq2,dq3,dq4,dq5,u1,u2,u3,u4\n";
  out << std::setprecision(17);
  for (size_t k = 0; k < s.knots.size(); ++k) {
    const Knot& knot = s.knots[k];
    out << knot.t;
    for (double v : knot.q) out << ',' << v;
    for (double v : knot.dq) out << ',' << v;
    if (k < s.torques.size()) {
      for (double v : s.torques[k]) out << ',' << v;
    } else {
      out << ",,,,";
    }
    out << '\n';
  }
}

double CotObjective(const std::vector<Knot>& knots,
                    const std::vector<Vec4>& torques,
                    const RobotParams& params, const GaitProblem& problem) {
  if (torques.empty() || knots.size() != torques.size() + 1) {
    throw std::invalid_argument(
        "CotObjective: need N torque samples and N + 1 knots");
  }
  double sum = 0.0;
  for (size_t k = 0; k < torques.size(); ++k) {
    sum += IntervalPower<double>(knots[k].dq, torques[k], knots[k + 1].dq,
                                 problem.epsilon_sq);
  }
  return sum * CostScale(params, problem);
}

// --- GaitNlp -----------------------------------------------------------------

GaitNlp::GaitNlp(const RobotParams& params, const GaitProblem& problem,
                 Cost cost)
    : params_(params), problem_(problem), biped_(params), cost_(cost) {
  problem_.Validate();
  n_ = problem_.NumIntervals();
  cost_scale_ = CostScale(params_, problem_);

  for (int k = 0; k < n_; ++k) {
    Block b{Block::Kind::kInterval, k, {}, {}, {}};
    for (int i = 0; i < kStride + kStateSize; ++i) {
      b.vars.push_back(StateOffset(k) + i);
    }
    for (int i = 0; i < kStateSize; ++i) b.eq_rows.push_back(DefectRow(k) + i);
    b.ineq_rows.push_back(GrfRow(k));
    if (k == n_ - 1) b.ineq_rows.push_back(GrfRow(n_));
    blocks_.push_back(std::move(b));
  }
  for (int k = 1; k < n_; ++k) {
    Block b{Block::Kind::kKnot, k, {}, {}, {TipRow(k)}};
    for (int i = 0; i < kNumJoints; ++i) b.vars.push_back(StateOffset(k) + i);
    blocks_.push_back(std::move(b));
  }
  Block b{Block::Kind::kBoundary, n_, {}, {}, {DescentRow()}};
  for (int i = 0; i < kStateSize; ++i) b.vars.push_back(StateOffset(0) + i);
  for (int i = 0; i < kStateSize; ++i) b.vars.push_back(StateOffset(n_) + i);
  b.eq_rows = {TipHeightRow(), StrideRow()};
  for (int i = 0; i < kStateSize; ++i) b.eq_rows.push_back(PeriodicityRow() + i);
  blocks_.push_back(std::move(b));
}

double GaitNlp::TipFloor(int k) const {
  const int e = problem_.clearance_exempt_knots;
  return (k >= e && k <= n_ - e) ? problem_.clearance : 0.0;
}

template <typename T>
void GaitNlp::EvaluateBlock(const Block& b, const VecX<T>& v, T* cost,
                            VecX<T>* eq, VecX<T>* ineq) const {
  switch (b.kind) {
    case Block::Kind::kInterval: {
      const Vec5T<T> q0 = Segment5(v, 0), dq0 = Segment5(v, 5);
      const Eigen::Matrix<T, 4, 1> u = v.template segment<4>(10);
      const Vec5T<T> q1 = Segment5(v, 14), dq1 = Segment5(v, 19);
      if (cost != nullptr) {
        if (cost_ == Cost::kTorqueSquared) {
          constexpr double kTorqueRef = 100.0;
          *cost = (problem_.h / (kTorqueRef * kTorqueRef)) * u.squaredNorm();
        } else {
          *cost = cost_scale_ *
                  IntervalPower<T>(dq0, u, dq1, problem_.epsilon_sq);
        }
      }
      if (eq == nullptr) return;
      const double h = problem_.h;
      const Vec5T<T> a0 = biped_.ForwardDynamics<T, T>(q0, dq0, u);
      const Vec5T<T> a1 = biped_.ForwardDynamics<T, T>(q1, dq1, u);
      eq->resize(kStateSize);
      eq->template head<5>() = q1 - q0 - (0.5 * h) * (dq0 + dq1);
      eq->template tail<5>() = dq1 - dq0 - (0.5 * h) * (a0 + a1);
      ineq->resize(static_cast<Eigen::Index>(b.ineq_rows.size()));
      (*ineq)[0] = biped_.GroundReaction(q0, dq0, a0)[1] - problem_.grf_margin;
      if (ineq->size() > 1) {
        (*ineq)[1] =
            biped_.GroundReaction(q1, dq1, a1)[1] - problem_.grf_margin;
      }
      return;
    }
    case Block::Kind::kKnot: {
      if (cost != nullptr) *cost = T(0.0);
      if (eq == nullptr) return;
      eq->resize(0);
      ineq->resize(1);
      (*ineq)[0] = biped_.SwingTip(Segment5(v, 0))[1] - TipFloor(b.k);
      return;
    }
    case Block::Kind::kBoundary: {
      if (cost != nullptr) *cost = T(0.0);
      if (eq == nullptr) return;
      const Vec5T<T> q0 = Segment5(v, 0), dq0 = Segment5(v, 5);
      const Vec5T<T> qn = Segment5(v, 10), dqn = Segment5(v, 15);
      const Vec2T<T> tip = biped_.SwingTip(qn);
      Vec5T<T> q_plus, dq_plus;
      Vec2T<T> impulse;
      biped_.ImpactUnchecked(qn, dqn, &q_plus, &dq_plus, &impulse);
      eq->resize(12);
      (*eq)[0] = tip[1];
      (*eq)[1] = tip[0] - problem_.stride_length;
      eq->template segment<5>(2) = q_plus - q0;
      eq->template segment<5>(7) = dq_plus - dq0;
      ineq->resize(1);
      (*ineq)[0] = -biped_.SwingTipVelocity(qn, dqn)[1];
      return;
    }
  }
}

namespace {

VectorXd Gather(const VectorXd& x, const std::vector<int>& idx) {
  VectorXd v(idx.size());
  for (size_t i = 0; i < idx.size(); ++i) v[i] = x[idx[i]];
  return v;
}

}  // namespace

double GaitNlp::Objective(const VectorXd& x) const {
  double sum = 0.0;
  for (const Block& b : blocks_) {
    if (b.kind != Block::Kind::kInterval) continue;
    double c = 0.0;
    EvaluateBlock<double>(b, Gather(x, b.vars), &c, nullptr, nullptr);
    sum += c;
  }
  return sum;
}

VectorXd GaitNlp::ObjectiveGradient(const VectorXd& x) const {
  VectorXd g = VectorXd::Zero(num_variables());
  for (const Block& b : blocks_) {
    if (b.kind != Block::Kind::kInterval) continue;
    const VectorXd grad = ad::Gradient<kMaxBlockInputs>(
        [&](const VecX<BlockDual>& v) {
          BlockDual c;
          EvaluateBlock<BlockDual>(b, v, &c, nullptr, nullptr);
          return c;
        },
        Gather(x, b.vars));
    for (size_t i = 0; i < b.vars.size(); ++i) g[b.vars[i]] += grad[i];
  }
  return g;
}

void GaitNlp::Constraints(const VectorXd& x, VectorXd* eq,
                          VectorXd* ineq) const {
  eq->setZero(num_equalities());
  ineq->setZero(num_inequalities());
  for (const Block& b : blocks_) {
    VectorXd e, in;
    EvaluateBlock<double>(b, Gather(x, b.vars), nullptr, &e, &in);
    for (size_t i = 0; i < b.eq_rows.size(); ++i) (*eq)[b.eq_rows[i]] = e[i];
    for (size_t i = 0; i < b.ineq_rows.size(); ++i) {
      (*ineq)[b.ineq_rows[i]] = in[i];
    }
  }
}

void GaitNlp::ConstraintJacobian(const VectorXd& x, nlp::SparseMatrix* eq,
                                 nlp::SparseMatrix* ineq) const {
  std::vector<Triplet> te, ti;
  for (const Block& b : blocks_) {
    const int ne = static_cast<int>(b.eq_rows.size());
    const Eigen::MatrixXd jac = ad::Jacobian<kMaxBlockInputs>(
        [&](const VecX<BlockDual>& v) {
          VecX<BlockDual> e, in;
          EvaluateBlock<BlockDual>(b, v, nullptr, &e, &in);
          VecX<BlockDual> out(e.size() + in.size());
          out << e, in;
          return out;
        },
        Gather(x, b.vars));
    for (int r = 0; r < jac.rows(); ++r) {
      for (size_t c = 0; c < b.vars.size(); ++c) {
        if (r < ne) {
          te.emplace_back(b.eq_rows[r], b.vars[c], jac(r, c));
        } else {
          ti.emplace_back(b.ineq_rows[r - ne], b.vars[c], jac(r, c));
        }
      }
    }
  }
  eq->resize(num_equalities(), num_variables());
  eq->setFromTriplets(te.begin(), te.end());
  ineq->resize(num_inequalities(), num_variables());
  ineq->setFromTriplets(ti.begin(), ti.end());
}

nlp::SparseMatrix GaitNlp::LagrangianHessian(const VectorXd& x,
                                             double obj_factor,
                                             const VectorXd& w_eq,
                                             const VectorXd& w_in) const {
  std::vector<Triplet> t;
  for (const Block& b : blocks_) {
    auto weighted = [&](const VecX<BlockDual>& v) {
      BlockDual c(0.0);
      VecX<BlockDual> e, in;
      EvaluateBlock<BlockDual>(b, v, &c, &e, &in);
      BlockDual sum = obj_factor * c;
      for (size_t i = 0; i < b.eq_rows.size(); ++i) {
        sum += w_eq[b.eq_rows[i]] * e[i];
      }
      for (size_t i = 0; i < b.ineq_rows.size(); ++i) {
        sum += w_in[b.ineq_rows[i]] * in[i];
      }
      return sum;
    };
    const VectorXd v = Gather(x, b.vars);
    const int m = static_cast<int>(v.size());
    Eigen::MatrixXd hess(m, m);
    for (int j = 0; j < m; ++j) {
      const double step = 1e-5 * std::max(1.0, std::abs(v[j]));
      VectorXd vp = v, vm = v;
      vp[j] += step;
      vm[j] -= step;
      hess.col(j) = (ad::Gradient<kMaxBlockInputs>(weighted, vp) -
                     ad::Gradient<kMaxBlockInputs>(weighted, vm)) /
                    (2 * step);
    }
    for (int j = 0; j < m; ++j) {
      for (int i = 0; i < m; ++i) {
        t.emplace_back(b.vars[i], b.vars[j],
                       0.5 * (hess(i, j) + hess(j, i)));
      }
    }
  }
  nlp::SparseMatrix h(num_variables(), num_variables());
  h.setFromTriplets(t.begin(), t.end());
  return h;
}

nlp::Problem GaitNlp::Problem() const {
  nlp::Problem p;
  p.num_variables = num_variables();
  p.num_equalities = num_equalities();
  p.num_inequalities = num_inequalities();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  p.lower = VectorXd::Constant(p.num_variables, -kInf);
  p.upper = VectorXd::Constant(p.num_variables, kInf);
  for (int k = 0; k <= n_; ++k) {
    for (int knee : {2, 3}) {
      p.lower[StateOffset(k) + knee] = problem_.knee_min;
      p.upper[StateOffset(k) + knee] = problem_.knee_max;
    }
    if (k < n_) {
      p.lower.segment<4>(TorqueOffset(k)).setConstant(-problem_.torque_bound);
      p.upper.segment<4>(TorqueOffset(k)).setConstant(problem_.torque_bound);
    }
  }
  // The callbacks hold a copy of this object so the problem is
  // self-contained.
  auto self = std::make_shared<const GaitNlp>(*this);
  p.objective = [self](const VectorXd& x) { return self->Objective(x); };
  p.gradient = [self](const VectorXd& x) {
    return self->ObjectiveGradient(x);
  };
  p.constraints = [self](const VectorXd& x, VectorXd* eq, VectorXd* in) {
    self->Constraints(x, eq, in);
  };
  p.jacobian = [self](const VectorXd& x, nlp::SparseMatrix* je,
                      nlp::SparseMatrix* ji) {
    self->ConstraintJacobian(x, je, ji);
  };
  p.hessian = [self](const VectorXd& x, double f, const VectorXd& we,
                     const VectorXd& wi) {
    return self->LagrangianHessian(x, f, we, wi);
  };
  return p;
}

VectorXd GaitNlp::Pack(const std::vector<Knot>& knots,
                       const std::vector<Vec4>& torques) const {
  if (static_cast<int>(knots.size()) != n_ + 1 ||
      static_cast<int>(torques.size()) != n_) {
    throw std::invalid_argument("Pack: expected N + 1 knots and N torques");
  }
  VectorXd x(num_variables());
  for (int k = 0; k <= n_; ++k) {
    x.segment<5>(StateOffset(k)) = knots[k].q;
    x.segment<5>(StateOffset(k) + 5) = knots[k].dq;
    if (k < n_) x.segment<4>(TorqueOffset(k)) = torques[k];
  }
  return x;
}

GaitSolution GaitNlp::Unpack(const VectorXd& x) const {
  if (x.size() != num_variables()) {
    throw std::invalid_argument("Unpack: wrong variable count");
  }
  GaitSolution s;
  for (int k = 0; k <= n_; ++k) {
    Knot knot;
    knot.t = k * problem_.h;
    knot.q = x.segment<5>(StateOffset(k));
    knot.dq = x.segment<5>(StateOffset(k) + 5);
    s.knots.push_back(knot);
    if (k < n_) s.torques.push_back(x.segment<4>(TorqueOffset(k)));
  }
  s.cot_opt = CotObjective(s.knots, s.torques, params_, problem_);
  return s;
}

VectorXd GaitNlp::InitialGuess(double jitter, unsigned seed) const {
  const double leg = params_.lengths[kStanceFemur] + params_.lengths[kStanceTibia];
  const double half = 0.5 * problem_.stride_length / leg;
  if (half >= 1.0) {
    throw std::invalid_argument("InitialGuess: stride longer than the legs");
  }
  const double a = std::asin(half);
  Vec5 start, end;
  start << M_PI + a, M_PI - a, 0, 0, 0;
  end << M_PI - a, M_PI + a, 0, 0, 0;

  std::vector<Vec5> q(n_ + 1);
  std::mt19937 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int k = 0; k <= n_; ++k) {
    q[k] = start + (end - start) * (static_cast<double>(k) / n_);
    if (jitter > 0 && k > 0 && k < n_) {
      for (int i = 0; i < kNumJoints; ++i) q[k][i] += jitter * noise(rng);
      for (int knee : {2, 3}) {
        q[k][knee] = std::clamp(q[k][knee], problem_.knee_min,
                                problem_.knee_max);
      }
    }
  }
  VectorXd x = VectorXd::Zero(num_variables());
  const double h = problem_.h;
  for (int k = 0; k <= n_; ++k) {
    Vec5 dq;
    if (n_ == 1) {
      dq = (q[1] - q[0]) / h;
    } else if (k == 0) {
      dq = (q[1] - q[0]) / h;
    } else if (k == n_) {
      dq = (q[n_] - q[n_ - 1]) / h;
    } else {
      dq = (q[k + 1] - q[k - 1]) / (2 * h);
    }
    x.segment<5>(StateOffset(k)) = q[k];
    x.segment<5>(StateOffset(k) + 5) = dq;
  }
  return x;
}

VectorXd GaitNlp::FitTorques(const VectorXd& x) const {
  VectorXd out = x;
  const double h = problem_.h;
  for (int k = 0; k < n_; ++k) {
    const VectorXd z0 = x.segment<kStateSize>(StateOffset(k));
    const VectorXd z1 = x.segment<kStateSize>(StateOffset(k + 1));
    const State s0{z0.head<5>(), z0.tail<5>()};
    const State s1{z1.head<5>(), z1.tail<5>()};
    // defect(u) = r - M u with M = h/2 (a0'(u) + a1'(u)).
    const Vec5 a0 = biped_.Accelerations(s0, Vec4::Zero());
    const Vec5 a1 = biped_.Accelerations(s1, Vec4::Zero());
    const Vec5 r = s1.dq - s0.dq - 0.5 * h * (a0 + a1);
    Eigen::Matrix<double, 5, 4> m;
    for (int j = 0; j < kNumActuators; ++j) {
      const Vec4 e = Vec4::Unit(j);
      m.col(j) = 0.5 * h *
                 (biped_.Accelerations(s0, e) - a0 +
                  biped_.Accelerations(s1, e) - a1);
    }
    const Vec4 u = m.colPivHouseholderQr().solve(r);
    out.segment<4>(TorqueOffset(k)) =
        u.cwiseMax(-problem_.torque_bound).cwiseMin(problem_.torque_bound);
  }
  return out;
}

// --- Optimization driver -----------------------------------------------------

namespace {

nlp::Problem ScaledProblem(const GaitNlp& nlp_stage, double torque_scale,
                           double objective_scale) {
  nlp::Problem p = nlp_stage.Problem();
  p.variable_scaling = VectorXd::Ones(p.num_variables);
  for (int k = 0; k < nlp_stage.num_intervals(); ++k) {
    p.variable_scaling.segment<4>(GaitNlp::TorqueOffset(k))
        .setConstant(torque_scale);
  }
  p.objective_scaling = objective_scale;
  return p;
}

}  // namespace

GaitSolution OptimizeGait(const RobotParams& params,
                          const GaitProblem& problem,
                          const GaitSolveOptions& options,
                          const VectorXd& guess) {
  const GaitNlp final_nlp(params, problem);
  VectorXd x = guess.size() == 0
                   ? final_nlp.FitTorques(final_nlp.InitialGuess(
                         options.jitter, options.seed))
                   : guess;
  if (x.size() != final_nlp.num_variables()) {
    throw std::invalid_argument("OptimizeGait: guess has wrong size");
  }
  struct Stage {
    GaitNlp::Cost cost;
    double epsilon_sq;
  };
  std::vector<Stage> stages;
  if (guess.size() == 0 && options.torque_squared_warmup) {
    stages.push_back({GaitNlp::Cost::kTorqueSquared, problem.epsilon_sq});
  }
  for (double e : options.continuation) {
    if (e > problem.epsilon_sq) {
      stages.push_back({GaitNlp::Cost::kCostOfTransport, e});
    }
  }
  stages.push_back({GaitNlp::Cost::kCostOfTransport, problem.epsilon_sq});

  nlp::Multipliers multipliers;
  bool warm = false;
  int total_iterations = 0;
  double total_time = 0.0;
  nlp::SolveReport last;
  for (const Stage& stage : stages) {
    GaitProblem stage_problem = problem;
    stage_problem.epsilon_sq = stage.epsilon_sq;
    const GaitNlp nlp_stage(params, stage_problem, stage.cost);
    const bool cot = stage.cost == GaitNlp::Cost::kCostOfTransport;
    const nlp::Problem p = ScaledProblem(
        nlp_stage, options.torque_scale, cot ? options.objective_scale : 1.0);
    nlp::Options opt = options.solver;
    // Multipliers do not carry over from the warm-up objective.
    const bool use_multipliers = warm && cot && last.status ==
                                                   nlp::Status::kOptimal;
    if (warm) {
      opt.initial_barrier = options.warm_barrier;
      opt.bound_push = options.warm_bound_push;
    }
    nlp::Result r =
        nlp::Solve(p, x, opt, use_multipliers ? &multipliers : nullptr);
    if (options.solver.verbosity > 0) {
      std::fprintf(stderr, "%s eps_sq=%g: %s after %d iterations, f=%.6f\n",
                   cot ? "cot" : "torque^2", stage.epsilon_sq,
                   nlp::ToString(r.report.status).c_str(),
                   r.report.iterations, r.report.objective);
    }
    x = std::move(r.x);
    multipliers = std::move(r.multipliers);
    warm = true;
    total_iterations += r.report.iterations;
    total_time += r.report.wall_time;
    last = std::move(r.report);
  }
  GaitSolution s = final_nlp.Unpack(x);
  s.report = std::move(last);
  s.report.iterations = total_iterations;
  s.report.wall_time = total_time;
  return s;
}

}  // namespace biped
