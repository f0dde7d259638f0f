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

#include "biped/analysis.h"

#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace biped::analysis {

LinearFit FitLine(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("FitLine: need two or more points");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("FitLine: x values coincide");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

RateFit FitConvergenceRate(const std::vector<double>& errors, double floor,
                           double ceiling_fraction) {
  RateFit fit;
  if (errors.empty() || !(errors[0] > 0.0)) return fit;
  const double ceiling = ceiling_fraction * errors[0];
  std::vector<double> k, log_e;
  for (size_t i = 0; i < errors.size(); ++i) {
    if (errors[i] >= floor && errors[i] <= ceiling) {
      k.push_back(static_cast<double>(i));
      log_e.push_back(std::log(errors[i]));
    }
  }
  fit.samples = static_cast<int>(k.size());
  if (fit.samples < 3) return fit;
  fit.lambda = std::exp(FitLine(k, log_e).slope);
  fit.defined = true;
  return fit;
}

ConvergenceResult ConvergenceRate(const Simulator& sim,
                                  const State& fixed_point,
                                  const PushExperiment& push) {
  ConvergenceResult r;
  r.point = push.point;
  State x = sim.biped().Push(fixed_point, push.point, push.impulse);
  r.errors.push_back(SectionDistance(x, fixed_point));
  for (int i = 0; i < push.followup_steps; ++i) {
    std::string failure;
    const std::optional<StepEvent> e = sim.StepMap(x, &failure);
    if (!e) {
      r.fell = true;
      r.note = failure;
      break;
    }
    x = e->post;
    r.errors.push_back(SectionDistance(x, fixed_point));
    ++r.steps_after_push;
  }
  const RateFit fit = FitConvergenceRate(r.errors);
  r.defined = fit.defined;
  r.lambda = fit.lambda;
  if (r.fell) {
    r.lambda = std::max(1.0, fit.defined ? fit.lambda : 1.0);
  } else if (!fit.defined) {
    if (r.errors[0] == 0.0) {
      r.note = "no disturbance";
    } else if (r.errors.back() > 0.5 * r.errors[0]) {
      std::ostringstream msg;
      msg << "did not return to the fixed point (final distance "
          << std::setprecision(3) << r.errors.back() << ")";
      r.note = msg.str();
    } else {
      r.note = "too few samples in the linear regime";
    }
  }
  return r;
}

Eigen::Matrix<double, 10, 10> ReturnMapJacobian(const Simulator& sim,
                                                const State& fixed_point,
                                                double step) {
  auto image = [&](const State& x) {
    std::string failure;
    const std::optional<StepEvent> e = sim.StepMap(x, &failure);
    if (!e) throw std::runtime_error("return-map probe fell: " + failure);
    Eigen::Matrix<double, 10, 1> v;
    v << e->post.q, e->post.dq;
    return v;
  };
  Eigen::Matrix<double, 10, 10> jac;
  for (int i = 0; i < 10; ++i) {
    State plus = fixed_point, minus = fixed_point;
    double& p = i < 5 ? plus.q[i] : plus.dq[i - 5];
    double& m = i < 5 ? minus.q[i] : minus.dq[i - 5];
    p += step;
    m -= step;
    jac.col(i) = (image(plus) - image(minus)) / (2.0 * step);
  }
  return jac;
}

double SpectralRadius(const Eigen::Matrix<double, 10, 10>& jacobian) {
  const Eigen::EigenSolver<Eigen::Matrix<double, 10, 10>> eig(jacobian, false);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

SweepRecord EvaluateController(const GaitCase& gait, double omega_n,
                               const SweepOptions& options) {
  SweepRecord rec;
  rec.label = gait.label;
  rec.omega_n = omega_n;
  rec.cot_opt = gait.gait.cot_opt;

  ControllerConfig ctrl;
  ctrl.omega_n = omega_n;
  ctrl.zeta = options.zeta;
  ctrl.interpolation = options.interpolation;
  SimOptions sim_options;
  sim_options.record_samples = false;
  const Simulator sim(gait.params, gait.gait, gait.h, ctrl, sim_options);

  const SimResult nominal = sim.Rollout(options.rollout_steps);
  rec.steps = nominal.steps_completed;
  rec.fell = nominal.fell;
  if (nominal.fell) rec.note = "nominal: " + nominal.fall_reason;
  if (nominal.steps_completed > options.transient_steps) {
    rec.cot_meas = MeasureCot(nominal, gait.params, options.transient_steps);
    rec.ratio = rec.cot_meas / rec.cot_opt;
  }

  const LimitCycle lc = FindLimitCycle(sim, options.limit_cycle_steps,
                                       options.limit_cycle_tolerance);
  rec.limit_cycle = lc.converged;
  if (!lc.converged) {
    if (!rec.note.empty()) rec.note += "; ";
    rec.note += "limit cycle: " + lc.reason;
  }
  // Without a converged cycle the pushes start from the last section
  // reached, and the fit says how quickly they return to it.
  double* slots[] = {&rec.lambda_hip, &rec.lambda_knee, &rec.lambda_torso};
  const PushPoint points[] = {PushPoint::kHip, PushPoint::kStanceKnee,
                              PushPoint::kTorso};
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    PushExperiment push;
    push.point = points[i];
    push.impulse = options.impulse;
    push.followup_steps = options.push_followup_steps;
    const ConvergenceResult c = ConvergenceRate(sim, lc.fixed_point, push);
    *slots[i] = c.defined || c.fell ? c.lambda
                                    : std::numeric_limits<double>::quiet_NaN();
    if (c.fell) {
      if (!rec.note.empty()) rec.note += "; ";
      rec.note += "push " + ToString(points[i]) + " fell: " + c.note;
    }
    sum += *slots[i];
  }
  rec.lambda_avg = sum / 3.0;
  return rec;
}

std::vector<SweepRecord> SweepOmega(const std::vector<GaitCase>& cases,
                                    const SweepOptions& options) {
  const int per_case = static_cast<int>(options.omegas.size());
  const int n = static_cast<int>(cases.size()) * per_case;
  return ParallelMap<SweepRecord>(n, options.threads, [&](int i) {
    return EvaluateController(cases[i / per_case],
                              options.omegas[i % per_case], options);
  });
}

std::string ToString(LegSegment s) {
  return s == LegSegment::kUpper ? "upper" : "lower";
}

LegSegment LegSegmentFromString(const std::string& name) {
  if (name == "upper") return LegSegment::kUpper;
  if (name == "lower") return LegSegment::kLower;
  throw std::invalid_argument("unknown leg segment '" + name +
                              "' (expected upper or lower)");
}

MassSweep SweepMass(int base_set, LegSegment vary,
                    const std::vector<double>& masses,
                    const GaitProblem& problem,
                    const GaitSolveOptions& solve, int threads) {
  const RobotParams base = RobotParams::Preset(base_set);
  const double total = base.TotalMass();
  const double upper = base.masses[kStanceFemur];
  const double lower = base.masses[kStanceTibia];
  MassSweep sweep;
  sweep.records = ParallelMap<MassRecord>(
      static_cast<int>(masses.size()), threads, [&](int i) {
        MassRecord rec;
        rec.vary = vary;
        rec.upper = vary == LegSegment::kUpper ? masses[i] : upper;
        rec.lower = vary == LegSegment::kLower ? masses[i] : lower;
        rec.torso = total - 2.0 * (rec.upper + rec.lower);
        const RobotParams params =
            RobotParams::FromMasses(rec.upper, rec.lower, rec.torso);
        const GaitSolution g = OptimizeGait(params, problem, solve);
        rec.cot_opt = g.cot_opt;
        rec.status = g.report.status;
        rec.wall_time = g.report.wall_time;
        return rec;
      });
  std::vector<double> x, y;
  for (const MassRecord& r : sweep.records) {
    if (r.status != nlp::Status::kOptimal) continue;
    x.push_back(vary == LegSegment::kUpper ? r.upper : r.lower);
    y.push_back(r.cot_opt);
  }
  if (x.size() >= 2) sweep.fit = FitLine(x, y);
  return sweep;
}

namespace {

using Curve = std::map<double, const SweepRecord*>;

std::map<std::string, Curve> CurvesByLabel(
    const std::vector<SweepRecord>& records, std::vector<std::string>* order) {
  std::map<std::string, Curve> curves;
  for (const SweepRecord& r : records) {
    if (!curves.contains(r.label)) order->push_back(r.label);
    curves[r.label][r.omega_n] = &r;
  }
  return curves;
}

// b dominates a: no worse on both axes at every shared gain and strictly
// better on one axis somewhere.
bool Dominates(const Curve& b, const Curve& a) {
  bool shared = false, strict = false;
  for (const auto& [omega, ra] : a) {
    const auto it = b.find(omega);
    if (it == b.end()) continue;
    const SweepRecord* rb = it->second;
    if (std::isnan(ra->lambda_avg) || std::isnan(rb->lambda_avg)) return false;
    shared = true;
    if (rb->cot_meas > ra->cot_meas || rb->lambda_avg > ra->lambda_avg) {
      return false;
    }
    if (rb->cot_meas < ra->cot_meas || rb->lambda_avg < ra->lambda_avg) {
      strict = true;
    }
  }
  return shared && strict;
}

}  // namespace

std::vector<ParetoEntry> ParetoTable(const std::vector<SweepRecord>& records) {
  std::vector<std::string> order;
  const auto curves = CurvesByLabel(records, &order);
  std::vector<ParetoEntry> table;
  for (const std::string& a : order) {
    ParetoEntry e;
    e.label = a;
    for (const std::string& b : order) {
      if (a != b && Dominates(curves.at(b), curves.at(a))) {
        e.dominated_by.push_back(b);
      }
    }
    e.dominated = !e.dominated_by.empty();
    table.push_back(std::move(e));
  }
  return table;
}

bool HasEfficiencyRobustnessTradeoff(const std::vector<SweepRecord>& records) {
  for (const SweepRecord& a : records) {
    for (const SweepRecord& b : records) {
      if (a.label == b.label || a.omega_n != b.omega_n) continue;
      if (a.fell || b.fell) continue;
      if (a.cot_meas < b.cot_meas && a.lambda_avg > b.lambda_avg) return true;
    }
  }
  return false;
}

void WriteCsv(std::ostream& out, const std::vector<SweepRecord>& records) {
  out << "set,omega_n,cot_opt,cot_meas,ratio,lambda_hip,lambda_knee,"
         "lambda_torso,lambda_avg,steps\n";
  // Undefined values leave the field empty.
  auto field = [&out](double v) {
    out << ',';
    if (std::isfinite(v)) out << v;
  };
  out.precision(10);
  for (const SweepRecord& r : records) {
    out << r.label << ',' << r.omega_n;
    for (double v : {r.cot_opt, r.cot_meas, r.ratio, r.lambda_hip,
                     r.lambda_knee, r.lambda_torso, r.lambda_avg}) {
      field(v);
    }
    out << ',' << r.steps << '\n';
  }
}

void WriteCsv(std::ostream& out, const MassSweep& sweep) {
  out << "vary,upper,lower,torso,cot_opt,status\n";
  out.precision(10);
  for (const MassRecord& r : sweep.records) {
    out << ToString(r.vary) << ',' << r.upper << ',' << r.lower << ','
        << r.torso << ',' << r.cot_opt << ',' << nlp::ToString(r.status)
        << '\n';
  }
}

nlohmann::json ToJson(const SweepRecord& r) {
  auto num = [](double v) -> nlohmann::json {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
  };
  return {{"set", r.label},
          {"omega_n", r.omega_n},
          {"cot_opt", num(r.cot_opt)},
          {"cot_meas", num(r.cot_meas)},
          {"ratio", num(r.ratio)},
          {"lambda_hip", num(r.lambda_hip)},
          {"lambda_knee", num(r.lambda_knee)},
          {"lambda_torso", num(r.lambda_torso)},
          {"lambda_avg", num(r.lambda_avg)},
          {"steps", r.steps},
          {"fell", r.fell},
          {"limit_cycle", r.limit_cycle},
          {"note", r.note}};
}

nlohmann::json ToJson(const MassSweep& sweep) {
  nlohmann::json records = nlohmann::json::array();
  for (const MassRecord& r : sweep.records) {
    records.push_back({{"vary", ToString(r.vary)},
                       {"upper", r.upper},
                       {"lower", r.lower},
                       {"torso", r.torso},
                       {"cot_opt", r.cot_opt},
                       {"status", nlp::ToString(r.status)}});
  }
  return {{"records", records},
          {"fit",
           {{"slope", sweep.fit.slope},
            {"intercept", sweep.fit.intercept},
            {"r_squared", sweep.fit.r_squared}}}};
}

nlohmann::json ToJson(const std::vector<ParetoEntry>& table) {
  nlohmann::json out = nlohmann::json::array();
  for (const ParetoEntry& e : table) {
    out.push_back({{"set", e.label},
                   {"dominated", e.dominated},
                   {"dominated_by", e.dominated_by}});
  }
  return out;
}

}  // namespace biped::analysis
