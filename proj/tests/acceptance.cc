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

// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits nonzero when any criterion fails. An optional directory argument
// receives the gaits and tables produced along the way.

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Eigenvalues>

#include "biped/analysis.h"
#include "biped/autodiff.h"
#include "biped/model.h"
#include "biped/simulate.h"
#include "biped/transcription.h"
#include "test_support.h"

namespace biped {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using Eigen::VectorXd;

constexpr std::array<double, 5> kReferenceCot = {0.0992, 0.0996, 0.0861,
                                                 0.0853, 0.0705};

struct Outcome {
  bool pass = false;
  std::string detail;
};

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string Fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

int Threads() {
  return std::max(1u, std::thread::hardware_concurrency());
}

std::string GaitBytes(const GaitSolution& g) {
  nlohmann::json j = ToJson(g);
  j["solver_report"].erase("wall_time");
  std::ostringstream csv;
  WriteCsv(csv, g);
  return j.dump(2) + "\n" + csv.str();
}

// Shared state: the optimized gaits feed criteria 5 through 10.
struct Context {
  fs::path out;
  std::vector<GaitSolution> gaits;  // index set - 1
  std::vector<double> solve_seconds;
  std::vector<analysis::SweepRecord> sweep;

  void Save(const std::string& name, const std::string& contents) const {
    if (out.empty()) return;
    fs::create_directories(out);
    std::ofstream(out / name, std::ios::binary) << contents;
  }
};

// 1. D symmetric and positive definite, D' - 2C skew, manipulator residual.
Outcome DynamicsIdentities() {
  const Biped biped(RobotParams::Preset(5));
  std::mt19937 rng(2026);
  std::normal_distribution<double> normal(0.0, 1.0);
  double sym = 0.0, skew = 0.0, residual = 0.0, min_eig = 1e300;
  for (int trial = 0; trial < 1000; ++trial) {
    const State s = testing::RandomState(rng);
    const Mat5 d = biped.Inertia(s.q);
    sym = std::max(sym, (d - d.transpose()).cwiseAbs().maxCoeff());
    min_eig = std::min(
        min_eig, Eigen::SelfAdjointEigenSolver<Mat5>(d).eigenvalues()[0]);
    const Eigen::MatrixXd dd = ad::Jacobian<5>(
        [&biped](const ad::DualVector<5>& q) {
          const Mat5T<ad::Dual<5>> m = biped.Inertia<ad::Dual<5>>(q);
          ad::DualVector<5> flat(25);
          for (int i = 0; i < 25; ++i) flat[i] = m(i % 5, i / 5);
          return flat;
        },
        VectorXd(s.q));
    const VectorXd rate = dd * s.dq;
    const Mat5 d_dot = Eigen::Map<const Mat5>(rate.data());
    Vec5 x;
    for (int i = 0; i < 5; ++i) x[i] = normal(rng);
    skew = std::max(
        skew, std::abs(x.dot((d_dot - 2.0 * biped.Coriolis(s.q, s.dq)) * x)));
    const Vec4 u = testing::RandomTorque(rng);
    const DynTerms t = biped.ComputeDynTerms(s);
    const Vec5 r = t.inertia * biped.Accelerations(s, u) +
                   t.coriolis * s.dq + t.gravity - t.input_map * u;
    residual = std::max(residual, r.cwiseAbs().maxCoeff());
  }
  Outcome o;
  o.pass = sym <= 1e-12 && min_eig > 0.0 && skew <= 1e-8 && residual <= 1e-10;
  o.detail = "1000 states: asym " + Fmt("%.1e", sym) + ", min eig " +
             Fmt("%.3g", min_eig) + ", skew " + Fmt("%.1e", skew) +
             ", residual " + Fmt("%.1e", residual);
  return o;
}

// 2. Forward-mode derivatives against central differences.
Outcome DerivativesMatchDifferences() {
  const RobotParams params = RobotParams::Preset(1);
  const Biped biped(params);
  GaitProblem problem;
  problem.h = 0.05;  // 12 intervals keep every row type, incl. clearance
  const GaitNlp nlp(params, problem);
  std::mt19937 rng(7);
  double dyn = 0.0, jac = 0.0, grad = 0.0;
  auto fd_dyn = [&biped](const auto& x) {
    using T = typename std::decay_t<decltype(x)>::Scalar;
    const Vec5T<T> q = x.template segment<5>(0);
    const Vec5T<T> dq = x.template segment<5>(5);
    const Eigen::Matrix<T, 4, 1> u = x.template segment<4>(10);
    return Eigen::Matrix<T, Eigen::Dynamic, 1>(biped.ForwardDynamics(q, dq, u));
  };
  for (int trial = 0; trial < 100; ++trial) {
    const State s = testing::RandomState(rng);
    VectorXd x(14);
    x << s.q, s.dq, testing::RandomTorque(rng);
    dyn = std::max(dyn, testing::MaxRowRelativeError(
                            ad::Jacobian<14>(fd_dyn, x),
                            testing::CentralDifferenceJacobian(fd_dyn, x)));

    VectorXd v = nlp.InitialGuess(0.05, 1000 + trial);
    for (int k = 0; k < nlp.num_intervals(); ++k) {
      v.segment<4>(GaitNlp::TorqueOffset(k)) = testing::RandomTorque(rng, 40);
    }
    nlp::SparseMatrix je, ji;
    nlp.ConstraintJacobian(v, &je, &ji);
    auto eq = [&nlp](const VectorXd& z) {
      VectorXd e, i;
      nlp.Constraints(z, &e, &i);
      return e;
    };
    auto in = [&nlp](const VectorXd& z) {
      VectorXd e, i;
      nlp.Constraints(z, &e, &i);
      return i;
    };
    jac = std::max(
        {jac,
         testing::MaxRowRelativeError(Eigen::MatrixXd(je),
                                      testing::CentralDifferenceJacobian(eq, v)),
         testing::MaxRowRelativeError(
             Eigen::MatrixXd(ji), testing::CentralDifferenceJacobian(in, v))});
    const Eigen::MatrixXd fd_grad = testing::CentralDifferenceJacobian(
        [&nlp](const VectorXd& z) {
          return VectorXd::Constant(1, nlp.Objective(z));
        },
        v);
    const double scale = std::max(1e-8, fd_grad.cwiseAbs().maxCoeff());
    grad = std::max(grad, (nlp.ObjectiveGradient(v).transpose() - fd_grad)
                                  .cwiseAbs()
                                  .maxCoeff() /
                              scale);
  }
  Outcome o;
  o.pass = dyn <= 1e-6 && jac <= 1e-6 && grad <= 1e-6;
  o.detail = "100 points: dynamics " + Fmt("%.1e", dyn) + ", constraints " +
             Fmt("%.1e", jac) + ", objective " + Fmt("%.1e", grad);
  return o;
}

// 3. Passive swing conserves energy at integrator tolerance 1e-9.
Outcome PassiveConservation() {
  const Biped biped(RobotParams::Preset(5));
  std::mt19937 rng(3);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const State s0 = testing::RandomState(rng, 1.0);
    const State s1 = IntegrateStance(
        biped, s0, 0.5, [](double, const State&) { return Vec4::Zero(); });
    const double e0 = biped.TotalEnergy(s0);
    worst = std::max(worst,
                     std::abs(biped.TotalEnergy(s1) - e0) / std::abs(e0));
  }
  return {worst <= 1e-6, "10 swings of 0.5 s: max relative drift " +
                             Fmt("%.1e", worst)};
}

// 4. Plastic impact: tip at rest, no energy gain, momentum about contact.
Outcome ImpactProperties() {
  const Biped biped(RobotParams::Preset(5));
  std::mt19937 rng(4);
  double tip = 0.0, gain = -1e300, momentum = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const State minus = testing::RandomState(rng);
    State plus;
    Vec2 impulse, old_stance_velocity;
    biped.ImpactUnchecked<double>(minus.q, minus.dq, &plus.q, &plus.dq,
                                  &impulse, &old_stance_velocity);
    const Vec2 v = Biped::PointJacobian(biped.swing_tip_weights(), minus.q) *
                       SwapLegs<double>(plus.dq) +
                   old_stance_velocity;
    tip = std::max(tip, v.norm());
    gain = std::max(gain, biped.KineticEnergy(plus) - biped.KineticEnergy(minus));
    momentum = std::max(
        momentum,
        std::abs(biped.AngularMomentum(minus, biped.SwingTip<double>(minus.q)) -
                 biped.AngularMomentum(plus, Vec2::Zero())));
  }
  State rest;
  rest.q << 3.5, 2.8, -0.1, -0.2, 0.05;
  const ImpactResult r = biped.Impact(rest);
  const bool identity = r.state_plus.q == SwapLegs(rest).q &&
                        r.state_plus.dq == Vec5::Zero() &&
                        r.energy_loss == 0.0;
  Outcome o;
  o.pass = tip <= 1e-9 && gain <= 0.0 && momentum <= 1e-8 && identity;
  o.detail = "100 impacts: tip speed " + Fmt("%.1e", tip) + ", max KE change " +
             Fmt("%.2e", gain) + ", momentum " + Fmt("%.1e", momentum) +
             ", rest case " + (identity ? "exact" : "NOT exact");
  return o;
}

// 5. All five sets optimal, near the reference COT, correctly ordered.
Outcome PresetGaits(Context* ctx) {
  ctx->gaits.resize(5);
  ctx->solve_seconds.resize(5);
  for (int set = 1; set <= 5; ++set) {
    const auto start = Clock::now();
    ctx->gaits[set - 1] = OptimizeGait(RobotParams::Preset(set), GaitProblem{});
    ctx->solve_seconds[set - 1] = Seconds(start);
    ctx->Save("gait_set" + std::to_string(set) + ".json",
              GaitBytes(ctx->gaits[set - 1]));
  }
  Outcome o{true, ""};
  for (int i = 0; i < 5; ++i) {
    const GaitSolution& g = ctx->gaits[i];
    const double rel = g.cot_opt / kReferenceCot[i] - 1.0;
    const bool ok = g.report.status == nlp::Status::kOptimal &&
                    std::abs(rel) <= 0.15 && ctx->solve_seconds[i] <= 300.0;
    o.pass = o.pass && ok;
    o.detail += "set" + std::to_string(i + 1) + " " +
                nlp::ToString(g.report.status) + " " +
                Fmt("%.4f", g.cot_opt) + " (" + Fmt("%+.1f%%", 100 * rel) +
                ", " + Fmt("%.0fs", ctx->solve_seconds[i]) + ")" +
                (ok ? "" : " !") + "; ";
  }
  auto cot = [&](int set) { return ctx->gaits[set - 1].cot_opt; };
  const bool order =
      cot(5) < cot(4) && cot(4) < cot(1) && cot(5) < cot(3) && cot(3) < cot(2);
  o.pass = o.pass && order;
  o.detail += std::string("ordering ") + (order ? "holds" : "VIOLATED");
  return o;
}

// 6. Set 5 walks under the tracking controller; measured COT trend.
Outcome ClosedLoop(Context* ctx) {
  const auto start = Clock::now();
  const RobotParams params = RobotParams::Preset(5);
  const GaitSolution& gait = ctx->gaits[4];
  SimOptions opts;
  opts.record_samples = false;
  const Simulator sim(params, gait, 0.01, ControllerConfig{}, opts);
  const SimResult walk = sim.Rollout(10);
  const bool walked = !walk.fell && walk.steps_completed >= 10;
  const double ratio =
      walk.steps_completed > 0 ? MeasureCot(walk, params) / gait.cot_opt : 0.0;
  std::vector<double> cots;
  std::string trend;
  for (double omega : {60.0, 70.0, 80.0, 90.0, 100.0}) {
    ControllerConfig ctrl;
    ctrl.omega_n = omega;
    const SimResult r =
        Simulator(params, gait, 0.01, ctrl, opts).Rollout(12);
    const double c = r.steps_completed > 2
                         ? MeasureCot(r, params, 2)
                         : std::numeric_limits<double>::quiet_NaN();
    cots.push_back(c);
    trend += Fmt("%.4f", c) + (omega < 100 ? " " : "");
  }
  bool monotone = true;
  for (size_t i = 1; i < cots.size(); ++i) {
    monotone = monotone && std::isfinite(cots[i]) && cots[i] <= cots[i - 1];
  }
  const double seconds = Seconds(start);
  Outcome o;
  o.pass = walked && ratio >= 1.0 && monotone && seconds <= 120.0;
  o.detail = std::to_string(walk.steps_completed) + " steps" +
             (walk.fell ? " (fell: " + walk.fall_reason + ")" : "") +
             ", measured/opt " + Fmt("%.3f", ratio) +
             ", COT at 60..100: " + trend +
             (monotone ? " nonincreasing" : " NOT nonincreasing") + ", " +
             Fmt("%.0fs", seconds);
  return o;
}

// 7. Push recovery for Set 5 and the full rate sweep with its trade-off.
Outcome PushRecovery(Context* ctx) {
  const auto start = Clock::now();
  const RobotParams params = RobotParams::Preset(5);
  SimOptions opts;
  opts.record_samples = false;
  const Simulator sim(params, ctx->gaits[4], 0.01, ControllerConfig{}, opts);
  const LimitCycle cycle = FindLimitCycle(sim);
  bool recovered = cycle.converged;
  std::string detail = cycle.converged ? "" : "no limit cycle; ";
  for (PushPoint p :
       {PushPoint::kHip, PushPoint::kStanceKnee, PushPoint::kTorso}) {
    const analysis::ConvergenceResult r = analysis::ConvergenceRate(
        sim, cycle.fixed_point, {p, Vec2(10.0, 0.0), 12});
    const bool ok =
        !r.fell && r.steps_after_push >= 8 && r.defined && r.lambda < 1.0;
    recovered = recovered && ok;
    detail += ToString(p) + " " +
              (r.defined || r.fell ? "lambda " + Fmt("%.3f", r.lambda)
                                   : std::string("lambda undefined")) +
              (r.note.empty() ? "" : " (" + r.note + ")") + "; ";
  }

  std::vector<analysis::GaitCase> cases;
  for (int set = 1; set <= 5; ++set) {
    cases.push_back({"set" + std::to_string(set), RobotParams::Preset(set),
                     ctx->gaits[set - 1], 0.01});
  }
  analysis::SweepOptions sweep_opts;
  sweep_opts.threads = Threads();
  ctx->sweep = analysis::SweepOmega(cases, sweep_opts);
  std::ostringstream csv;
  analysis::WriteCsv(csv, ctx->sweep);
  ctx->Save("sweep_omega.csv", csv.str());
  int defined = 0;
  for (const auto& r : ctx->sweep) defined += std::isfinite(r.lambda_avg);
  const bool complete = ctx->sweep.size() == 45;
  const bool tradeoff = analysis::HasEfficiencyRobustnessTradeoff(ctx->sweep);
  const double seconds = Seconds(start);
  Outcome o;
  o.pass = recovered && complete && defined == 45 && tradeoff &&
           seconds <= 600.0;
  o.detail = detail + "table " + std::to_string(ctx->sweep.size()) +
             " records, " + std::to_string(defined) + " with defined lambda, " +
             "trade-off pair " + (tradeoff ? "found" : "NOT found") + ", " +
             Fmt("%.0fs", seconds);
  return o;
}

// 8. Optimized COT against leg-segment mass.
Outcome MassSweeps(Context* ctx) {
  const auto start = Clock::now();
  const std::vector<double> masses = {3, 4, 5, 6, 7, 8, 9};
  const analysis::MassSweep lower = analysis::SweepMass(
      1, analysis::LegSegment::kLower, masses, GaitProblem{}, {}, Threads());
  const analysis::MassSweep upper = analysis::SweepMass(
      1, analysis::LegSegment::kUpper, masses, GaitProblem{}, {}, Threads());
  for (const auto* s : {&lower, &upper}) {
    std::ostringstream csv;
    analysis::WriteCsv(csv, *s);
    ctx->Save(std::string("sweep_mass_") +
                  (s == &lower ? "lower" : "upper") + ".csv",
              csv.str());
  }
  auto optimal = [](const analysis::MassSweep& s) {
    int n = 0;
    for (const auto& r : s.records) n += r.status == nlp::Status::kOptimal;
    return n;
  };
  const double seconds = Seconds(start);
  const bool fits = optimal(lower) >= 3 && optimal(upper) >= 3;
  Outcome o;
  o.pass = fits && lower.fit.slope > 0.0 && lower.fit.r_squared >= 0.8 &&
           std::abs(upper.fit.slope) <= 0.25 * lower.fit.slope &&
           seconds <= 1800.0;
  o.detail = "lower slope " + Fmt("%.2e", lower.fit.slope) + "/kg (R2 " +
             Fmt("%.3f", lower.fit.r_squared) + ", " +
             std::to_string(optimal(lower)) + "/7 optimal), upper slope " +
             Fmt("%.2e", upper.fit.slope) + "/kg (" +
             std::to_string(optimal(upper)) + "/7 optimal), ratio " +
             Fmt("%.2f", std::abs(upper.fit.slope) /
                             std::max(1e-300, std::abs(lower.fit.slope))) +
             ", " + Fmt("%.0fs", seconds);
  return o;
}

// 9. Clearance, speeding up through the step, flattened COM path.
Outcome GaitFeatures(const Context& ctx) {
  const RobotParams params = RobotParams::Preset(5);
  const GaitProblem problem;
  const GaitNlp nlp(params, problem);
  const Biped& biped = nlp.biped();
  const GaitSolution& g = ctx.gaits[4];
  const int n = g.NumIntervals();

  double min_tip = 1e300;
  for (int k = 1; k < n; ++k) {
    if (nlp.TipFloor(k) > 0.0) {
      min_tip = std::min(min_tip, biped.SwingTip<double>(g.knots[k].q)[1]);
    }
  }
  const bool clearance = std::abs(min_tip - problem.clearance) <= 1e-3;

  auto speed = [&](int k) {
    return biped.ComVelocity({g.knots[k].q, g.knots[k].dq}).norm();
  };
  const bool faster = speed(n) > speed(0);

  double y_lo = 1e300, y_hi = -1e300, x_lo = 1e300, x_hi = -1e300;
  for (int k = n / 4; k <= 3 * n / 4; ++k) {
    const Vec2 c = biped.Com<double>(g.knots[k].q);
    y_lo = std::min(y_lo, c[1]);
    y_hi = std::max(y_hi, c[1]);
    x_lo = std::min(x_lo, c[0]);
    x_hi = std::max(x_hi, c[0]);
  }
  // Point mass on a rigid leg of the same length over the same travel.
  const double leg = params.lengths[kStanceFemur] + params.lengths[kStanceTibia];
  auto arc = [leg](double x) { return std::sqrt(leg * leg - x * x); };
  const double arc_hi = (x_lo <= 0.0 && x_hi >= 0.0)
                            ? leg
                            : std::max(arc(x_lo), arc(x_hi));
  const double arc_var = arc_hi - std::min(arc(x_lo), arc(x_hi));
  const double com_var = y_hi - y_lo;
  const bool flat = com_var < arc_var;

  Outcome o;
  o.pass = clearance && faster && flat;
  o.detail = "min window tip height " + Fmt("%.4f", min_tip) + " m, COM speed " +
             Fmt("%.3f", speed(0)) + " -> " + Fmt("%.3f", speed(n)) +
             " m/s, mid-step COM height range " + Fmt("%.4f", com_var) +
             " m vs compass arc " + Fmt("%.4f", arc_var) + " m";
  return o;
}

std::string ReadAll(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 10. Reruns reproduce the artifacts byte for byte.
Outcome Determinism(const Context& ctx, const std::string& cli) {
  std::vector<std::string> mismatches;
  // Optimizer.
  const GaitSolution again = OptimizeGait(RobotParams::Preset(5), GaitProblem{});
  if (GaitBytes(again) != GaitBytes(ctx.gaits[4])) {
    mismatches.push_back("set5 gait");
  }
  // Simulation with dense output.
  const Simulator sim(RobotParams::Preset(5), ctx.gaits[4], 0.01,
                      ControllerConfig{});
  auto sim_bytes = [&] {
    const SimResult r = sim.Rollout(5, std::nullopt,
                                    PushSpec{PushPoint::kTorso, {2.0, 0.0}, 1});
    std::ostringstream out;
    WriteCsv(out, r);
    return out.str() + ToJson(r).dump();
  };
  if (sim_bytes() != sim_bytes()) mismatches.push_back("rollout");
  // Sweep table, serial against the pooled run from criterion 7.
  std::vector<analysis::GaitCase> cases;
  for (int set = 1; set <= 5; ++set) {
    cases.push_back({"set" + std::to_string(set), RobotParams::Preset(set),
                     ctx.gaits[set - 1], 0.01});
  }
  analysis::SweepOptions serial;
  serial.threads = 1;
  std::ostringstream a, b;
  analysis::WriteCsv(a, analysis::SweepOmega(cases, serial));
  analysis::WriteCsv(b, ctx.sweep);
  if (a.str() != b.str()) mismatches.push_back("omega sweep");
  // Command-line artifacts from two runs with the same config and seed.
  int files = 0;
  if (!cli.empty()) {
    const fs::path root = fs::temp_directory_path() /
                          ("biped_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root);
    const fs::path gait = root / "gait.json";
    std::ofstream(gait) << ToJson(ctx.gaits[4]).dump();
    for (const char* dir : {"a", "b"}) {
      for (const std::string& cmd :
           {"simulate --steps 4 --push hip --impulse 2 --at-step 1",
            "push --impulse 2 --followup 6"}) {
        const std::string line = cli + " " + cmd + " --seed 11 --gait " +
                                 gait.string() + " --out " +
                                 (root / dir).string() + " >/dev/null 2>&1";
        if (std::system(line.c_str()) != 0) mismatches.push_back("cli run");
      }
    }
    for (const auto& e : fs::directory_iterator(root / "a")) {
      ++files;
      if (ReadAll(e.path()) != ReadAll(root / "b" / e.path().filename())) {
        mismatches.push_back("cli " + e.path().filename().string());
      }
    }
    fs::remove_all(root);
  }
  Outcome o;
  o.pass = mismatches.empty();
  o.detail = "gait, rollout, 45-record sweep and " + std::to_string(files) +
             " CLI artifacts compared";
  for (const std::string& m : mismatches) o.detail += "; differs: " + m;
  return o;
}

}  // namespace
}  // namespace biped

int main(int argc, char** argv) {
  using biped::Outcome;
  biped::Context ctx;
  if (argc > 1) ctx.out = argv[1];
#ifdef BIPED_CLI_PATH
  const std::string cli = BIPED_CLI_PATH;
#else
  const std::string cli;
#endif
  int failures = 0;
  auto report = [&failures](int id, const char* name, const Outcome& o) {
    std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name,
                o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  };
  auto guarded = [&](int id, const char* name, auto&& fn) {
    try {
      report(id, name, fn());
    } catch (const std::exception& e) {
      report(id, name, Outcome{false, std::string("exception: ") + e.what()});
    }
  };
  guarded(1, "dynamics identities", [] { return biped::DynamicsIdentities(); });
  guarded(2, "AD vs finite differences",
          [] { return biped::DerivativesMatchDifferences(); });
  guarded(3, "passive energy conservation",
          [] { return biped::PassiveConservation(); });
  guarded(4, "impact properties", [] { return biped::ImpactProperties(); });
  guarded(5, "preset gait optimization",
          [&] { return biped::PresetGaits(&ctx); });
  if (ctx.gaits.size() == 5) {
    guarded(6, "closed-loop validation", [&] { return biped::ClosedLoop(&ctx); });
    guarded(7, "push recovery", [&] { return biped::PushRecovery(&ctx); });
    guarded(8, "mass sweeps", [&] { return biped::MassSweeps(&ctx); });
    guarded(9, "gait features", [&] { return biped::GaitFeatures(ctx); });
    guarded(10, "determinism", [&] { return biped::Determinism(ctx, cli); });
  } else {
    for (int id = 6; id <= 10; ++id) {
      report(id, "skipped", Outcome{false, "no optimized gaits"});
    }
  }
  std::printf("%d of 10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
