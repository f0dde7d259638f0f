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

// Experiments on optimized gaits: push recovery rates, controller-gain
// sweeps, mass-distribution sweeps and the efficiency/robustness trade-off.

#ifndef BIPED_ANALYSIS_H_
#define BIPED_ANALYSIS_H_

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <iosfwd>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "biped/model.h"
#include "biped/simulate.h"
#include "biped/transcription.h"

namespace biped::analysis {

// Runs job(i) for i in [0, n) on up to `threads` workers and returns the
// results in index order, so the output never depends on scheduling.
// The first exception thrown by a job is rethrown after all workers stop.
template <typename R>
std::vector<R> ParallelMap(int n, int threads,
                           const std::function<R(int)>& job) {
  std::vector<R> out(static_cast<size_t>(std::max(n, 0)));
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (int i = next++; i < n && !failed; i = next++) {
      try {
        out[static_cast<size_t>(i)] = job(i);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
      }
    }
  };
  const int count = std::clamp(threads, 1, std::max(n, 1));
  if (count == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < count; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};
// Least-squares line through (x, y); needs two distinct x values.
LinearFit FitLine(const std::vector<double>& x, const std::vector<double>& y);

struct RateFit {
  double lambda = 0.0;
  int samples = 0;
  bool defined = false;
};
// exp(slope) of the least-squares line through (k, ln e_k), using only the
// samples with floor <= e_k <= ceiling_fraction * e_0. Needs 3 samples.
RateFit FitConvergenceRate(const std::vector<double>& errors,
                           double floor = 1e-6,
                           double ceiling_fraction = 0.5);

struct PushExperiment {
  PushPoint point = PushPoint::kHip;
  Vec2 impulse = Vec2(10.0, 0.0);  // N s, horizontal, direction of travel
  int followup_steps = 12;
};

struct ConvergenceResult {
  PushPoint point = PushPoint::kHip;
  // e_0 right after the push, then one entry per completed step.
  std::vector<double> errors;
  double lambda = 0.0;
  bool defined = false;
  bool fell = false;
  int steps_after_push = 0;
  std::string note;
};

// Pushes the walker at the start of a step on the limit cycle and fits the
// decay of the distance to the fixed point at later post-impact sections.
// A fall records lambda >= 1.
ConvergenceResult ConvergenceRate(const Simulator& sim, const State& fixed_point,
                                  const PushExperiment& push);

// Central-difference Jacobian of the closed-loop step map at a post-impact
// state, ordered [q; dq]. Throws std::runtime_error if a probe falls.
Eigen::Matrix<double, 10, 10> ReturnMapJacobian(const Simulator& sim,
                                                const State& fixed_point,
                                                double step = 1e-6);
// Largest eigenvalue magnitude of the return-map Jacobian.
double SpectralRadius(const Eigen::Matrix<double, 10, 10>& jacobian);

struct GaitCase {
  std::string label;  // e.g. "set5"
  RobotParams params;
  GaitSolution gait;
  double h = 0.01;
};

struct SweepOptions {
  std::vector<double> omegas = {60, 65, 70, 75, 80, 85, 90, 95, 100};
  double zeta = 1.0;
  ControllerConfig::Interpolation interpolation =
      ControllerConfig::Interpolation::kLinear;
  int rollout_steps = 12;
  // Steps excluded from the measured cost of transport.
  int transient_steps = 2;
  Vec2 impulse = Vec2(10.0, 0.0);
  int push_followup_steps = 12;
  int limit_cycle_steps = 80;
  double limit_cycle_tolerance = 1e-8;
  int threads = 1;
};

struct SweepRecord {
  std::string label;
  double omega_n = 0.0;
  double cot_opt = 0.0;
  double cot_meas = 0.0;
  double ratio = 0.0;
  double lambda_hip = 0.0;
  double lambda_knee = 0.0;
  double lambda_torso = 0.0;
  double lambda_avg = 0.0;  // arithmetic mean of the three
  int steps = 0;            // completed in the nominal rollout
  bool fell = false;
  bool limit_cycle = false;
  std::string note;
};

// Measured COT, limit cycle and the three push responses at one gain.
SweepRecord EvaluateController(const GaitCase& gait, double omega_n,
                               const SweepOptions& options);

// One record per (case, omega), ordered by case then omega.
std::vector<SweepRecord> SweepOmega(const std::vector<GaitCase>& cases,
                                    const SweepOptions& options);

enum class LegSegment { kUpper, kLower };
std::string ToString(LegSegment s);
LegSegment LegSegmentFromString(const std::string& name);

struct MassRecord {
  LegSegment vary = LegSegment::kLower;
  double upper = 0.0, lower = 0.0, torso = 0.0;  // kg per segment
  double cot_opt = 0.0;
  nlp::Status status = nlp::Status::kOptimal;
  double wall_time = 0.0;
};

struct MassSweep {
  std::vector<MassRecord> records;
  // Fit over the optimal records only.
  LinearFit fit;
};

// Varies one leg segment's mass over `masses` starting from the base set,
// keeps the other segment and moves the difference into the torso so the
// total stays fixed, and re-optimizes each gait.
MassSweep SweepMass(int base_set, LegSegment vary,
                    const std::vector<double>& masses,
                    const GaitProblem& problem,
                    const GaitSolveOptions& solve, int threads = 1);

struct ParetoEntry {
  std::string label;
  bool dominated = false;
  std::vector<std::string> dominated_by;
};

// A case is dominated when another case has lower or equal measured COT
// and lambda at every shared gain, and is strictly better somewhere.
std::vector<ParetoEntry> ParetoTable(const std::vector<SweepRecord>& records);

// True when at some gain one case has the lower measured COT but the larger
// lambda of a pair.
bool HasEfficiencyRobustnessTradeoff(const std::vector<SweepRecord>& records);

void WriteCsv(std::ostream& out, const std::vector<SweepRecord>& records);
void WriteCsv(std::ostream& out, const MassSweep& sweep);
nlohmann::json ToJson(const SweepRecord& r);
nlohmann::json ToJson(const MassSweep& sweep);
nlohmann::json ToJson(const std::vector<ParetoEntry>& table);

}  // namespace biped::analysis

#endif  // BIPED_ANALYSIS_H_
