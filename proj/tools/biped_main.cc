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

// Batch front-end: gait optimization, closed-loop simulation, push tests,
// controller and mass sweeps, and the Pareto table.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "biped/analysis.h"
#include "biped/simulate.h"
#include "biped/transcription.h"
#include "cli_support.h"

namespace biped::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Flags shared by every command. Unset flags leave the config alone.
struct CommonFlags {
  std::string config_file;
  std::optional<std::string> preset, out;
  std::optional<double> h;
  std::optional<unsigned> seed;
  std::optional<double> jitter;
  std::optional<int> threads, max_iterations, verbosity;
};

struct ControllerFlags {
  std::optional<double> omega, zeta;
  std::optional<std::string> feedforward, interpolation, law;
};

template <typename T>
void Flag(CLI::App* app, const std::string& name, std::optional<T>* target,
          const std::string& help) {
  app->add_option_function<T>(
      name, [target](const T& v) { *target = v; }, help);
}

void AddCommon(CLI::App* app, CommonFlags* f) {
  app->add_option("--config", f->config_file, "JSON experiment config");
  Flag(app, "--preset", &f->preset, "Mass set set1..set5");
  Flag(app, "--out", &f->out, "Output directory");
  Flag(app, "--h", &f->h, "Knot spacing (s)");
  Flag(app, "--seed", &f->seed, "Seed for the starting-point jitter");
  Flag(app, "--jitter", &f->jitter, "Starting-point jitter (rad)");
  Flag(app, "--threads", &f->threads, "Worker threads for sweeps");
  Flag(app, "--max-iter", &f->max_iterations, "Solver iteration limit");
  Flag(app, "-v,--verbosity", &f->verbosity, "Solver log level");
}

void AddController(CLI::App* app, ControllerFlags* f) {
  Flag(app, "--omega", &f->omega, "Controller natural frequency (rad/s)");
  Flag(app, "--zeta", &f->zeta, "Controller damping ratio");
  Flag(app, "--feedforward", &f->feedforward, "zoh or linear");
  Flag(app, "--interpolation", &f->interpolation,
       "linear, cubic or quadratic");
  Flag(app, "--law", &f->law, "torque_feedforward or computed_torque");
}

ExperimentConfig LoadConfig(const CommonFlags& f, const ControllerFlags* c) {
  json j = json::object();
  if (!f.config_file.empty()) {
    std::ifstream in(f.config_file);
    if (!in) throw UsageError("cannot read config file " + f.config_file);
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw UsageError("config file is not valid JSON: " +
                       std::string(e.what()));
    }
  }
  // Flags are merged into the JSON so they pass the same validation.
  if (f.preset) {
    j.erase("robot");
    j["preset"] = *f.preset;
  }
  if (f.h) j["problem"]["h"] = *f.h;
  if (f.seed) j["seed"] = *f.seed;
  if (f.jitter) j["jitter"] = *f.jitter;
  if (f.threads) j["threads"] = *f.threads;
  if (f.max_iterations) j["solver"]["max_iterations"] = *f.max_iterations;
  if (f.verbosity) j["solver"]["verbosity"] = *f.verbosity;
  if (c != nullptr) {
    if (c->omega) j["controller"]["omega_n"] = *c->omega;
    if (c->zeta) j["controller"]["zeta"] = *c->zeta;
    if (c->feedforward) j["controller"]["feedforward"] = *c->feedforward;
    if (c->interpolation) j["controller"]["interpolation"] = *c->interpolation;
    if (c->law) j["controller"]["law"] = *c->law;
  }
  ExperimentConfig config = ConfigFromJson(j);
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) {
    config.output_dir = env;
  }
  if (f.out) config.output_dir = *f.out;
  try {
    config.problem.Validate();
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  return config;
}

// The config as embedded in artifacts: where they are written and how many
// workers produced them do not belong in their contents.
json ArtifactConfig(const ExperimentConfig& c) {
  json j = ToJson(c);
  j.erase("output_dir");
  j.erase("threads");
  return j;
}

json Stamp(const ExperimentConfig& c) {
  return {{"config_hash", ConfigHash(c)}, {"seed", c.seed}};
}

fs::path Out(const ExperimentConfig& c, const std::string& name) {
  return fs::path(c.output_dir) / name;
}

void WriteJson(const fs::path& path, const json& j) {
  WriteFileAtomic(path, j.dump(2) + "\n");
}

// Gait JSON without timing, so reruns reproduce it byte for byte.
json GaitArtifact(const GaitSolution& gait) {
  json j = ToJson(gait);
  j["solver_report"].erase("wall_time");
  return j;
}

GaitSolution LoadGait(const std::string& path) {
  if (path.empty()) throw UsageError("a gait file is required (--gait)");
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read gait file " + path);
  try {
    json j;
    in >> j;
    return GaitSolutionFromJson(j);
  } catch (const std::exception& e) {
    throw UsageError("invalid gait file " + path + ": " + e.what());
  }
}

GaitSolveOptions SolveOptions(const ExperimentConfig& c) {
  GaitSolveOptions o;
  o.solver.max_iterations = c.max_iterations;
  o.solver.verbosity = c.verbosity;
  o.seed = c.seed;
  o.jitter = c.jitter;
  return o;
}

std::string CsvOf(const GaitSolution& g) {
  std::ostringstream out;
  WriteCsv(out, g);
  return out.str();
}

int RunOptimize(const ExperimentConfig& c) {
  const GaitSolution gait = OptimizeGait(c.robot, c.problem, SolveOptions(c));
  WriteJson(Out(c, "gait.json"), GaitArtifact(gait));
  WriteFileAtomic(Out(c, "gait.csv"), CsvOf(gait));
  json report = GaitArtifact(gait)["solver_report"];
  report["cot_opt"] = gait.cot_opt;
  report["knots"] = gait.knots.size();
  WriteJson(Out(c, "report.json"), {{"stamp", Stamp(c)},
                                    {"config", ArtifactConfig(c)},
                                    {"report", report}});
  std::cout << "status " << nlp::ToString(gait.report.status) << " cot_opt "
            << gait.cot_opt << " knots " << gait.knots.size()
            << " iterations " << gait.report.iterations << "\n";
  std::cerr << "solve time " << gait.report.wall_time << " s\n";
  return gait.report.status == nlp::Status::kOptimal ? kExitOk : kExitFailure;
}

int RunSimulate(const ExperimentConfig& c) {
  const GaitSolution gait = LoadGait(c.gait_file);
  const Simulator sim(c.robot, gait, c.problem.h, c.controller);
  std::optional<PushSpec> push;
  if (!c.push.points.empty()) {
    push = PushSpec{c.push.points.front(), Vec2(c.push.impulse, 0.0),
                    c.push.at_step};
  }
  const SimResult result = sim.Rollout(c.steps, std::nullopt, push);
  std::ostringstream csv;
  WriteCsv(csv, result);
  WriteFileAtomic(Out(c, "sim.csv"), csv.str());
  json j = ToJson(result);
  j["stamp"] = Stamp(c);
  j["config"] = ArtifactConfig(c);
  j["cot_opt"] = gait.cot_opt;
  if (result.steps_completed > 0) {
    j["cot_measured"] = MeasureCot(result, c.robot);
  }
  WriteJson(Out(c, "sim.json"), j);

  PlotSeries energy{"energy", {}, {}};
  for (const SimSample& s : result.samples) {
    energy.x.push_back(s.t);
    energy.y.push_back(s.energy);
  }
  WriteFileAtomic(Out(c, "energy.svg"),
                  LinePlotSvg("Mechanical energy", "t (s)", "E (J)", {energy}));
  std::cout << "steps " << result.steps_completed
            << (result.fell ? " fell: " + result.fall_reason : "") << "\n";
  return kExitOk;
}

int RunPush(const ExperimentConfig& c) {
  const GaitSolution gait = LoadGait(c.gait_file);
  SimOptions options;
  options.record_samples = false;
  const Simulator sim(c.robot, gait, c.problem.h, c.controller, options);
  const LimitCycle cycle = FindLimitCycle(sim);
  std::vector<PushPoint> points = c.push.points;
  if (points.empty()) {
    points = {PushPoint::kHip, PushPoint::kStanceKnee, PushPoint::kTorso};
  }
  json results = json::array();
  std::ostringstream csv;
  csv << "point,step,error\n" << std::setprecision(10);
  double sum = 0.0;
  for (PushPoint p : points) {
    analysis::PushExperiment e{p, Vec2(c.push.impulse, 0.0),
                               c.push.followup_steps};
    const analysis::ConvergenceResult r =
        analysis::ConvergenceRate(sim, cycle.fixed_point, e);
    for (size_t k = 0; k < r.errors.size(); ++k) {
      csv << ToString(p) << ',' << k << ',' << r.errors[k] << '\n';
    }
    json entry = {{"point", ToString(p)},
                  {"fell", r.fell},
                  {"defined", r.defined},
                  {"steps_after_push", r.steps_after_push},
                  {"errors", r.errors},
                  {"note", r.note}};
    entry["lambda"] = r.defined || r.fell ? json(r.lambda) : json(nullptr);
    results.push_back(entry);
    sum += r.defined || r.fell ? r.lambda
                               : std::numeric_limits<double>::quiet_NaN();
    std::cout << ToString(p) << " lambda "
              << (r.defined || r.fell ? std::to_string(r.lambda) : "undefined")
              << (r.note.empty() ? "" : " (" + r.note + ")") << "\n";
  }
  json j = {{"stamp", Stamp(c)},
            {"config", ArtifactConfig(c)},
            {"limit_cycle",
             {{"converged", cycle.converged},
              {"steps", cycle.steps},
              {"last_difference", cycle.last_difference},
              {"reason", cycle.reason}}},
            {"pushes", results}};
  const double avg = sum / static_cast<double>(points.size());
  j["lambda_avg"] = std::isfinite(avg) ? json(avg) : json(nullptr);
  if (cycle.converged) {
    try {
      j["return_map_spectral_radius"] = analysis::SpectralRadius(
          analysis::ReturnMapJacobian(sim, cycle.fixed_point));
    } catch (const std::runtime_error&) {
      j["return_map_spectral_radius"] = nullptr;
    }
  }
  WriteJson(Out(c, "push.json"), j);
  WriteFileAtomic(Out(c, "push.csv"), csv.str());
  return kExitOk;
}

// Loads the gait for a preset from the config or optimizes it, keeping a
// copy next to the sweep output.
analysis::GaitCase GaitForPreset(const ExperimentConfig& c,
                                 const std::string& label) {
  analysis::GaitCase gc;
  gc.label = label;
  gc.params = RobotParams::Preset(PresetNumber(label));
  gc.h = c.problem.h;
  if (const auto it = c.gait_files.find(label); it != c.gait_files.end()) {
    gc.gait = LoadGait(it->second);
  } else {
    gc.gait = OptimizeGait(gc.params, c.problem, SolveOptions(c));
    WriteJson(Out(c, "gaits/" + label + ".json"), GaitArtifact(gc.gait));
  }
  return gc;
}

json RecordsJson(const std::vector<analysis::SweepRecord>& records) {
  json out = json::array();
  for (const auto& r : records) out.push_back(analysis::ToJson(r));
  return out;
}

void WriteSweepPlots(const ExperimentConfig& c,
                     const std::vector<analysis::SweepRecord>& records) {
  std::vector<PlotSeries> cot, ratio, lambda, tradeoff;
  for (const auto& r : records) {
    if (cot.empty() || cot.back().name != r.label) {
      for (auto* v : {&cot, &ratio, &lambda, &tradeoff}) {
        v->push_back({r.label, {}, {}});
      }
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    cot.back().x.push_back(r.omega_n);
    cot.back().y.push_back(r.steps > c.sweep.transient_steps ? r.cot_meas
                                                             : nan);
    ratio.back().x.push_back(r.omega_n);
    ratio.back().y.push_back(r.steps > c.sweep.transient_steps ? r.ratio : nan);
    lambda.back().x.push_back(r.omega_n);
    lambda.back().y.push_back(r.lambda_avg);
    tradeoff.back().x.push_back(r.lambda_avg);
    tradeoff.back().y.push_back(r.cot_meas);
  }
  WriteFileAtomic(Out(c, "cot_vs_omega.svg"),
                  LinePlotSvg("Measured COT", "omega_n (rad/s)", "COT", cot));
  WriteFileAtomic(Out(c, "ratio_vs_omega.svg"),
                  LinePlotSvg("Measured / optimized COT", "omega_n (rad/s)",
                              "ratio", ratio));
  WriteFileAtomic(Out(c, "lambda_vs_omega.svg"),
                  LinePlotSvg("Push recovery rate", "omega_n (rad/s)",
                              "lambda", lambda));
  WriteFileAtomic(Out(c, "cot_vs_lambda.svg"),
                  LinePlotSvg("COT vs convergence rate", "lambda", "COT",
                              tradeoff));
}

int RunSweepOmega(const ExperimentConfig& c) {
  const std::vector<analysis::GaitCase> cases =
      analysis::ParallelMap<analysis::GaitCase>(
          static_cast<int>(c.sweep.presets.size()), c.threads,
          [&](int i) { return GaitForPreset(c, c.sweep.presets[i]); });
  json gaits = json::object();
  for (const analysis::GaitCase& gc : cases) {
    gaits[gc.label] = {{"status", nlp::ToString(gc.gait.report.status)},
                       {"cot_opt", gc.gait.cot_opt}};
  }
  analysis::SweepOptions o;
  o.omegas = c.sweep.omegas;
  o.zeta = c.controller.zeta;
  o.interpolation = c.controller.interpolation;
  o.rollout_steps = c.sweep.rollout_steps;
  o.transient_steps = c.sweep.transient_steps;
  o.impulse = Vec2(c.push.impulse, 0.0);
  o.push_followup_steps = c.sweep.push_followup_steps;
  o.threads = c.threads;
  const auto records = analysis::SweepOmega(cases, o);
  std::ostringstream csv;
  analysis::WriteCsv(csv, records);
  WriteFileAtomic(Out(c, "sweep_omega.csv"), csv.str());
  WriteJson(Out(c, "sweep_omega.json"),
            {{"stamp", Stamp(c)},
             {"config", ArtifactConfig(c)},
             {"gaits", gaits},
             {"records", RecordsJson(records)},
             {"pareto", analysis::ToJson(analysis::ParetoTable(records))},
             {"tradeoff",
              analysis::HasEfficiencyRobustnessTradeoff(records)}});
  WriteSweepPlots(c, records);
  std::cout << records.size() << " records written to "
            << Out(c, "sweep_omega.csv").string() << "\n";
  return kExitOk;
}

int RunSweepMass(const ExperimentConfig& c) {
  const analysis::MassSweep sweep =
      analysis::SweepMass(c.sweep.base_set, c.sweep.vary, c.sweep.masses,
                          c.problem, SolveOptions(c), c.threads);
  const std::string tag = analysis::ToString(c.sweep.vary);
  std::ostringstream csv;
  analysis::WriteCsv(csv, sweep);
  WriteFileAtomic(Out(c, "sweep_mass_" + tag + ".csv"), csv.str());
  json j = analysis::ToJson(sweep);
  j["stamp"] = Stamp(c);
  j["config"] = ArtifactConfig(c);
  WriteJson(Out(c, "sweep_mass_" + tag + ".json"), j);
  PlotSeries s{tag + " leg", {}, {}};
  for (const auto& r : sweep.records) {
    if (r.status != nlp::Status::kOptimal) continue;
    s.x.push_back(c.sweep.vary == analysis::LegSegment::kUpper ? r.upper
                                                               : r.lower);
    s.y.push_back(r.cot_opt);
  }
  WriteFileAtomic(Out(c, "cot_vs_mass_" + tag + ".svg"),
                  LinePlotSvg("Optimized COT vs " + tag + " leg mass",
                              "segment mass (kg)", "COT", {s}));
  std::cout << "slope " << sweep.fit.slope << " r_squared "
            << sweep.fit.r_squared << "\n";
  return kExitOk;
}

double Number(const json& j, const char* key) {
  const json& v = j.at(key);
  return v.is_null() ? std::numeric_limits<double>::quiet_NaN()
                     : v.get<double>();
}

int RunPareto(const ExperimentConfig& c) {
  const std::string path = c.records_file.empty()
                               ? Out(c, "sweep_omega.json").string()
                               : c.records_file;
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read sweep records " + path);
  std::vector<analysis::SweepRecord> records;
  try {
    json j;
    in >> j;
    for (const json& r : j.at("records")) {
      analysis::SweepRecord rec;
      rec.label = r.at("set").get<std::string>();
      rec.omega_n = Number(r, "omega_n");
      rec.cot_opt = Number(r, "cot_opt");
      rec.cot_meas = Number(r, "cot_meas");
      rec.ratio = Number(r, "ratio");
      rec.lambda_hip = Number(r, "lambda_hip");
      rec.lambda_knee = Number(r, "lambda_knee");
      rec.lambda_torso = Number(r, "lambda_torso");
      rec.lambda_avg = Number(r, "lambda_avg");
      rec.steps = r.at("steps").get<int>();
      rec.fell = r.at("fell").get<bool>();
      records.push_back(rec);
    }
  } catch (const json::exception& e) {
    throw UsageError("invalid sweep records " + path + ": " + e.what());
  }
  if (records.empty()) throw UsageError("no sweep records in " + path);
  const auto table = analysis::ParetoTable(records);
  WriteJson(Out(c, "pareto.json"),
            {{"stamp", Stamp(c)},
             {"records_file", path},
             {"table", analysis::ToJson(table)},
             {"tradeoff",
              analysis::HasEfficiencyRobustnessTradeoff(records)}});
  for (const auto& e : table) {
    std::cout << e.label << (e.dominated ? " dominated" : " nondominated")
              << "\n";
  }
  return kExitOk;
}

int Main(int argc, char** argv) {
  CLI::App app{"Energy-optimal gaits for a planar five-link biped"};
  app.require_subcommand(1);
  // --h is the knot spacing, so help is long-form only.
  app.set_help_flag("--help", "Print this help message and exit");
  app.set_help_all_flag("--help-all");

  CommonFlags common;
  ControllerFlags controller;
  std::string gait_file;
  std::optional<int> steps, at_step, followup;
  std::optional<double> impulse;
  std::vector<std::string> push_points;
  std::optional<std::string> presets, range, vary, records;
  std::optional<double> mass_from, mass_to, mass_step;
  std::optional<int> base_set;

  CLI::App* optimize = app.add_subcommand("optimize", "Optimize a gait");
  AddCommon(optimize, &common);

  CLI::App* simulate =
      app.add_subcommand("simulate", "Closed-loop rollout of a gait");
  AddCommon(simulate, &common);
  AddController(simulate, &controller);
  simulate->add_option("--gait", gait_file, "Gait JSON from optimize");
  Flag(simulate, "--steps", &steps, "Steps to walk");
  simulate->add_option("--push", push_points, "hip, stance_knee or torso");
  Flag(simulate, "--impulse", &impulse, "Push impulse (N s)");
  Flag(simulate, "--at-step", &at_step, "Step whose start is pushed");

  CLI::App* push = app.add_subcommand("push", "Push-recovery experiment");
  AddCommon(push, &common);
  AddController(push, &controller);
  push->add_option("--gait", gait_file, "Gait JSON from optimize");
  push->add_option("--point", push_points,
                   "hip, stance_knee or torso (default all three)");
  Flag(push, "--impulse", &impulse, "Push impulse (N s)");
  Flag(push, "--followup", &followup, "Steps observed after the push");

  CLI::App* sweep = app.add_subcommand("sweep", "Parameter sweeps");
  sweep->require_subcommand(1);
  CLI::App* sweep_omega = sweep->add_subcommand("omega", "Controller gains");
  AddCommon(sweep_omega, &common);
  AddController(sweep_omega, &controller);
  Flag(sweep_omega, "--presets", &presets, "all or set1,set2,...");
  Flag(sweep_omega, "--range", &range, "omega_n values, e.g. 60:5:100");
  Flag(sweep_omega, "--impulse", &impulse, "Push impulse (N s)");
  Flag(sweep_omega, "--steps", &steps, "Steps per nominal rollout");
  CLI::App* sweep_mass = sweep->add_subcommand("mass", "Leg mass");
  AddCommon(sweep_mass, &common);
  Flag(sweep_mass, "--vary", &vary, "upper or lower");
  Flag(sweep_mass, "--from", &mass_from, "First mass (kg)");
  Flag(sweep_mass, "--to", &mass_to, "Last mass (kg)");
  Flag(sweep_mass, "--step", &mass_step, "Mass increment (kg)");
  Flag(sweep_mass, "--base", &base_set, "Base mass set number");

  CLI::App* pareto =
      app.add_subcommand("pareto", "Dominance table of an omega sweep");
  AddCommon(pareto, &common);
  Flag(pareto, "--records", &records, "sweep_omega.json to read");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << ErrorJson(kExitUsage, "usage", e.what()).dump() << "\n";
    return kExitUsage;
  }

  const bool uses_controller = simulate->parsed() || push->parsed() ||
                               sweep_omega->parsed();
  ExperimentConfig c = LoadConfig(common, uses_controller ? &controller
                                                          : nullptr);
  if (!gait_file.empty()) c.gait_file = gait_file;
  if (steps) {
    if (*steps < 1) throw UsageError("--steps must be >= 1");
    if (sweep_omega->parsed()) {
      c.sweep.rollout_steps = *steps;
    } else {
      c.steps = *steps;
    }
  }
  if (!push_points.empty()) {
    c.push.points.clear();
    for (const std::string& p : push_points) {
      try {
        c.push.points.push_back(PushPointFromString(p));
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
    }
  }
  if (impulse) c.push.impulse = *impulse;
  if (at_step) c.push.at_step = *at_step;
  if (followup) c.push.followup_steps = *followup;
  if (presets) c.sweep.presets = ParsePresetList(*presets);
  if (range) c.sweep.omegas = ParseRange(*range);
  if (vary) {
    try {
      c.sweep.vary = analysis::LegSegmentFromString(*vary);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  if (mass_from || mass_to || mass_step) {
    if (!mass_from || !mass_to) {
      throw UsageError("--from and --to go together");
    }
    std::ostringstream spec;
    spec << std::setprecision(17) << *mass_from << ':' << mass_step.value_or(1.0)
         << ':' << *mass_to;
    c.sweep.masses = ParseRange(spec.str());
  }
  if (base_set) {
    PresetNumber("set" + std::to_string(*base_set));
    c.sweep.base_set = *base_set;
  }
  if (records) c.records_file = *records;
  if (c.sweep.rollout_steps <= c.sweep.transient_steps) {
    throw UsageError("sweep rollout_steps must exceed transient_steps");
  }

  fs::create_directories(c.output_dir);
  WriteJson(Out(c, "config.json"), {{"stamp", Stamp(c)}, {"config", ArtifactConfig(c)}});
  if (optimize->parsed()) return RunOptimize(c);
  if (simulate->parsed()) return RunSimulate(c);
  if (push->parsed()) return RunPush(c);
  if (sweep_omega->parsed()) return RunSweepOmega(c);
  if (sweep_mass->parsed()) return RunSweepMass(c);
  return RunPareto(c);
}

}  // namespace
}  // namespace biped::cli

int main(int argc, char** argv) {
  using biped::cli::ErrorJson;
  try {
    return biped::cli::Main(argc, argv);
  } catch (const biped::cli::UsageError& e) {
    std::cerr << ErrorJson(biped::cli::kExitUsage, "usage", e.what()).dump()
              << "\n";
    return biped::cli::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << ErrorJson(biped::cli::kExitFailure, "runtime", e.what())
                     .dump()
              << "\n";
    return biped::cli::kExitFailure;
  }
}
