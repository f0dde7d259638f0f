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

// Configuration, stamping and artifact plumbing for the command-line tool.

#ifndef BIPED_TOOLS_CLI_SUPPORT_H_
#define BIPED_TOOLS_CLI_SUPPORT_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "biped/analysis.h"
#include "biped/model.h"
#include "biped/simulate.h"
#include "biped/transcription.h"

namespace biped::cli {

// Bad flags, bad config files, missing inputs. Maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Environment variable that overrides the configured output directory.
inline constexpr char kOutputDirEnv[] = "BIPED_OUTPUT_DIR";

struct SweepConfig {
  std::vector<std::string> presets = {"set1", "set2", "set3", "set4", "set5"};
  std::vector<double> omegas = {60, 65, 70, 75, 80, 85, 90, 95, 100};
  int rollout_steps = 12;
  int transient_steps = 2;
  int push_followup_steps = 12;
  analysis::LegSegment vary = analysis::LegSegment::kLower;
  int base_set = 1;
  std::vector<double> masses = {3, 4, 5, 6, 7, 8, 9};
};

struct PushConfig {
  // Empty means all three points for the push command, none for simulate.
  std::vector<PushPoint> points;
  double impulse = 10.0;  // N s, horizontal, in the walking direction
  int at_step = 0;
  int followup_steps = 12;
};

struct ExperimentConfig {
  // Either a preset name (set1..set5) or explicit parameters.
  std::string preset = "set5";
  RobotParams robot = RobotParams::Preset(5);
  GaitProblem problem;
  int max_iterations = 3000;
  int verbosity = 0;
  ControllerConfig controller;
  int steps = 10;
  PushConfig push;
  SweepConfig sweep;
  std::string gait_file;
  // Gait files per preset label for the omega sweep; missing ones are
  // optimized on the fly.
  std::map<std::string, std::string> gait_files;
  std::string records_file;
  std::string output_dir = "out";
  unsigned seed = 0;
  double jitter = 0.0;
  int threads = 1;
};

// Reads a configuration object. Missing keys keep their defaults and
// unknown keys raise UsageError, at every nesting level.
ExperimentConfig ConfigFromJson(const nlohmann::json& j);
// Effective configuration, including every default.
nlohmann::json ToJson(const ExperimentConfig& config);

// set1..set5 -> 1..5; throws UsageError otherwise.
int PresetNumber(const std::string& name);
// "all" or a comma-separated list of preset names.
std::vector<std::string> ParsePresetList(const std::string& text);
// "a:b" (unit step), "a:step:b" (inclusive) or "x,y,z". Throws UsageError
// on malformed or empty ranges.
std::vector<double> ParseRange(const std::string& text);

// FNV-1a over the canonical JSON of the configuration without its output
// directory, as 16 hex digits. Identical stamps mean identical experiments.
std::string ConfigHash(const ExperimentConfig& config);
uint64_t Fnv1a(const std::string& bytes);

// Writes next to the target and renames over it, so readers never see a
// partial file.
void WriteFileAtomic(const std::filesystem::path& path,
                     const std::string& contents);

// Minimal line plot. Series are drawn in order with fixed colors.
struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};
std::string LinePlotSvg(const std::string& title, const std::string& x_label,
                        const std::string& y_label,
                        const std::vector<PlotSeries>& series);

// Error payload printed on stderr before a nonzero exit.
nlohmann::json ErrorJson(int code, const std::string& kind,
                         const std::string& message);

}  // namespace biped::cli

#endif  // BIPED_TOOLS_CLI_SUPPORT_H_
