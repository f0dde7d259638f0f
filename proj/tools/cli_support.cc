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

#include "cli_support.h"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

namespace biped::cli {
namespace {

using nlohmann::json;

void CheckKeys(const json& j, const std::set<std::string>& allowed,
               const std::string& where) {
  if (!j.is_object()) throw UsageError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) {
      throw UsageError("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void Read(const json& j, const char* key, T* out) {
  if (j.contains(key)) *out = j.at(key).get<T>();
}

const std::vector<std::pair<ControllerConfig::Feedforward, std::string>>
    kFeedforwardNames = {{ControllerConfig::Feedforward::kZeroOrderHold, "zoh"},
                         {ControllerConfig::Feedforward::kLinear, "linear"}};
const std::vector<std::pair<ControllerConfig::Interpolation, std::string>>
    kInterpolationNames = {
        {ControllerConfig::Interpolation::kLinear, "linear"},
        {ControllerConfig::Interpolation::kCubic, "cubic"},
        {ControllerConfig::Interpolation::kQuadratic, "quadratic"}};
const std::vector<std::pair<ControllerConfig::Law, std::string>> kLawNames = {
    {ControllerConfig::Law::kTorqueFeedforward, "torque_feedforward"},
    {ControllerConfig::Law::kComputedTorque, "computed_torque"}};

template <typename E>
std::string NameOf(const std::vector<std::pair<E, std::string>>& table, E e) {
  for (const auto& [value, name] : table) {
    if (value == e) return name;
  }
  return "?";
}

template <typename E>
E ValueOf(const std::vector<std::pair<E, std::string>>& table,
          const std::string& name, const std::string& what) {
  std::string options;
  for (const auto& [value, n] : table) {
    if (n == name) return value;
    options += (options.empty() ? "" : ", ") + n;
  }
  throw UsageError("unknown " + what + " '" + name + "' (expected " + options +
                   ")");
}

ControllerConfig ControllerFromJson(const json& j) {
  CheckKeys(j, {"omega_n", "zeta", "feedforward", "interpolation", "law"},
            "controller");
  ControllerConfig c;
  Read(j, "omega_n", &c.omega_n);
  Read(j, "zeta", &c.zeta);
  if (j.contains("feedforward")) {
    c.feedforward = ValueOf(kFeedforwardNames,
                            j.at("feedforward").get<std::string>(),
                            "feedforward");
  }
  if (j.contains("interpolation")) {
    c.interpolation = ValueOf(kInterpolationNames,
                              j.at("interpolation").get<std::string>(),
                              "interpolation");
  }
  if (j.contains("law")) {
    c.law = ValueOf(kLawNames, j.at("law").get<std::string>(), "control law");
  }
  if (!(c.omega_n > 0.0) || !(c.zeta > 0.0)) {
    throw UsageError("controller omega_n and zeta must be positive");
  }
  return c;
}

PushConfig PushFromJson(const json& j) {
  CheckKeys(j, {"points", "impulse", "at_step", "followup_steps"}, "push");
  PushConfig p;
  if (j.contains("points")) {
    for (const auto& name : j.at("points")) {
      try {
        p.points.push_back(PushPointFromString(name.get<std::string>()));
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
    }
  }
  Read(j, "impulse", &p.impulse);
  Read(j, "at_step", &p.at_step);
  Read(j, "followup_steps", &p.followup_steps);
  if (p.at_step < 0 || p.followup_steps < 1) {
    throw UsageError("push at_step must be >= 0 and followup_steps >= 1");
  }
  return p;
}

SweepConfig SweepFromJson(const json& j) {
  CheckKeys(j,
            {"presets", "omegas", "rollout_steps", "transient_steps",
             "push_followup_steps", "vary", "base_set", "masses"},
            "sweep");
  SweepConfig s;
  Read(j, "presets", &s.presets);
  for (const std::string& p : s.presets) PresetNumber(p);
  Read(j, "omegas", &s.omegas);
  Read(j, "rollout_steps", &s.rollout_steps);
  Read(j, "transient_steps", &s.transient_steps);
  Read(j, "push_followup_steps", &s.push_followup_steps);
  if (j.contains("vary")) {
    try {
      s.vary = analysis::LegSegmentFromString(j.at("vary").get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  Read(j, "base_set", &s.base_set);
  Read(j, "masses", &s.masses);
  if (s.omegas.empty()) throw UsageError("sweep omegas is empty");
  if (s.masses.empty()) throw UsageError("sweep masses is empty");
  if (s.presets.empty()) throw UsageError("sweep presets is empty");
  if (s.rollout_steps <= s.transient_steps) {
    throw UsageError("sweep rollout_steps must exceed transient_steps");
  }
  return s;
}

std::string FormatNumber(double v) {
  std::ostringstream out;
  out << std::setprecision(6) << v;
  return out.str();
}

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

int PresetNumber(const std::string& name) {
  if (name.size() == 4 && name.starts_with("set") && name[3] >= '1' &&
      name[3] <= '5') {
    return name[3] - '0';
  }
  throw UsageError("unknown preset '" + name + "' (expected set1..set5)");
}

std::vector<std::string> ParsePresetList(const std::string& text) {
  if (text == "all") return {"set1", "set2", "set3", "set4", "set5"};
  std::vector<std::string> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    PresetNumber(item);
    out.push_back(item);
  }
  if (out.empty()) throw UsageError("empty preset list");
  return out;
}

std::vector<double> ParseRange(const std::string& text) {
  auto number = [&](const std::string& s) {
    size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size() || !std::isfinite(v)) {
      throw UsageError("malformed range '" + text + "'");
    }
    return v;
  };
  std::vector<std::string> parts;
  const char sep = text.find(',') != std::string::npos ? ',' : ':';
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, sep);) parts.push_back(item);
  std::vector<double> out;
  if (sep == ',') {
    for (const std::string& p : parts) out.push_back(number(p));
  } else if (parts.size() == 2 || parts.size() == 3) {
    const double from = number(parts.front());
    const double to = number(parts.back());
    const double step = parts.size() == 3 ? number(parts[1]) : 1.0;
    if (!(step > 0.0)) throw UsageError("range step must be positive");
    // Integer counting keeps the endpoint exact despite rounding.
    const double span = (to - from) / step;
    if (span >= -1e-9) {
      const int count = static_cast<int>(std::floor(span + 1e-9)) + 1;
      for (int i = 0; i < count; ++i) out.push_back(from + i * step);
    }
  } else if (parts.size() == 1 && !text.empty()) {
    out.push_back(number(text));
  }
  if (out.empty()) throw UsageError("empty range '" + text + "'");
  return out;
}

ExperimentConfig ConfigFromJson(const json& j) {
  CheckKeys(j,
            {"preset", "robot", "problem", "solver", "controller", "steps",
             "push", "sweep", "gait_file", "gait_files", "records_file",
             "output_dir", "seed", "jitter", "threads"},
            "config");
  ExperimentConfig c;
  try {
    if (j.contains("preset") && j.contains("robot")) {
      throw UsageError("config sets both preset and robot");
    }
    if (j.contains("preset")) {
      c.preset = j.at("preset").get<std::string>();
      c.robot = RobotParams::Preset(PresetNumber(c.preset));
    }
    if (j.contains("robot")) {
      c.preset.clear();
      c.robot = RobotParamsFromJson(j.at("robot"));
    }
    if (j.contains("problem")) c.problem = GaitProblemFromJson(j.at("problem"));
    if (j.contains("solver")) {
      const json& s = j.at("solver");
      CheckKeys(s, {"max_iterations", "verbosity"}, "solver");
      Read(s, "max_iterations", &c.max_iterations);
      Read(s, "verbosity", &c.verbosity);
    }
    if (j.contains("controller")) {
      c.controller = ControllerFromJson(j.at("controller"));
    }
    Read(j, "steps", &c.steps);
    if (j.contains("push")) c.push = PushFromJson(j.at("push"));
    if (j.contains("sweep")) c.sweep = SweepFromJson(j.at("sweep"));
    Read(j, "gait_file", &c.gait_file);
    Read(j, "gait_files", &c.gait_files);
    Read(j, "records_file", &c.records_file);
    Read(j, "output_dir", &c.output_dir);
    Read(j, "seed", &c.seed);
    Read(j, "jitter", &c.jitter);
    Read(j, "threads", &c.threads);
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    // Type errors and domain errors from nested parsers.
    throw UsageError(std::string("invalid config: ") + e.what());
  }
  if (c.steps < 1) throw UsageError("steps must be >= 1");
  if (c.threads < 1) throw UsageError("threads must be >= 1");
  if (c.jitter < 0.0) throw UsageError("jitter must be >= 0");
  return c;
}

json ToJson(const ExperimentConfig& c) {
  json points = json::array();
  for (PushPoint p : c.push.points) points.push_back(ToString(p));
  json out = {
      {"problem", ToJson(c.problem)},
      {"solver",
       {{"max_iterations", c.max_iterations}, {"verbosity", c.verbosity}}},
      {"controller",
       {{"omega_n", c.controller.omega_n},
        {"zeta", c.controller.zeta},
        {"feedforward", NameOf(kFeedforwardNames, c.controller.feedforward)},
        {"interpolation",
         NameOf(kInterpolationNames, c.controller.interpolation)},
        {"law", NameOf(kLawNames, c.controller.law)}}},
      {"steps", c.steps},
      {"push",
       {{"points", points},
        {"impulse", c.push.impulse},
        {"at_step", c.push.at_step},
        {"followup_steps", c.push.followup_steps}}},
      {"sweep",
       {{"presets", c.sweep.presets},
        {"omegas", c.sweep.omegas},
        {"rollout_steps", c.sweep.rollout_steps},
        {"transient_steps", c.sweep.transient_steps},
        {"push_followup_steps", c.sweep.push_followup_steps},
        {"vary", analysis::ToString(c.sweep.vary)},
        {"base_set", c.sweep.base_set},
        {"masses", c.sweep.masses}}},
      {"gait_file", c.gait_file},
      {"gait_files", c.gait_files},
      {"records_file", c.records_file},
      {"output_dir", c.output_dir},
      {"seed", c.seed},
      {"jitter", c.jitter},
      {"threads", c.threads}};
  if (c.preset.empty()) {
    out["robot"] = ToJson(c.robot);
  } else {
    out["preset"] = c.preset;
  }
  return out;
}

uint64_t Fnv1a(const std::string& bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string ConfigHash(const ExperimentConfig& config) {
  json j = ToJson(config);
  // Where results go and how many workers compute them do not change them.
  j.erase("output_dir");
  j.erase("threads");
  j["solver"].erase("verbosity");
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(Fnv1a(j.dump())));
  return buf;
}

void WriteFileAtomic(const std::filesystem::path& path,
                     const std::string& contents) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << contents;
    out.flush();
    if (!out) {
      std::error_code ignored;
      fs::remove(tmp, ignored);
      throw std::runtime_error("cannot write " + path.string());
    }
  }
  fs::rename(tmp, path);
}

std::string LinePlotSvg(const std::string& title, const std::string& x_label,
                        const std::string& y_label,
                        const std::vector<PlotSeries>& series) {
  constexpr double kWidth = 640, kHeight = 420;
  constexpr double kLeft = 70, kRight = 130, kTop = 40, kBottom = 50;
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#e377c2"};
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0;
  double y0 = x0, y1 = -x0;
  for (const PlotSeries& s : series) {
    for (size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kTop + (y1 - y) / (y1 - y0) * ph; };

  std::ostringstream o;
  o << std::fixed << std::setprecision(2);
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
    << "\" height=\"" << kHeight << "\" font-family=\"sans-serif\" "
    << "font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << kLeft + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" "
    << "font-size=\"14\">" << Escape(title) << "</text>\n";
  o << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw
    << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4, yv = y0 + (y1 - y0) * i / 4;
    o << "<text x=\"" << px(xv) << "\" y=\"" << kTop + ph + 16
      << "\" text-anchor=\"middle\">" << FormatNumber(xv) << "</text>\n";
    o << "<text x=\"" << kLeft - 6 << "\" y=\"" << py(yv) + 4
      << "\" text-anchor=\"end\">" << FormatNumber(yv) << "</text>\n";
  }
  o << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 10
    << "\" text-anchor=\"middle\">" << Escape(x_label) << "</text>\n";
  o << "<text transform=\"translate(16," << kTop + ph / 2
    << ") rotate(-90)\" text-anchor=\"middle\">" << Escape(y_label)
    << "</text>\n";
  for (size_t k = 0; k < series.size(); ++k) {
    const PlotSeries& s = series[k];
    const char* color = kColors[k % std::size(kColors)];
    std::string points;
    for (size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      std::ostringstream pt;
      pt << std::fixed << std::setprecision(2) << px(s.x[i]) << ','
         << py(s.y[i]) << ' ';
      points += pt.str();
      o << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i])
        << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
    }
    o << "<polyline fill=\"none\" stroke=\"" << color
      << "\" stroke-width=\"1.5\" points=\"" << points << "\"/>\n";
    const double ly = kTop + 14 + 18 * static_cast<double>(k);
    o << "<line x1=\"" << kLeft + pw + 10 << "\" y1=\"" << ly - 4 << "\" x2=\""
      << kLeft + pw + 30 << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color
      << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << kLeft + pw + 36 << "\" y=\"" << ly << "\">"
      << Escape(s.name) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

json ErrorJson(int code, const std::string& kind, const std::string& message) {
  return {{"error", {{"exit_code", code}, {"kind", kind}, {"message", message}}}};
}

}  // namespace biped::cli
