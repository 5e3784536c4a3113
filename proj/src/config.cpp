// Copyright 2026 The pathlab Authors
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

#include "pathlab/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <vector>

#include "pathlab/csv.hpp"
#include "pathlab/error.hpp"

namespace pathlab
{

namespace
{

struct Binding
{
  std::string section;
  std::string key;
  std::function<std::string(const LabConfig &)> get;
  std::function<void(LabConfig &, const std::string &)> set;
};

double parse_double(const std::string & key, const std::string & text)
{
  double v = 0.0;
  const char * end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ConfigError("'" + key + "': expected a number, got '" + text + "'");
  }
  return v;
}

long long parse_integer(const std::string & key, const std::string & text)
{
  long long v = 0;
  const char * end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("'" + key + "': expected an integer, got '" + text + "'");
  }
  return v;
}

std::string format_integer(long long v) { return std::to_string(v); }

template <typename T>
Binding number(std::string section, std::string key, T LabConfig::*outer, double T::*field)
{
  const std::string full = section + "." + key;
  return {section, key,
    [outer, field](const LabConfig & c) { return csv::format_number((c.*outer).*field); },
    [outer, field, full](LabConfig & c, const std::string & s) { (c.*outer).*field = parse_double(full, s); }};
}

template <typename T, typename I>
Binding integer(std::string section, std::string key, T LabConfig::*outer, I T::*field, long long min)
{
  const std::string full = section + "." + key;
  return {section, key,
    [outer, field](const LabConfig & c) { return format_integer(static_cast<long long>((c.*outer).*field)); },
    [outer, field, full, min](LabConfig & c, const std::string & s) {
      const long long v = parse_integer(full, s);
      if (v < min) {
        throw ConfigError("'" + full + "' must be at least " + std::to_string(min));
      }
      (c.*outer).*field = static_cast<I>(v);
    }};
}

template <typename E>
struct EnumName
{
  E value;
  const char * name;
};

template <typename E, std::size_t N>
Binding enumeration(
  std::string section, std::string key, std::function<E &(LabConfig &)> ref,
  const EnumName<E> (&names)[N])
{
  const std::string full = section + "." + key;
  std::vector<EnumName<E>> table(names, names + N);
  return {section, key,
    [ref, table](const LabConfig & c) {
      const E v = ref(const_cast<LabConfig &>(c));
      for (const auto & n : table) {
        if (n.value == v) {
          return std::string(n.name);
        }
      }
      return std::string("?");
    },
    [ref, table, full](LabConfig & c, const std::string & s) {
      for (const auto & n : table) {
        if (s == n.name) {
          ref(c) = n.value;
          return;
        }
      }
      std::string options;
      for (const auto & n : table) {
        options += (options.empty() ? "" : ", ") + std::string(n.name);
      }
      throw ConfigError("'" + full + "': unknown value '" + s + "' (expected one of " + options + ")");
    }};
}

Binding custom_double(std::string section, std::string key, std::function<double &(LabConfig &)> ref)
{
  const std::string full = section + "." + key;
  return {section, key,
    [ref](const LabConfig & c) { return csv::format_number(ref(const_cast<LabConfig &>(c))); },
    [ref, full](LabConfig & c, const std::string & s) { ref(c) = parse_double(full, s); }};
}

Binding custom_string(std::string section, std::string key, std::function<std::string &(LabConfig &)> ref)
{
  return {section, key,
    [ref](const LabConfig & c) { return ref(const_cast<LabConfig &>(c)); },
    [ref](LabConfig & c, const std::string & s) { ref(c) = s; }};
}

const std::vector<Binding> & bindings()
{
  using vehicle::VehicleParams;
  static const EnumName<training::RewardMode> reward_names[] = {
    {training::RewardMode::kBase, "base"},
    {training::RewardMode::kChangePenalty, "change-penalty"},
    {training::RewardMode::kDemoFixed, "demo-fixed"},
    {training::RewardMode::kDemoAdaptive, "demo-adaptive"}};
  static const EnumName<vehicle::SteeringMode> action_names[] = {
    {vehicle::SteeringMode::kAngle, "angle"}, {vehicle::SteeringMode::kRate, "rate"}};
  static const EnumName<training::HeadingErrorDef> heading_names[] = {
    {training::HeadingErrorDef::kPathTangent, "path-tangent"},
    {training::HeadingErrorDef::kSideSlip, "side-slip"}};
  static const EnumName<ddpg::ExplorationNoise::Kind> noise_names[] = {
    {ddpg::ExplorationNoise::Kind::kOrnsteinUhlenbeck, "ou"},
    {ddpg::ExplorationNoise::Kind::kGaussian, "gaussian"}};
  static const EnumName<ddpg::OptimizerConfig::Kind> optimizer_names[] = {
    {ddpg::OptimizerConfig::Kind::kAdam, "adam"},
    {ddpg::OptimizerConfig::Kind::kMomentum, "momentum"}};
  static const EnumName<longitudinal::Mode> lon_names[] = {
    {longitudinal::Mode::kConstantThrottle, "constant"},
    {longitudinal::Mode::kProfileTracking, "profile"}};

  static const std::vector<Binding> table = [&] {
    using C = LabConfig;
    std::vector<Binding> b;
    const auto veh = [&](const char * k, double VehicleParams::*f) { b.push_back(number("vehicle", k, &C::vehicle, f)); };
    veh("mass", &VehicleParams::mass);
    veh("yaw_inertia", &VehicleParams::yaw_inertia);
    veh("dist_front_axle", &VehicleParams::dist_front_axle);
    veh("dist_rear_axle", &VehicleParams::dist_rear_axle);
    veh("cornering_front", &VehicleParams::cornering_front);
    veh("cornering_rear", &VehicleParams::cornering_rear);
    veh("max_steer", &VehicleParams::max_steer);
    veh("drive_gain", &VehicleParams::drive_gain);
    veh("drag_coeff", &VehicleParams::drag_coeff);
    veh("roll_resist", &VehicleParams::roll_resist);
    veh("brake_decel", &VehicleParams::brake_decel);
    b.push_back(custom_double("vehicle", "model_mass_scale", [](C & c) -> double & { return c.model_mass_scale; }));
    b.push_back(custom_double("vehicle", "model_stiffness_scale", [](C & c) -> double & { return c.model_stiffness_scale; }));

    using control::MpcConfig;
    b.push_back(integer("mpc", "horizon", &C::mpc, &MpcConfig::horizon, 1));
    b.push_back(number("mpc", "dt", &C::mpc, &MpcConfig::dt));
    b.push_back(number("mpc", "v_nominal", &C::mpc, &MpcConfig::v_nominal));
    b.push_back(custom_double("mpc", "q_long", [](C & c) -> double & { return c.mpc.q(0, 0); }));
    b.push_back(custom_double("mpc", "q_lat", [](C & c) -> double & { return c.mpc.q(1, 1); }));
    b.push_back(custom_double("mpc", "p_long", [](C & c) -> double & { return c.mpc.p_term(0, 0); }));
    b.push_back(custom_double("mpc", "p_lat", [](C & c) -> double & { return c.mpc.p_term(1, 1); }));
    b.push_back(number("mpc", "r_input", &C::mpc, &MpcConfig::r_input));
    b.push_back(number("mpc", "steer_min", &C::mpc, &MpcConfig::steer_min));
    b.push_back(number("mpc", "steer_max", &C::mpc, &MpcConfig::steer_max));
    b.push_back(integer("mpc", "qp_max_iters", &C::mpc, &MpcConfig::qp_max_iters, 1));
    b.push_back(number("mpc", "qp_tol", &C::mpc, &MpcConfig::qp_tol));

    using control::PidGains;
    b.push_back(number("pid", "kp", &C::pid, &PidGains::kp));
    b.push_back(number("pid", "ki", &C::pid, &PidGains::ki));
    b.push_back(number("pid", "kd", &C::pid, &PidGains::kd));
    b.push_back(number("pid", "integral_limit", &C::pid, &PidGains::integral_limit));
    b.push_back(custom_double("pid", "c_mpc", [](C & c) -> double & { return c.blend.c_mpc; }));
    b.push_back(custom_double("pid", "c_pid", [](C & c) -> double & { return c.blend.c_pid; }));

    b.push_back(enumeration<longitudinal::Mode>("longitudinal", "mode",
      [](C & c) -> longitudinal::Mode & { return c.longitudinal.mode; }, lon_names));
    b.push_back(custom_double("longitudinal", "throttle", [](C & c) -> double & { return c.longitudinal.constant_throttle; }));
    b.push_back(custom_double("longitudinal", "kp", [](C & c) -> double & { return c.longitudinal.gains.kp; }));
    b.push_back(custom_double("longitudinal", "ki", [](C & c) -> double & { return c.longitudinal.gains.ki; }));
    b.push_back(custom_double("longitudinal", "kd", [](C & c) -> double & { return c.longitudinal.gains.kd; }));
    b.push_back(custom_double("longitudinal", "integral_limit", [](C & c) -> double & { return c.longitudinal.gains.integral_limit; }));
    b.push_back({"longitudinal", "profile",
      [](const C & c) {
        std::string out;
        for (const auto & s : c.longitudinal.profile) {
          out += (out.empty() ? "" : " ") + csv::format_number(s.t) + ":" + csv::format_number(s.v_ref);
        }
        return out;
      },
      [](C & c, const std::string & text) {
        c.longitudinal.profile.clear();
        std::istringstream in(text);
        std::string tok;
        while (in >> tok) {
          const auto colon = tok.find(':');
          if (colon == std::string::npos) {
            throw ConfigError("'longitudinal.profile': expected t:v pairs, got '" + tok + "'");
          }
          c.longitudinal.profile.push_back({parse_double("longitudinal.profile", tok.substr(0, colon)),
            parse_double("longitudinal.profile", tok.substr(colon + 1))});
        }
      }});

    using ddpg::DdpgParams;
    b.push_back(number("ddpg", "gamma", &C::ddpg, &DdpgParams::gamma));
    b.push_back(number("ddpg", "rho", &C::ddpg, &DdpgParams::rho));
    b.push_back(integer("ddpg", "batch_size", &C::ddpg, &DdpgParams::batch_size, 1));
    b.push_back(number("ddpg", "actor_lr", &C::ddpg, &DdpgParams::actor_lr));
    b.push_back(number("ddpg", "critic_lr", &C::ddpg, &DdpgParams::critic_lr));
    b.push_back(integer("ddpg", "buffer_capacity", &C::ddpg, &DdpgParams::buffer_capacity, 1));
    b.push_back(number("ddpg", "final_layer_init", &C::ddpg, &DdpgParams::final_layer_init));
    b.push_back({"ddpg", "hidden",
      [](const C & c) {
        std::string out;
        for (int h : c.ddpg.hidden) {
          out += (out.empty() ? "" : ",") + std::to_string(h);
        }
        return out;
      },
      [](C & c, const std::string & text) {
        c.ddpg.hidden.clear();
        std::istringstream in(text);
        std::string tok;
        while (std::getline(in, tok, ',')) {
          const long long v = parse_integer("ddpg.hidden", tok);
          if (v < 1) {
            throw ConfigError("'ddpg.hidden': layer sizes must be positive");
          }
          c.ddpg.hidden.push_back(static_cast<int>(v));
        }
      }});
    b.push_back(enumeration<ddpg::OptimizerConfig::Kind>("ddpg", "optimizer",
      [](C & c) -> ddpg::OptimizerConfig::Kind & { return c.ddpg.optimizer.kind; }, optimizer_names));
    b.push_back(custom_double("ddpg", "momentum", [](C & c) -> double & { return c.ddpg.optimizer.momentum; }));
    b.push_back(custom_double("ddpg", "beta1", [](C & c) -> double & { return c.ddpg.optimizer.beta1; }));
    b.push_back(custom_double("ddpg", "beta2", [](C & c) -> double & { return c.ddpg.optimizer.beta2; }));
    b.push_back(custom_double("ddpg", "epsilon", [](C & c) -> double & { return c.ddpg.optimizer.epsilon; }));

    b.push_back(enumeration<training::RewardMode>("train", "reward",
      [](C & c) -> training::RewardMode & { return c.train.reward; }, reward_names));
    b.push_back(custom_double("train", "c_track", [](C & c) -> double & { return c.train.weights.c_track; }));
    b.push_back(custom_double("train", "c_change", [](C & c) -> double & { return c.train.weights.c_change; }));
    b.push_back(custom_double("train", "c_diff", [](C & c) -> double & { return c.train.weights.c_diff; }));
    b.push_back(number("train", "p_action", &C::train, &TrainConfig::p_action));
    b.push_back(number("train", "p_action_final", &C::train, &TrainConfig::p_action_final));
    b.push_back(number("train", "p_action_decay", &C::train, &TrainConfig::p_action_decay));
    b.push_back(integer("train", "episode_cap", &C::train, &TrainConfig::episode_cap, 1));
    b.push_back(number("train", "dt", &C::train, &TrainConfig::dt));
    b.push_back(integer("train", "total_steps", &C::train, &TrainConfig::total_steps, 0));
    b.push_back(integer("train", "warmup_steps", &C::train, &TrainConfig::warmup_steps, 0));
    b.push_back(integer("train", "updates_per_step", &C::train, &TrainConfig::updates_per_step, 0));
    b.push_back(number("train", "lr_decay", &C::train, &TrainConfig::lr_decay));
    b.push_back(integer("train", "lr_cycle", &C::train, &TrainConfig::lr_cycle, 2));
    b.push_back(number("train", "reward_scale", &C::train, &TrainConfig::reward_scale));
    b.push_back(number("train", "spawn_speed", &C::train, &TrainConfig::spawn_speed));
    b.push_back(enumeration<ddpg::ExplorationNoise::Kind>("train", "noise",
      [](C & c) -> ddpg::ExplorationNoise::Kind & { return c.train.noise; }, noise_names));
    b.push_back(number("train", "noise_theta", &C::train, &TrainConfig::noise_theta));
    b.push_back(number("train", "noise_sigma", &C::train, &TrainConfig::noise_sigma));
    b.push_back(number("train", "noise_sigma_final", &C::train, &TrainConfig::noise_sigma_final));
    b.push_back({"train", "lookahead",
      [](const C & c) { return std::to_string(c.train.observation.lookahead); },
      [](C & c, const std::string & s) {
        const long long v = parse_integer("train.lookahead", s);
        if (v < 1) {
          throw ConfigError("'train.lookahead' must be at least 1");
        }
        c.train.observation.lookahead = static_cast<int>(v);
      }});
    b.push_back(enumeration<vehicle::SteeringMode>("train", "action_mode",
      [](C & c) -> vehicle::SteeringMode & { return c.train.observation.action_mode; }, action_names));
    b.push_back(enumeration<training::HeadingErrorDef>("train", "heading_error",
      [](C & c) -> training::HeadingErrorDef & { return c.train.observation.heading; }, heading_names));
    b.push_back(custom_double("train", "waypoint_scale", [](C & c) -> double & { return c.train.observation.waypoint_scale; }));
    b.push_back(custom_double("train", "speed_scale", [](C & c) -> double & { return c.train.observation.speed_scale; }));
    b.push_back(custom_double("train", "lateral_scale", [](C & c) -> double & { return c.train.observation.lateral_scale; }));
    b.push_back(custom_double("train", "heading_scale", [](C & c) -> double & { return c.train.observation.heading_scale; }));

    b.push_back(custom_string("track", "kind", [](C & c) -> std::string & { return c.track.kind; }));
    b.push_back(number("track", "radius", &C::track, &TrackConfig::radius));
    b.push_back(number("track", "spacing", &C::track, &TrackConfig::spacing));
    b.push_back(custom_string("track", "course", [](C & c) -> std::string & { return c.track.course; }));
    b.push_back(custom_string("track", "file", [](C & c) -> std::string & { return c.track.file; }));
    b.push_back(number("track", "corridor_half_width", &C::track, &TrackConfig::corridor_half_width));
    b.push_back(number("track", "noise", &C::track, &TrackConfig::noise));
    b.push_back(integer("track", "noise_seed", &C::track, &TrackConfig::noise_seed, 0));

    b.push_back({"run", "seed",
      [](const C & c) { return std::to_string(c.seed); },
      [](C & c, const std::string & s) {
        const long long v = parse_integer("run.seed", s);
        if (v < 0) {
          throw ConfigError("'run.seed' must be non-negative");
        }
        c.seed = static_cast<std::uint64_t>(v);
      }});
    return b;
  }();
  return table;
}

void check(const LabConfig & c)
{
  try {
    c.vehicle.validate();
    c.mpc.validate();
    c.ddpg.validate();
  } catch (const ParameterError & e) {
    throw ConfigError(e.what());
  }
  if (c.track.kind != "circle" && c.track.kind != "course" && c.track.kind != "file") {
    throw ConfigError("'track.kind' must be circle, course or file");
  }
  if (!(c.model_mass_scale > 0.0) || !(c.model_stiffness_scale > 0.0)) {
    throw ConfigError("model scales must be positive");
  }
  if (!(c.train.dt > 0.0)) {
    throw ConfigError("'train.dt' must be positive");
  }
  const auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!in_unit(c.train.p_action) || !in_unit(c.train.p_action_final) || !in_unit(c.train.p_action_decay)) {
    throw ConfigError("p_action settings must lie in [0, 1]");
  }
}

}  // namespace

control::MpcPidSettings LabConfig::demonstrator() const
{
  control::MpcPidSettings s;
  s.mpc = mpc;
  s.pid = pid;
  s.blend = blend;
  s.model_params = vehicle::mismatched(vehicle, model_mass_scale, model_stiffness_scale);
  return s;
}

LabConfig load_config(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file: " + path.string());
  }
  // the INI reader only knows ';' comments
  std::stringstream cleaned;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t");
    if (first != std::string::npos && line[first] == '#') {
      continue;
    }
    cleaned << line << '\n';
  }
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(cleaned, tree);
  } catch (const boost::property_tree::ini_parser_error & e) {
    throw ConfigError(path.string() + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }

  LabConfig config;
  for (const auto & [section, entries] : tree) {
    if (entries.empty() && !entries.data().empty()) {
      throw ConfigError("key outside any section: " + section);
    }
    for (const auto & [key, value] : entries) {
      const Binding * match = nullptr;
      for (const auto & b : bindings()) {
        if (b.section == section && b.key == key) {
          match = &b;
          break;
        }
      }
      if (!match) {
        throw ConfigError("unknown key: " + section + "." + key);
      }
      match->set(config, value.data());
    }
  }
  check(config);
  return config;
}

void save_config(const LabConfig & config, const std::filesystem::path & path)
{
  std::ofstream out(path);
  if (!out) {
    throw ConfigError("cannot write config file: " + path.string());
  }
  std::string section;
  for (const auto & b : bindings()) {
    if (b.section != section) {
      out << (section.empty() ? "" : "\n") << '[' << b.section << "]\n";
      section = b.section;
    }
    out << b.key << " = " << b.get(config) << '\n';
  }
}

std::vector<track::CourseSegment> parse_course(const std::string & text)
{
  std::vector<track::CourseSegment> segments;
  std::istringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    const auto first = tok.find_first_not_of(" \t");
    const auto last = tok.find_last_not_of(" \t");
    if (first == std::string::npos) {
      continue;
    }
    tok = tok.substr(first, last - first + 1);
    const char kind = tok[0];
    const std::string body = tok.substr(1);
    if (kind == 'S') {
      const double len = parse_double("course", body);
      if (!(len > 0.0)) {
        throw ConfigError("course: straight length must be positive in '" + tok + "'");
      }
      segments.push_back(track::CourseSegment::straight(len));
    } else if (kind == 'L' || kind == 'R') {
      const auto colon = body.find(':');
      if (colon == std::string::npos) {
        throw ConfigError("course: expected <radius>:<degrees> in '" + tok + "'");
      }
      const double radius = parse_double("course", body.substr(0, colon));
      const double deg = parse_double("course", body.substr(colon + 1));
      if (!(radius > 0.0)) {
        throw ConfigError("course: arc radius must be positive in '" + tok + "'");
      }
      const double angle = deg * std::numbers::pi / 180.0;
      segments.push_back(track::CourseSegment::arc(radius, kind == 'L' ? angle : -angle));
    } else {
      throw ConfigError("course: unknown segment '" + tok + "'");
    }
  }
  if (segments.empty()) {
    throw ConfigError("course: no segments");
  }
  return segments;
}

track::Track make_track(const TrackConfig & config)
{
  if (config.kind == "circle") {
    return track::generate_circle(config.radius, config.spacing, config.corridor_half_width);
  }
  if (config.kind == "course") {
    const auto segments = parse_course(config.course);
    return track::generate_closed_course(segments, config.spacing, config.corridor_half_width);
  }
  if (config.kind == "file") {
    return track::load_track(config.file, config.corridor_half_width);
  }
  throw ConfigError("unknown track kind: " + config.kind);
}

}  // namespace pathlab
