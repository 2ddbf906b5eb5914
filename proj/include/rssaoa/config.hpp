#pragma once

#include "bench.hpp"
#include "crlb.hpp"
#include "estimators.hpp"
#include "measurement.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace rssaoa
{

using json = nlohmann::json;

/// Fixed layout used by simulate, estimate and crlb-map.
/// Angles are given in degrees in files and held in radians here.
struct LayoutConfig
{
  std::vector<Point3> anchors;
  std::optional<Point3> target;
  std::vector<NoiseProfile> profiles;    // explicit, or
  std::optional<HeteroNoiseSpec> noise;  // drawn from the exponential model
  PathLossParams path_loss;
  std::size_t t_steps = 5;
  std::uint64_t seed = 1;
  bool noise_free = false;
  GridSpec grid;
  std::vector<FimMode> modes{FimMode::hybrid};
};

namespace detail
{

inline std::string join(const std::string& path, const std::string& key)
{
  return path.empty() ? key : path + "." + key;
}

inline const json& require(const json& j, const std::string& key, const std::string& path)
{
  if (!j.is_object() || !j.contains(key))
    throw ConfigError(join(path, key), "missing");
  return j.at(key);
}

inline double as_number(const json& j, const std::string& field)
{
  if (!j.is_number())
    throw ConfigError(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v))
    throw ConfigError(field, "must be finite");
  return v;
}

inline double number_or(const json& j, const std::string& key, const std::string& path, double fallback)
{
  if (!j.contains(key))
    return fallback;
  return as_number(j.at(key), join(path, key));
}

inline std::uint64_t as_count(const json& j, const std::string& field)
{
  if (!j.is_number_integer() || j.get<std::int64_t>() < 0)
    throw ConfigError(field, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

inline Point3 as_point(const json& j, const std::string& field)
{
  if (!j.is_array() || j.size() != 3)
    throw ConfigError(field, "expected [x1, x2, x3]");
  return {as_number(j[0], field + "[0]"), as_number(j[1], field + "[1]"), as_number(j[2], field + "[2]")};
}

inline PathLossParams parse_path_loss(const json& root)
{
  PathLossParams p;
  if (!root.contains("path_loss"))
    return p;
  const json& j = root.at("path_loss");
  p.p0 = number_or(j, "p0_db", "path_loss", p.p0);
  p.d0 = number_or(j, "d0_m", "path_loss", p.d0);
  p.gamma = number_or(j, "gamma", "path_loss", p.gamma);
  if (!(p.d0 > 0.0))
    throw ConfigError("path_loss.d0_m", "must be positive");
  if (!(p.gamma > 0.0))
    throw ConfigError("path_loss.gamma", "must be positive");
  return p;
}

inline HeteroNoiseSpec parse_noise_spec(const json& j, const std::string& path)
{
  HeteroNoiseSpec s;
  s.mu_m = deg2rad(number_or(j, "mu_m_deg", path, rad2deg(s.mu_m)));
  s.mu_v = deg2rad(number_or(j, "mu_v_deg", path, rad2deg(s.mu_v)));
  s.mu_n = number_or(j, "mu_n_db", path, s.mu_n);
  if (!(s.mu_m > 0.0))
    throw ConfigError(join(path, "mu_m_deg"), "must be positive");
  if (!(s.mu_v > 0.0))
    throw ConfigError(join(path, "mu_v_deg"), "must be positive");
  if (!(s.mu_n > 0.0))
    throw ConfigError(join(path, "mu_n_db"), "must be positive");
  return s;
}

}  // namespace detail

inline ScenarioConfig parse_scenario_config(const json& root)
{
  using namespace detail;
  if (!root.is_object())
    throw ConfigError("<root>", "expected a JSON object");

  ScenarioConfig c;
  if (root.contains("n_anchors"))
    c.n_anchors = as_count(root.at("n_anchors"), "n_anchors");
  if (root.contains("t_steps"))
    c.t_steps = as_count(root.at("t_steps"), "t_steps");
  if (root.contains("mc_runs"))
    c.mc_runs = as_count(root.at("mc_runs"), "mc_runs");
  if (root.contains("seed"))
    c.seed = as_count(root.at("seed"), "seed");
  if (root.contains("threads"))
    c.threads = as_count(root.at("threads"), "threads");
  if (root.contains("measure_runtime"))
  {
    if (!root.at("measure_runtime").is_boolean())
      throw ConfigError("measure_runtime", "expected true or false");
    c.measure_runtime = root.at("measure_runtime").get<bool>();
  }
  c.min_separation = number_or(root, "min_separation_m", "", c.min_separation);
  if (root.contains("noise"))
    c.noise = parse_noise_spec(root.at("noise"), "noise");
  c.path_loss = parse_path_loss(root);
  if (root.contains("region"))
  {
    const json& r = root.at("region");
    c.region.lo = as_point(require(r, "min", "region"), "region.min");
    c.region.hi = as_point(require(r, "max", "region"), "region.max");
  }
  if (root.contains("methods"))
  {
    const json& m = root.at("methods");
    if (!m.is_array())
      throw ConfigError("methods", "expected an array of method names");
    c.methods.clear();
    for (std::size_t k = 0; k < m.size(); ++k)
    {
      const std::string field = "methods[" + std::to_string(k) + "]";
      if (!m[k].is_string())
        throw ConfigError(field, "expected a method name");
      try
      {
        c.methods.push_back(parse_method(m[k].get<std::string>()));
      }
      catch (const std::invalid_argument& e)
      {
        throw ConfigError(field, e.what());
      }
    }
  }
  if (root.contains("sweep"))
  {
    const json& s = root.at("sweep");
    const json& name = require(s, "param", "sweep");
    if (!name.is_string() || !parse_sweep_param(name.get<std::string>()))
      throw ConfigError("sweep.param", "expected one of n_anchors, t_steps, mu_m_deg, mu_v_deg, mu_n_db");
    Sweep sw;
    sw.param = *parse_sweep_param(name.get<std::string>());
    const json& values = require(s, "values", "sweep");
    if (!values.is_array())
      throw ConfigError("sweep.values", "expected an array");
    for (std::size_t k = 0; k < values.size(); ++k)
      sw.values.push_back(as_number(values[k], "sweep.values[" + std::to_string(k) + "]"));
    c.sweep = std::move(sw);
  }
  c.validate();
  return c;
}

inline LayoutConfig parse_layout_config(const json& root)
{
  using namespace detail;
  if (!root.is_object())
    throw ConfigError("<root>", "expected a JSON object");

  LayoutConfig c;
  const json& anchors = require(root, "anchors", "");
  if (!anchors.is_array() || anchors.empty())
    throw ConfigError("anchors", "expected a nonempty array of [x1, x2, x3]");
  for (std::size_t k = 0; k < anchors.size(); ++k)
    c.anchors.push_back(as_point(anchors[k], "anchors[" + std::to_string(k) + "]"));
  if (root.contains("target"))
    c.target = as_point(root.at("target"), "target");
  if (root.contains("t_steps"))
    c.t_steps = as_count(root.at("t_steps"), "t_steps");
  if (c.t_steps < 1)
    throw ConfigError("t_steps", "must be at least 1");
  if (root.contains("seed"))
    c.seed = as_count(root.at("seed"), "seed");
  if (root.contains("noise_free"))
  {
    if (!root.at("noise_free").is_boolean())
      throw ConfigError("noise_free", "expected true or false");
    c.noise_free = root.at("noise_free").get<bool>();
  }
  c.path_loss = parse_path_loss(root);

  if (root.contains("profiles"))
  {
    const json& p = root.at("profiles");
    if (!p.is_array() || p.size() != c.anchors.size())
      throw ConfigError("profiles", "expected one profile per anchor");
    for (std::size_t k = 0; k < p.size(); ++k)
    {
      const std::string path = "profiles[" + std::to_string(k) + "]";
      NoiseProfile np;
      np.sigma_m = deg2rad(as_number(require(p[k], "sigma_m_deg", path), path + ".sigma_m_deg"));
      np.sigma_v = deg2rad(as_number(require(p[k], "sigma_v_deg", path), path + ".sigma_v_deg"));
      np.sigma_n = as_number(require(p[k], "sigma_n_db", path), path + ".sigma_n_db");
      if (!(np.sigma_m > 0.0))
        throw ConfigError(path + ".sigma_m_deg", "must be positive");
      if (!(np.sigma_v > 0.0))
        throw ConfigError(path + ".sigma_v_deg", "must be positive");
      if (!(np.sigma_n > 0.0))
        throw ConfigError(path + ".sigma_n_db", "must be positive");
      c.profiles.push_back(np);
    }
  }
  if (root.contains("noise"))
    c.noise = parse_noise_spec(root.at("noise"), "noise");

  if (root.contains("grid"))
  {
    const json& g = root.at("grid");
    c.grid.x1_min = number_or(g, "x1_min", "grid", c.grid.x1_min);
    c.grid.x1_max = number_or(g, "x1_max", "grid", c.grid.x1_max);
    c.grid.x2_min = number_or(g, "x2_min", "grid", c.grid.x2_min);
    c.grid.x2_max = number_or(g, "x2_max", "grid", c.grid.x2_max);
    c.grid.step = number_or(g, "step", "grid", c.grid.step);
    c.grid.x3 = number_or(g, "x3", "grid", c.grid.x3);
    if (!(c.grid.step > 0.0))
      throw ConfigError("grid.step", "must be positive");
    if (c.grid.x1_max < c.grid.x1_min)
      throw ConfigError("grid.x1_max", "must not be below x1_min");
    if (c.grid.x2_max < c.grid.x2_min)
      throw ConfigError("grid.x2_max", "must not be below x2_min");
  }
  if (root.contains("modes"))
  {
    const json& m = root.at("modes");
    if (!m.is_array() || m.empty())
      throw ConfigError("modes", "expected a nonempty array");
    c.modes.clear();
    for (std::size_t k = 0; k < m.size(); ++k)
    {
      const std::string field = "modes[" + std::to_string(k) + "]";
      if (!m[k].is_string())
        throw ConfigError(field, "expected a mode name");
      try
      {
        c.modes.push_back(parse_fim_mode(m[k].get<std::string>()));
      }
      catch (const std::invalid_argument& e)
      {
        throw ConfigError(field, e.what());
      }
    }
  }
  return c;
}

inline json load_json_file(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open config file '" + path + "'");
  try
  {
    return json::parse(in);
  }
  catch (const json::parse_error& e)
  {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
}

inline json to_json(const ScenarioConfig& c)
{
  json j;
  j["n_anchors"] = c.n_anchors;
  j["t_steps"] = c.t_steps;
  j["noise"] = {{"mu_m_deg", rad2deg(c.noise.mu_m)}, {"mu_v_deg", rad2deg(c.noise.mu_v)}, {"mu_n_db", c.noise.mu_n}};
  j["path_loss"] = {{"p0_db", c.path_loss.p0}, {"d0_m", c.path_loss.d0}, {"gamma", c.path_loss.gamma}};
  j["region"] = {{"min", {c.region.lo.x(), c.region.lo.y(), c.region.lo.z()}},
                 {"max", {c.region.hi.x(), c.region.hi.y(), c.region.hi.z()}}};
  j["mc_runs"] = c.mc_runs;
  j["seed"] = c.seed;
  j["min_separation_m"] = c.min_separation;
  j["measure_runtime"] = c.measure_runtime;
  json methods = json::array();
  for (Method m : c.methods)
    methods.push_back(std::string(to_string(m)));
  j["methods"] = methods;
  if (c.sweep)
    j["sweep"] = {{"param", std::string(to_string(c.sweep->param))}, {"values", c.sweep->values}};
  return j;
}

inline json to_json(const RmseReport& r)
{
  auto num = [](double v) -> json { return std::isnan(v) ? json(nullptr) : json(v); };
  json points = json::array();
  for (const SweepPoint& p : r.points)
  {
    json methods = json::array();
    for (const MethodResult& m : p.methods)
    {
      json e{{"method", std::string(to_string(m.method))},
             {"rmse_m", num(m.rmse)},
             {"failures", m.failures},
             {"successes", m.successes}};
      e["runtime_s"] = m.mean_runtime_s ? json(*m.mean_runtime_s) : json(nullptr);
      methods.push_back(e);
    }
    json jp{{"crlb_m", num(p.crlb_mean)}, {"crlb_singular", p.crlb_singular}, {"methods", methods}};
    jp["sweep_value"] = p.sweep_value ? json(*p.sweep_value) : json(nullptr);
    points.push_back(jp);
  }
  return json{{"config", to_json(r.config)}, {"points", points}};
}

}  // namespace rssaoa
