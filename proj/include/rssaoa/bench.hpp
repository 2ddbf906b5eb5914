#pragma once

#include "crlb.hpp"
#include "estimators.hpp"
#include "geometry.hpp"
#include "measurement.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace rssaoa
{

class ConfigError : public std::invalid_argument
{
public:
  ConfigError(std::string field, const std::string& what)
    : std::invalid_argument("config field '" + field + "': " + what), field_(std::move(field))
  {
  }

  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

struct Box
{
  Point3 lo = Point3::Zero();
  Point3 hi = Point3::Constant(40.0);

  bool has_volume() const { return (hi - lo).minCoeff() > 0.0; }
};

enum class SweepParam
{
  n_anchors,
  t_steps,
  mu_m,
  mu_v,
  mu_n
};

/// Names as they appear in configuration files and reports. Angle means are in degrees.
inline std::string_view to_string(SweepParam p)
{
  switch (p)
  {
    case SweepParam::n_anchors: return "n_anchors";
    case SweepParam::t_steps: return "t_steps";
    case SweepParam::mu_m: return "mu_m_deg";
    case SweepParam::mu_v: return "mu_v_deg";
    case SweepParam::mu_n: return "mu_n_db";
  }
  return "unknown";
}

inline std::optional<SweepParam> parse_sweep_param(std::string_view name)
{
  for (auto p : {SweepParam::n_anchors, SweepParam::t_steps, SweepParam::mu_m, SweepParam::mu_v, SweepParam::mu_n})
    if (name == to_string(p))
      return p;
  return std::nullopt;
}

struct Sweep
{
  SweepParam param = SweepParam::n_anchors;
  std::vector<double> values;
};

struct ScenarioConfig
{
  std::size_t n_anchors = 5;
  std::size_t t_steps = 5;
  HeteroNoiseSpec noise;
  PathLossParams path_loss;
  Box region;
  std::size_t mc_runs = 500;
  std::uint64_t seed = 1;
  std::vector<Method> methods{Method::proposed, Method::ls, Method::wls_d};
  std::optional<Sweep> sweep;
  /// Placements with an anchor-target pair closer than this are redrawn.
  double min_separation = 1.0;
  /// 0 selects std::thread::hardware_concurrency().
  std::size_t threads = 0;
  bool measure_runtime = false;

  void validate() const
  {
    if (n_anchors < 2)
      throw ConfigError("n_anchors", "must be at least 2");
    if (t_steps < 1)
      throw ConfigError("t_steps", "must be at least 1");
    if (mc_runs < 1)
      throw ConfigError("mc_runs", "must be at least 1");
    if (!(noise.mu_m > 0.0))
      throw ConfigError("noise.mu_m_deg", "must be positive");
    if (!(noise.mu_v > 0.0))
      throw ConfigError("noise.mu_v_deg", "must be positive");
    if (!(noise.mu_n > 0.0))
      throw ConfigError("noise.mu_n_db", "must be positive");
    if (!(path_loss.d0 > 0.0))
      throw ConfigError("path_loss.d0_m", "must be positive");
    if (!(path_loss.gamma > 0.0))
      throw ConfigError("path_loss.gamma", "must be positive");
    if (!region.has_volume())
      throw ConfigError("region", "must have positive volume");
    if (methods.empty())
      throw ConfigError("methods", "must name at least one estimator");
    if (!(min_separation >= 0.0))
      throw ConfigError("min_separation_m", "must be non-negative");
    if (sweep)
    {
      if (sweep->values.empty())
        throw ConfigError("sweep.values", "must be nonempty");
      for (double v : sweep->values)
        with_sweep_value(v);
    }
  }

  /// Copy of this config with the swept field set to `value`.
  ScenarioConfig with_sweep_value(double value) const
  {
    if (!sweep)
      return *this;
    ScenarioConfig c = *this;
    c.sweep.reset();
    auto as_count = [&](std::string_view field, std::size_t min) {
      if (!(value >= static_cast<double>(min)) || value != std::floor(value))
        throw ConfigError("sweep.values", "value for " + std::string(field) + " must be an integer >= " +
                                              std::to_string(min));
      return static_cast<std::size_t>(value);
    };
    auto positive = [&](std::string_view field) {
      if (!(value > 0.0))
        throw ConfigError("sweep.values", "value for " + std::string(field) + " must be positive");
      return value;
    };
    switch (sweep->param)
    {
      case SweepParam::n_anchors: c.n_anchors = as_count("n_anchors", 2); break;
      case SweepParam::t_steps: c.t_steps = as_count("t_steps", 1); break;
      case SweepParam::mu_m: c.noise.mu_m = deg2rad(positive("mu_m_deg")); break;
      case SweepParam::mu_v: c.noise.mu_v = deg2rad(positive("mu_v_deg")); break;
      case SweepParam::mu_n: c.noise.mu_n = positive("mu_n_db"); break;
    }
    return c;
  }
};

struct MethodResult
{
  Method method = Method::proposed;
  double rmse = std::numeric_limits<double>::quiet_NaN();  // m, over successful runs
  std::size_t failures = 0;
  std::size_t successes = 0;
  std::optional<double> mean_runtime_s;
};

struct SweepPoint
{
  std::optional<double> sweep_value;
  std::vector<MethodResult> methods;
  double crlb_mean = std::numeric_limits<double>::quiet_NaN();  // m
  std::size_t crlb_singular = 0;

  const MethodResult& result(Method m) const
  {
    for (const auto& r : methods)
      if (r.method == m)
        return r;
    throw std::out_of_range("method not present in report");
  }
};

struct RmseReport
{
  ScenarioConfig config;
  std::vector<SweepPoint> points;
};

/// Random state for run `run` of sweep point `point`. Independent of the method list,
/// so adding or removing estimators leaves the other numbers untouched.
inline Rng make_run_rng(std::uint64_t master_seed, std::size_t point, std::size_t run)
{
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(point), static_cast<std::uint32_t>(run)};
  return Rng(seq);
}

/// One Monte-Carlo trial: placement, profiles and series drawn in that order.
struct Trial
{
  std::vector<Point3> anchors;
  Point3 target;
  std::vector<NoiseProfile> profiles;
  MeasurementSeries series;
};

inline Trial draw_trial(const ScenarioConfig& cfg, Rng& rng)
{
  std::uniform_real_distribution<double> ux(cfg.region.lo.x(), cfg.region.hi.x());
  std::uniform_real_distribution<double> uy(cfg.region.lo.y(), cfg.region.hi.y());
  std::uniform_real_distribution<double> uz(cfg.region.lo.z(), cfg.region.hi.z());
  auto draw = [&] {
    const double x = ux(rng);
    const double y = uy(rng);
    const double z = uz(rng);
    return Point3(x, y, z);
  };

  Trial t;
  t.anchors.resize(cfg.n_anchors);
  for (;;)
  {
    for (auto& a : t.anchors)
      a = draw();
    t.target = draw();
    const bool too_close = std::any_of(t.anchors.begin(), t.anchors.end(), [&](const Point3& a) {
      return (a - t.target).norm() < std::max(cfg.min_separation, kMinSeparation) ||
             (a - t.target).head<2>().norm() < kMinSeparation;
    });
    if (!too_close)
      break;
  }
  t.profiles = sample_noise_profiles(cfg.noise, cfg.n_anchors, rng);
  t.series = generate_series(t.target, t.anchors, t.profiles, cfg.path_loss, cfg.t_steps, rng);
  return t;
}

namespace detail
{

struct RunOutcome
{
  std::vector<double> sq_error;  // NaN on failure
  std::vector<double> runtime_s;
  std::optional<double> crlb;
};

inline RunOutcome run_trial(const ScenarioConfig& cfg, std::size_t point, std::size_t run)
{
  Rng rng = make_run_rng(cfg.seed, point, run);
  const Trial trial = draw_trial(cfg, rng);

  RunOutcome out;
  out.sq_error.reserve(cfg.methods.size());
  out.runtime_s.reserve(cfg.methods.size());
  for (Method m : cfg.methods)
  {
    const auto start = std::chrono::steady_clock::now();
    const Estimate est = estimate(m, trial.series, trial.anchors, cfg.path_loss);
    const auto stop = std::chrono::steady_clock::now();
    out.runtime_s.push_back(cfg.measure_runtime ? std::chrono::duration<double>(stop - start).count() : 0.0);
    out.sq_error.push_back(est.ill_conditioned || !est.position.allFinite()
                               ? std::numeric_limits<double>::quiet_NaN()
                               : (est.position - trial.target).squaredNorm());
  }
  try
  {
    out.crlb = crlb(fim(trial.target, trial.anchors, trial.profiles, cfg.path_loss, cfg.t_steps, FimMode::hybrid));
  }
  catch (const GeometryError&)
  {
    out.crlb.reset();
  }
  return out;
}

/// Evaluates `runs` trials on a worker pool; results land in run order.
inline std::vector<RunOutcome> run_trials(const ScenarioConfig& cfg, std::size_t point)
{
  std::vector<RunOutcome> outcomes(cfg.mc_runs);
  std::size_t workers = cfg.threads != 0 ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  if (cfg.measure_runtime)
    workers = 1;
  workers = std::min(workers, cfg.mc_runs);

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t r = next++; r < cfg.mc_runs; r = next++)
      outcomes[r] = run_trial(cfg, point, r);
  };
  if (workers <= 1)
  {
    work();
    return outcomes;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back(work);
  pool.clear();
  return outcomes;
}

inline SweepPoint run_point(const ScenarioConfig& cfg, std::size_t point, std::optional<double> sweep_value)
{
  const std::vector<RunOutcome> outcomes = run_trials(cfg, point);

  SweepPoint sp;
  sp.sweep_value = sweep_value;
  for (std::size_t k = 0; k < cfg.methods.size(); ++k)
  {
    MethodResult mr;
    mr.method = cfg.methods[k];
    double sum_sq = 0.0;
    double sum_t = 0.0;
    for (const RunOutcome& o : outcomes)
    {
      sum_t += o.runtime_s[k];
      if (std::isnan(o.sq_error[k]))
      {
        ++mr.failures;
        continue;
      }
      sum_sq += o.sq_error[k];
      ++mr.successes;
    }
    if (mr.successes > 0)
      mr.rmse = std::sqrt(sum_sq / static_cast<double>(mr.successes));
    if (cfg.measure_runtime)
      mr.mean_runtime_s = sum_t / static_cast<double>(outcomes.size());
    sp.methods.push_back(mr);
  }

  double crlb_sum = 0.0;
  std::size_t crlb_n = 0;
  for (const RunOutcome& o : outcomes)
  {
    if (o.crlb)
    {
      crlb_sum += *o.crlb;
      ++crlb_n;
    }
    else
    {
      ++sp.crlb_singular;
    }
  }
  if (crlb_n > 0)
    sp.crlb_mean = crlb_sum / static_cast<double>(crlb_n);
  return sp;
}

}  // namespace detail

/// RMSE per method over `mc_runs` re-randomized trials, plus the mean hybrid CRLB.
/// A configured sweep is ignored here; see sweep_parameter.
inline RmseReport run_monte_carlo(const ScenarioConfig& config)
{
  config.validate();
  ScenarioConfig cfg = config;
  cfg.sweep.reset();
  RmseReport report{config, {}};
  report.points.push_back(detail::run_point(cfg, 0, std::nullopt));
  return report;
}

/// One Monte-Carlo batch per sweep value. Point k draws its trials from
/// (seed, k, run), so appending values never changes earlier points.
inline RmseReport sweep_parameter(const ScenarioConfig& config)
{
  config.validate();
  if (!config.sweep)
    throw ConfigError("sweep", "no sweep configured");
  RmseReport report{config, {}};
  for (std::size_t k = 0; k < config.sweep->values.size(); ++k)
  {
    const double v = config.sweep->values[k];
    report.points.push_back(detail::run_point(config.with_sweep_value(v), k, v));
  }
  return report;
}

struct RuntimeEntry
{
  Method method;
  double mean_seconds;
};

/// Mean wall-clock seconds per fix, excluding series generation. Runs single-threaded.
inline std::vector<RuntimeEntry> runtime_profile(const ScenarioConfig& config)
{
  ScenarioConfig cfg = config;
  cfg.measure_runtime = true;
  cfg.sweep.reset();
  const RmseReport report = run_monte_carlo(cfg);
  std::vector<RuntimeEntry> out;
  for (const auto& r : report.points.front().methods)
    out.push_back({r.method, r.mean_runtime_s.value_or(0.0)});
  return out;
}

}  // namespace rssaoa
