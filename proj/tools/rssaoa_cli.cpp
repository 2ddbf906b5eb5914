// Command-line front end: simulate, estimate, sweep, crlb-map and bench.
//
// Exit codes: 0 success, 1 I/O or runtime failure, 2 configuration error,
// 3 malformed series CSV.

#include <rssaoa/rssaoa.hpp>

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace
{

using namespace rssaoa;

enum ExitCode : int
{
  kOk = 0,
  kRuntimeError = 1,
  kConfigError = 2,
  kCsvError = 3,
};

struct Options
{
  std::string config;
  std::string out;
  std::string series;
  std::string method = "proposed";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> mc;
  int verbosity = 0;
};

std::ofstream open_output(const std::string& path)
{
  const std::filesystem::path p(path);
  if (p.has_parent_path())
    std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot open output file '" + path + "'");
  return out;
}

std::string sibling(const std::string& path, const std::string& suffix, const std::string& ext)
{
  std::filesystem::path p(path);
  const std::string stem = p.stem().string();
  p.replace_filename(stem + suffix + ext);
  return p.string();
}

ScenarioConfig load_scenario(const Options& opt)
{
  ScenarioConfig cfg = parse_scenario_config(load_json_file(opt.config));
  if (opt.seed)
    cfg.seed = *opt.seed;
  if (opt.mc)
  {
    if (*opt.mc < 1)
      throw ConfigError("mc_runs", "--mc must be at least 1");
    cfg.mc_runs = *opt.mc;
  }
  return cfg;
}

LayoutConfig load_layout(const Options& opt)
{
  LayoutConfig cfg = parse_layout_config(load_json_file(opt.config));
  if (opt.seed)
    cfg.seed = *opt.seed;
  return cfg;
}

int run_simulate(const Options& opt)
{
  const LayoutConfig cfg = load_layout(opt);
  if (!cfg.target)
    throw ConfigError("target", "missing; simulate needs a target position");
  Rng rng(cfg.seed);
  std::vector<NoiseProfile> profiles = cfg.profiles;
  if (profiles.empty())
  {
    if (!cfg.noise && !cfg.noise_free)
      throw ConfigError("profiles", "missing; give per-anchor profiles, a noise spec, or noise_free");
    if (cfg.noise)
      profiles = sample_noise_profiles(*cfg.noise, cfg.anchors.size(), rng);
  }
  const MeasurementSeries series = cfg.noise_free
                                       ? noiseless_series(*cfg.target, cfg.anchors, cfg.path_loss, cfg.t_steps)
                                       : generate_series(*cfg.target, cfg.anchors, profiles, cfg.path_loss,
                                                         cfg.t_steps, rng);
  auto out = open_output(opt.out);
  write_series_csv(out, series);
  if (opt.verbosity > 0)
    std::cerr << "wrote " << series.anchors() * series.steps() << " rows to " << opt.out << '\n';
  return kOk;
}

int run_estimate(const Options& opt)
{
  const LayoutConfig cfg = load_layout(opt);
  Method method;
  try
  {
    method = parse_method(opt.method);
  }
  catch (const std::invalid_argument& e)
  {
    throw ConfigError("method", e.what());
  }

  std::ifstream in(opt.series);
  if (!in)
    throw std::runtime_error("cannot open series file '" + opt.series + "'");
  const MeasurementSeries series = read_series_csv(in);
  if (static_cast<std::size_t>(series.anchors()) != cfg.anchors.size())
    throw ConfigError("anchors", "series has " + std::to_string(series.anchors()) + " anchors, config lists " +
                                     std::to_string(cfg.anchors.size()));

  const Estimate est = estimate(method, series, cfg.anchors, cfg.path_loss);
  const char* stage = est.stage == Stage::stage1 ? "stage1" : est.stage == Stage::stage2 ? "stage2" : "baseline";

  json j{{"method", std::string(to_string(method))},
         {"stage", stage},
         {"ill_conditioned", est.ill_conditioned},
         {"condition_number", std::isfinite(est.condition_number) ? json(est.condition_number) : json(nullptr)}};
  j["position"] = est.position.allFinite() ? json{est.position.x(), est.position.y(), est.position.z()} : json(nullptr);
  if (cfg.target && est.position.allFinite())
    j["error_m"] = (est.position - *cfg.target).norm();

  char line[160];
  std::snprintf(line, sizeof(line), "%s: x = (%.6f, %.6f, %.6f) stage=%s ill_conditioned=%s", to_string(method).data(),
                est.position.x(), est.position.y(), est.position.z(), stage, est.ill_conditioned ? "true" : "false");
  std::cout << line << '\n';
  if (!opt.out.empty())
  {
    auto out = open_output(opt.out);
    out << j.dump(2) << '\n';
  }
  else
  {
    std::cout << j.dump() << '\n';
  }
  return kOk;
}

int run_sweep(const Options& opt)
{
  const ScenarioConfig cfg = load_scenario(opt);
  const RmseReport report = cfg.sweep ? sweep_parameter(cfg) : run_monte_carlo(cfg);
  {
    auto out = open_output(opt.out);
    write_report_csv(out, report);
  }
  {
    auto out = open_output(sibling(opt.out, "", ".json"));
    out << to_json(report).dump(2) << '\n';
  }
  if (opt.verbosity > 0)
    write_report_csv(std::cerr, report);
  return kOk;
}

int run_crlb_map(const Options& opt)
{
  const LayoutConfig cfg = load_layout(opt);
  if (cfg.profiles.empty())
    throw ConfigError("profiles", "missing; crlb-map needs per-anchor noise profiles");
  for (FimMode mode : cfg.modes)
  {
    const CrlbGrid grid = crlb_heatmap(cfg.anchors, cfg.profiles, cfg.path_loss, cfg.t_steps, cfg.grid, mode);
    const std::string suffix = cfg.modes.size() > 1 ? "_" + std::string(to_string(mode)) : std::string();
    const std::string csv_path = cfg.modes.size() > 1 ? sibling(opt.out, suffix, ".csv") : opt.out;
    {
      auto out = open_output(csv_path);
      write_grid_csv(out, grid);
    }
    {
      auto out = open_output(sibling(opt.out, suffix, ".matrix.txt"));
      write_grid_matrix(out, grid);
    }
    const auto m = grid.minimum();
    std::cout << to_string(mode) << ": " << grid.masked_count() << " singular points";
    if (m)
      std::cout << ", minimum " << m->value << " m at (" << m->x1 << ", " << m->x2 << ")";
    std::cout << '\n';
  }
  return kOk;
}

int run_bench(const Options& opt)
{
  ScenarioConfig cfg = load_scenario(opt);
  cfg.measure_runtime = true;
  const RmseReport report = cfg.sweep ? sweep_parameter(cfg) : run_monte_carlo(cfg);
  auto out = open_output(opt.out);
  write_runtime_csv(out, report);
  if (opt.verbosity > 0)
    write_runtime_csv(std::cerr, report);
  return kOk;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"RSS-AOA localization toolkit: simulation, estimation, Monte-Carlo sweeps and CRLB maps"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub, bool needs_out) {
    sub->add_option("--config", opt.config, "JSON configuration file")->required()->check(CLI::ExistingFile);
    auto* out = sub->add_option("--out", opt.out, "output path");
    if (needs_out)
      out->required();
    sub->add_option("--seed", opt.seed, "override the configured seed");
    sub->add_flag("-v,--verbose", opt.verbosity, "verbose output");
  };

  auto* simulate = app.add_subcommand("simulate", "generate a measurement series CSV");
  add_common(simulate, true);

  auto* est = app.add_subcommand("estimate", "estimate a position from a series CSV");
  add_common(est, false);
  est->add_option("--series", opt.series, "series CSV")->required();
  est->add_option("--method", opt.method, "proposed, ls or wls-d")->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "Monte-Carlo RMSE report (CSV plus JSON)");
  add_common(sweep, true);
  sweep->add_option("--mc", opt.mc, "override the number of Monte-Carlo runs");

  auto* map = app.add_subcommand("crlb-map", "CRLB heatmap over a grid");
  add_common(map, true);

  auto* bench = app.add_subcommand("bench", "mean runtime per fix");
  add_common(bench, true);
  bench->add_option("--mc", opt.mc, "override the number of Monte-Carlo runs");

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError& e)
  {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try
  {
    if (*simulate)
      return run_simulate(opt);
    if (*est)
      return run_estimate(opt);
    if (*sweep)
      return run_sweep(opt);
    if (*map)
      return run_crlb_map(opt);
    if (*bench)
      return run_bench(opt);
  }
  catch (const ConfigError& e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
  catch (const CsvError& e)
  {
    std::cerr << "error: malformed series CSV, " << e.what() << '\n';
    return kCsvError;
  }
  catch (const std::exception& e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kRuntimeError;
}
