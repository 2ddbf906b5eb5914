#include <rssaoa/config.hpp>
#include <rssaoa/csv.hpp>

#include <gtest/gtest.h>

#include <optional>
#include <sstream>
#include <string>

namespace rssaoa
{
namespace
{

const std::vector<Point3> kFourAnchors{{10, 10, 10}, {10, 30, 15}, {30, 10, 20}, {30, 30, 25}};

std::optional<std::size_t> csv_error_row(const std::string& text)
{
  std::istringstream is(text);
  try
  {
    read_series_csv(is);
  }
  catch (const CsvError& e)
  {
    return e.row();
  }
  return std::nullopt;
}

std::string config_error_field(const std::string& text, bool layout = false)
{
  try
  {
    const json j = json::parse(text);
    if (layout)
      parse_layout_config(j);
    else
      parse_scenario_config(j);
  }
  catch (const ConfigError& e)
  {
    return e.field();
  }
  return "<none>";
}

TEST(SeriesCsv, RoundTripIsExact)
{
  Rng rng(77);
  const std::vector<NoiseProfile> prof(4, NoiseProfile{0.1, 0.1, 3.0});
  const auto s = generate_series({12.5, 31.25, 3}, kFourAnchors, prof, {}, 5, rng);
  std::ostringstream os;
  write_series_csv(os, s);
  std::istringstream is(os.str());
  const auto back = read_series_csv(is);
  EXPECT_TRUE((back.azimuth.array() == s.azimuth.array()).all());
  EXPECT_TRUE((back.elevation.array() == s.elevation.array()).all());
  EXPECT_TRUE((back.rss.array() == s.rss.array()).all());
}

TEST(SeriesCsv, LayoutIsAnchorMajorWithHeader)
{
  const auto s = noiseless_series({20, 20, 0}, kFourAnchors, {}, 5);
  std::ostringstream os;
  write_series_csv(os, s);
  std::istringstream lines(os.str());
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, kSeriesHeader);
  std::size_t rows = 0;
  while (std::getline(lines, line))
  {
    EXPECT_EQ(line.substr(0, line.find(',', line.find(',') + 1)),
              std::to_string(rows / 5) + "," + std::to_string(rows % 5));
    ++rows;
  }
  EXPECT_EQ(rows, 20u);
}

TEST(SeriesCsv, AcceptsShuffledRowsWithoutHeader)
{
  std::istringstream is("1,0,0.5,1.0,-40\n0,1,0.3,1.1,-41\n0,0,0.2,1.2,-42\n1,1,0.6,1.3,-43\n");
  const auto s = read_series_csv(is);
  ASSERT_EQ(s.anchors(), 2);
  ASSERT_EQ(s.steps(), 2);
  EXPECT_EQ(s.azimuth(0, 0), 0.2);
  EXPECT_EQ(s.rss(1, 1), -43.0);
}

TEST(SeriesCsv, MalformedRowsReportTheirLineNumber)
{
  const std::string head = std::string(kSeriesHeader) + "\n0,0,0.1,1.0,-40\n";
  EXPECT_EQ(csv_error_row(head + "0,1,0.1,1.0\n"), 3u);
  EXPECT_EQ(csv_error_row(head + "0,1,abc,1.0,-40\n"), 3u);
  EXPECT_EQ(csv_error_row(head + "0,1,0.1,1.0,-40\n-1,0,0.1,1.0,-40\n"), 4u);
  EXPECT_EQ(csv_error_row(head + "0,1,0.1,1.0,nan\n"), 3u);
  EXPECT_EQ(csv_error_row(head + "0,0,0.1,1.0,-40\n"), 3u);
  EXPECT_EQ(csv_error_row("x,y\n"), 1u);
  // Two anchors by two steps needs four rows.
  EXPECT_TRUE(csv_error_row(head + "1,1,0.1,1.0,-40\n").has_value());
  EXPECT_FALSE(csv_error_row(head + "1,0,0.1,1.0,-40\n").has_value());
  EXPECT_TRUE(csv_error_row("").has_value());
}

TEST(GridCsv, MaskedPointsAreNanAndFlagged)
{
  CrlbGrid g;
  g.x1 = {0.0, 1.0};
  g.x2 = {5.0};
  g.values = Eigen::MatrixXd(2, 1);
  g.values << 1.5, std::numeric_limits<double>::quiet_NaN();
  g.masked = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>(2, 1);
  g.masked << false, true;
  std::ostringstream csv, mat;
  write_grid_csv(csv, g);
  write_grid_matrix(mat, g);
  EXPECT_EQ(csv.str(), "x1,x2,crlb,masked\n0,5,1.5,0\n1,5,nan,1\n");
  EXPECT_EQ(mat.str(), "1.5 nan\n");
}

TEST(ScenarioJson, ParsesUnitsAndSweep)
{
  const auto c = parse_scenario_config(json::parse(R"({
    "n_anchors": 7, "t_steps": 4, "mc_runs": 20, "seed": 9,
    "noise": {"mu_m_deg": 6, "mu_v_deg": 5, "mu_n_db": 4},
    "path_loss": {"p0_db": -12, "d0_m": 1, "gamma": 3},
    "region": {"min": [0, 0, 0], "max": [50, 50, 10]},
    "methods": ["proposed", "ls"],
    "sweep": {"param": "n_anchors", "values": [4, 6]}
  })"));
  EXPECT_EQ(c.n_anchors, 7u);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_DOUBLE_EQ(c.noise.mu_m, deg2rad(6));
  EXPECT_DOUBLE_EQ(c.noise.mu_n, 4.0);
  EXPECT_DOUBLE_EQ(c.path_loss.gamma, 3.0);
  EXPECT_DOUBLE_EQ(c.region.hi.z(), 10.0);
  ASSERT_EQ(c.methods.size(), 2u);
  EXPECT_EQ(c.methods[1], Method::ls);
  ASSERT_TRUE(c.sweep);
  EXPECT_EQ(c.sweep->param, SweepParam::n_anchors);
}

TEST(ScenarioJson, EmptyObjectUsesDefaults)
{
  const auto c = parse_scenario_config(json::object());
  EXPECT_EQ(c.n_anchors, 5u);
  EXPECT_EQ(c.mc_runs, 500u);
  EXPECT_EQ(c.methods.size(), 3u);
}

TEST(ScenarioJson, ErrorsNameTheOffendingField)
{
  EXPECT_EQ(config_error_field(R"([1, 2])"), "<root>");
  EXPECT_EQ(config_error_field(R"({"n_anchors": -3})"), "n_anchors");
  EXPECT_EQ(config_error_field(R"({"n_anchors": 1})"), "n_anchors");
  EXPECT_EQ(config_error_field(R"({"t_steps": "five"})"), "t_steps");
  EXPECT_EQ(config_error_field(R"({"noise": {"mu_m_deg": 0}})"), "noise.mu_m_deg");
  EXPECT_EQ(config_error_field(R"({"path_loss": {"gamma": -1}})"), "path_loss.gamma");
  EXPECT_EQ(config_error_field(R"({"region": {"min": [0, 0]}})"), "region.min");
  EXPECT_EQ(config_error_field(R"({"region": {"min": [0, 0, 0]}})"), "region.max");
  EXPECT_EQ(config_error_field(R"({"methods": ["proposed", "magic"]})"), "methods[1]");
  EXPECT_EQ(config_error_field(R"({"sweep": {"param": "colour", "values": [1]}})"), "sweep.param");
  EXPECT_EQ(config_error_field(R"({"sweep": {"param": "t_steps", "values": [0]}})"), "sweep.values");
  EXPECT_EQ(config_error_field(R"({"measure_runtime": 1})"), "measure_runtime");
}

TEST(LayoutJson, ParsesProfilesInDegrees)
{
  const auto c = parse_layout_config(json::parse(R"({
    "anchors": [[10, 10, 10], [10, 30, 15]],
    "target": [20, 20, 0],
    "profiles": [{"sigma_m_deg": 5, "sigma_v_deg": 5, "sigma_n_db": 1},
                 {"sigma_m_deg": 10, "sigma_v_deg": 10, "sigma_n_db": 2}],
    "modes": ["rss", "aoa", "hybrid"],
    "grid": {"step": 1}
  })"));
  ASSERT_EQ(c.anchors.size(), 2u);
  ASSERT_TRUE(c.target);
  EXPECT_DOUBLE_EQ(c.profiles[1].sigma_m, deg2rad(10));
  EXPECT_DOUBLE_EQ(c.profiles[0].sigma_n, 1.0);
  EXPECT_EQ(c.modes.size(), 3u);
  EXPECT_DOUBLE_EQ(c.grid.step, 1.0);
}

TEST(LayoutJson, ErrorsNameTheOffendingField)
{
  EXPECT_EQ(config_error_field(R"({})", true), "anchors");
  EXPECT_EQ(config_error_field(R"({"anchors": [[1, 2, 3], [1, 2]]})", true), "anchors[1]");
  EXPECT_EQ(config_error_field(R"({"anchors": [[1, 2, 3]], "target": "here"})", true), "target");
  EXPECT_EQ(config_error_field(R"({"anchors": [[1, 2, 3]], "profiles": []})", true), "profiles");
  EXPECT_EQ(config_error_field(
                R"({"anchors": [[1, 2, 3]], "profiles": [{"sigma_m_deg": 1, "sigma_v_deg": -1, "sigma_n_db": 1}]})",
                true),
            "profiles[0].sigma_v_deg");
  EXPECT_EQ(config_error_field(R"({"anchors": [[1, 2, 3]], "grid": {"step": 0}})", true), "grid.step");
  EXPECT_EQ(config_error_field(R"({"anchors": [[1, 2, 3]], "modes": ["sonar"]})", true), "modes[0]");
}

TEST(ReportJson, CarriesConfigAndPoints)
{
  ScenarioConfig c;
  RmseReport r{c, {}};
  SweepPoint p;
  p.crlb_mean = 0.25;
  p.methods.push_back({Method::ls, 1.5, 2, 98, std::nullopt});
  r.points.push_back(p);
  const json j = to_json(r);
  EXPECT_EQ(j["config"]["n_anchors"], 5);
  EXPECT_EQ(j["points"][0]["methods"][0]["method"], "ls");
  EXPECT_EQ(j["points"][0]["methods"][0]["failures"], 2);
  EXPECT_TRUE(j["points"][0]["methods"][0]["runtime_s"].is_null());
  EXPECT_TRUE(j["points"][0]["sweep_value"].is_null());
  // Round trip: the embedded config is itself a valid scenario config.
  EXPECT_EQ(parse_scenario_config(j["config"]).n_anchors, 5u);
}

}  // namespace
}  // namespace rssaoa
