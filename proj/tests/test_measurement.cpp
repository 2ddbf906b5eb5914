#include <rssaoa/measurement.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

namespace rssaoa
{
namespace
{

const std::vector<Point3> kFourAnchors{{10, 10, 10}, {10, 30, 15}, {30, 10, 20}, {30, 30, 25}};

std::vector<NoiseProfile> four_anchor_profiles()
{
  std::vector<NoiseProfile> p(4, NoiseProfile{deg2rad(10), deg2rad(10), 2.0});
  p[0] = NoiseProfile{deg2rad(5), deg2rad(5), 1.0};
  return p;
}

TEST(SampleNoiseProfiles, VanishingMeansHitTheFloor)
{
  Rng rng(1);
  const auto profiles = sample_noise_profiles({1e-300, 1e-300, 1e-300}, 16, rng);
  for (const auto& p : profiles)
  {
    EXPECT_EQ(p.sigma_m, kSigmaFloor);
    EXPECT_EQ(p.sigma_v, kSigmaFloor);
    EXPECT_EQ(p.sigma_n, kSigmaFloor);
  }
}

TEST(SampleNoiseProfiles, SampleMeanMatchesExponentialMean)
{
  const HeteroNoiseSpec spec{deg2rad(10), deg2rad(10), 6.0};
  Rng rng(7);
  double sum = 0.0;
  std::size_t count = 0;
  while (count < 100000)
  {
    for (const auto& p : sample_noise_profiles(spec, 4, rng))
    {
      sum += p.sigma_m;
      ++count;
    }
  }
  EXPECT_NEAR(sum / static_cast<double>(count), spec.mu_m, 0.02 * spec.mu_m);
}

TEST(SampleNoiseProfiles, DeterministicForFixedSeed)
{
  const HeteroNoiseSpec spec;
  Rng a(99), b(99);
  const auto pa = sample_noise_profiles(spec, 6, a);
  const auto pb = sample_noise_profiles(spec, 6, b);
  for (std::size_t i = 0; i < pa.size(); ++i)
  {
    EXPECT_EQ(pa[i].sigma_m, pb[i].sigma_m);
    EXPECT_EQ(pa[i].sigma_v, pb[i].sigma_v);
    EXPECT_EQ(pa[i].sigma_n, pb[i].sigma_n);
  }
}

TEST(SampleNoiseProfiles, RejectsBadInput)
{
  Rng rng(1);
  EXPECT_THROW(sample_noise_profiles({}, 0, rng), std::invalid_argument);
  EXPECT_THROW(sample_noise_profiles({0.0, 1.0, 1.0}, 3, rng), std::invalid_argument);
}

TEST(GenerateSeries, FourAnchorLayoutShape)
{
  Rng rng(3);
  const auto s = generate_series({20, 20, 0}, kFourAnchors, four_anchor_profiles(), {}, 5, rng);
  EXPECT_EQ(s.anchors(), 4);
  EXPECT_EQ(s.steps(), 5);
  EXPECT_TRUE(s.is_rectangular());
}

TEST(GenerateSeries, FloorNoiseStaysNextToTruth)
{
  Rng rng(5);
  const std::vector<NoiseProfile> floor(4);
  const Point3 target(20, 20, 0);
  const auto s = generate_series(target, kFourAnchors, floor, {}, 5, rng);
  const auto clean = noiseless_series(target, kFourAnchors, {}, 5);
  // Floor sigma is 1e-6, so a 6-sigma envelope bounds every draw.
  EXPECT_LE((s.azimuth - clean.azimuth).cwiseAbs().maxCoeff(), 6 * kSigmaFloor);
  EXPECT_LE((s.elevation - clean.elevation).cwiseAbs().maxCoeff(), 6 * kSigmaFloor);
  EXPECT_LE((s.rss - clean.rss).cwiseAbs().maxCoeff(), 6 * kSigmaFloor);
}

TEST(GenerateSeries, NoiselessSeriesCarriesTrueValues)
{
  const Point3 target(17.3, 4.9, 2.2);
  const auto s = noiseless_series(target, kFourAnchors, {}, 3);
  for (Eigen::Index i = 0; i < 4; ++i)
    for (Eigen::Index t = 0; t < 3; ++t)
    {
      EXPECT_EQ(s.azimuth(i, t), azimuth_true(target, kFourAnchors[static_cast<std::size_t>(i)]));
      EXPECT_EQ(s.elevation(i, t), elevation_true(target, kFourAnchors[static_cast<std::size_t>(i)]));
      EXPECT_EQ(s.rss(i, t), rss_true(target, kFourAnchors[static_cast<std::size_t>(i)], {}));
    }
}

TEST(GenerateSeries, EmpiricalRssStdMatchesProfile)
{
  Rng rng(11);
  const std::vector<Point3> anchor{{0, 0, 0}};
  const std::vector<NoiseProfile> prof{{deg2rad(3), deg2rad(3), 2.0}};
  const Point3 target(12, -5, 3);
  const auto s = generate_series(target, anchor, prof, {}, 100000, rng);
  const Eigen::ArrayXd err = (s.rss.row(0).array() - rss_true(target, anchor[0], {})).transpose();
  const double sd = std::sqrt((err - err.mean()).square().sum() / static_cast<double>(err.size() - 1));
  EXPECT_NEAR(sd, 2.0, 0.04);
}

TEST(GenerateSeries, DeterministicForFixedSeed)
{
  Rng a(2024), b(2024);
  const auto sa = generate_series({5, 7, 1}, kFourAnchors, four_anchor_profiles(), {}, 8, a);
  const auto sb = generate_series({5, 7, 1}, kFourAnchors, four_anchor_profiles(), {}, 8, b);
  EXPECT_TRUE((sa.azimuth.array() == sb.azimuth.array()).all());
  EXPECT_TRUE((sa.elevation.array() == sb.elevation.array()).all());
  EXPECT_TRUE((sa.rss.array() == sb.rss.array()).all());
}

TEST(GenerateSeries, RejectsMismatchAndCoincidence)
{
  Rng rng(1);
  EXPECT_THROW(generate_series({1, 1, 1}, kFourAnchors, std::vector<NoiseProfile>(3), {}, 5, rng),
               std::invalid_argument);
  EXPECT_THROW(generate_series({1, 1, 1}, kFourAnchors, std::vector<NoiseProfile>(4), {}, 0, rng),
               std::invalid_argument);
  EXPECT_THROW(generate_series({10, 10, 10}, kFourAnchors, std::vector<NoiseProfile>(4), {}, 5, rng), GeometryError);
}

TEST(TimeAverage, SingleStepAndConstantSeries)
{
  Rng rng(4);
  const auto one = generate_series({3, 3, 3}, kFourAnchors, four_anchor_profiles(), {}, 1, rng);
  const auto avg = time_average(one);
  EXPECT_TRUE((avg.azimuth.array() == one.azimuth.col(0).array()).all());
  EXPECT_TRUE((avg.rss.array() == one.rss.col(0).array()).all());

  MeasurementSeries c{Eigen::MatrixXd::Constant(2, 6, 0.25), Eigen::MatrixXd::Constant(2, 6, 1.5),
                      Eigen::MatrixXd::Constant(2, 6, -40.0)};
  const auto ca = time_average(c);
  EXPECT_NEAR(ca.azimuth(1), 0.25, 1e-15);
  EXPECT_NEAR(ca.elevation(0), 1.5, 1e-15);
  EXPECT_NEAR(ca.rss(1), -40.0, 1e-13);
}

TEST(TimeAverage, MatchesNaiveSum)
{
  Rng rng(8);
  const auto s = generate_series({25, 2, 7}, kFourAnchors, four_anchor_profiles(), {}, 37, rng);
  const auto avg = time_average(s);
  for (Eigen::Index i = 0; i < s.anchors(); ++i)
  {
    double a = 0, e = 0, p = 0;
    for (Eigen::Index t = 0; t < s.steps(); ++t)
    {
      a += s.azimuth(i, t);
      e += s.elevation(i, t);
      p += s.rss(i, t);
    }
    EXPECT_NEAR(avg.azimuth(i), a / 37.0, 1e-12);
    EXPECT_NEAR(avg.elevation(i), e / 37.0, 1e-12);
    EXPECT_NEAR(avg.rss(i), p / 37.0, 1e-12);
  }
}

TEST(TimeAverage, RejectsEmptySeries)
{
  EXPECT_THROW(time_average(MeasurementSeries{}), std::invalid_argument);
}

// Averaging T samples divides the noise variance by T.
TEST(TimeAverage, VarianceShrinksAsOneOverT)
{
  constexpr int kReps = 100000;
  constexpr std::size_t kT = 5;
  const std::vector<Point3> anchor{{0, 0, 0}};
  const std::vector<NoiseProfile> prof{{0.1, 0.05, 2.0}};
  const Point3 target(10, 4, 2);
  const double az0 = azimuth_true(target, anchor[0]);
  const double el0 = elevation_true(target, anchor[0]);
  const double p0 = rss_true(target, anchor[0], {});

  Rng rng(17);
  double s_az = 0, s_el = 0, s_p = 0;
  for (int r = 0; r < kReps; ++r)
  {
    const auto avg = time_average(generate_series(target, anchor, prof, {}, kT, rng));
    s_az += std::pow(avg.azimuth(0) - az0, 2);
    s_el += std::pow(avg.elevation(0) - el0, 2);
    s_p += std::pow(avg.rss(0) - p0, 2);
  }
  EXPECT_NEAR(s_az / kReps, 0.01 / kT, 0.05 * 0.01 / kT);
  EXPECT_NEAR(s_el / kReps, 0.0025 / kT, 0.05 * 0.0025 / kT);
  EXPECT_NEAR(s_p / kReps, 4.0 / kT, 0.05 * 4.0 / kT);
}

}  // namespace
}  // namespace rssaoa
