#pragma once

#include "geometry.hpp"

#include <Eigen/Dense>

#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace rssaoa
{

/// Random source used throughout. One engine per scenario run.
using Rng = std::mt19937_64;

/// Lower bound applied to every sampled standard deviation (rad or dB).
inline constexpr double kSigmaFloor = 1e-6;

/// Per-anchor noise standard deviations.
struct NoiseProfile
{
  double sigma_m = kSigmaFloor;  // azimuth, rad
  double sigma_v = kSigmaFloor;  // elevation, rad
  double sigma_n = kSigmaFloor;  // rss, dB
};

/// Means of the exponential distributions the per-anchor sigmas are drawn from.
struct HeteroNoiseSpec
{
  double mu_m = deg2rad(10.0);  // rad
  double mu_v = deg2rad(10.0);  // rad
  double mu_n = 6.0;            // dB

  void validate() const
  {
    if (!(mu_m > 0.0) || !(mu_v > 0.0) || !(mu_n > 0.0))
      throw std::invalid_argument("noise spec: all means must be positive");
  }
};

/// Time series of readings, one row per anchor and one column per time step.
struct MeasurementSeries
{
  Eigen::MatrixXd azimuth;    // rad, stored unwrapped
  Eigen::MatrixXd elevation;  // rad
  Eigen::MatrixXd rss;        // dB

  Eigen::Index anchors() const { return azimuth.rows(); }
  Eigen::Index steps() const { return azimuth.cols(); }

  bool is_rectangular() const
  {
    return azimuth.cols() >= 1 && elevation.rows() == azimuth.rows() && rss.rows() == azimuth.rows() &&
           elevation.cols() == azimuth.cols() && rss.cols() == azimuth.cols();
  }
};

/// Per-anchor time means of each channel.
struct AveragedMeasurements
{
  Eigen::VectorXd azimuth;
  Eigen::VectorXd elevation;
  Eigen::VectorXd rss;

  Eigen::Index anchors() const { return azimuth.size(); }
};

/// Draws one profile per anchor. Consumption order is anchor-major: sigma_m, sigma_v, sigma_n.
inline std::vector<NoiseProfile> sample_noise_profiles(const HeteroNoiseSpec& spec, std::size_t n_anchors, Rng& rng)
{
  spec.validate();
  if (n_anchors == 0)
    throw std::invalid_argument("sample_noise_profiles: need at least one anchor");

  std::exponential_distribution<double> exp_m(1.0 / spec.mu_m);
  std::exponential_distribution<double> exp_v(1.0 / spec.mu_v);
  std::exponential_distribution<double> exp_n(1.0 / spec.mu_n);

  std::vector<NoiseProfile> out(n_anchors);
  for (auto& p : out)
  {
    p.sigma_m = std::max(exp_m(rng), kSigmaFloor);
    p.sigma_v = std::max(exp_v(rng), kSigmaFloor);
    p.sigma_n = std::max(exp_n(rng), kSigmaFloor);
  }
  return out;
}

/// Noise-free series: every time step carries the true angles and power.
inline MeasurementSeries noiseless_series(const Point3& target, std::span<const Point3> anchors,
                                          const PathLossParams& params, std::size_t t_steps)
{
  if (t_steps == 0)
    throw std::invalid_argument("series: t_steps must be at least 1");
  const auto n = static_cast<Eigen::Index>(anchors.size());
  const auto t = static_cast<Eigen::Index>(t_steps);
  MeasurementSeries s{Eigen::MatrixXd(n, t), Eigen::MatrixXd(n, t), Eigen::MatrixXd(n, t)};
  for (Eigen::Index i = 0; i < n; ++i)
  {
    const Point3& a = anchors[static_cast<std::size_t>(i)];
    s.azimuth.row(i).setConstant(azimuth_true(target, a));
    s.elevation.row(i).setConstant(elevation_true(target, a));
    s.rss.row(i).setConstant(rss_true(target, a, params));
  }
  return s;
}

/// Noisy series. Noise is drawn anchor-major, time-minor, and within one (anchor, step)
/// in the order azimuth, elevation, rss.
inline MeasurementSeries generate_series(const Point3& target, std::span<const Point3> anchors,
                                         std::span<const NoiseProfile> profiles, const PathLossParams& params,
                                         std::size_t t_steps, Rng& rng)
{
  if (anchors.size() != profiles.size())
    throw std::invalid_argument("generate_series: anchors and profiles differ in length");

  MeasurementSeries s = noiseless_series(target, anchors, params, t_steps);
  std::normal_distribution<double> unit(0.0, 1.0);
  for (Eigen::Index i = 0; i < s.anchors(); ++i)
  {
    const NoiseProfile& p = profiles[static_cast<std::size_t>(i)];
    for (Eigen::Index t = 0; t < s.steps(); ++t)
    {
      s.azimuth(i, t) += p.sigma_m * unit(rng);
      s.elevation(i, t) += p.sigma_v * unit(rng);
      s.rss(i, t) += p.sigma_n * unit(rng);
    }
  }
  return s;
}

/// Arithmetic mean over time. Azimuth is averaged without wrap handling.
inline AveragedMeasurements time_average(const MeasurementSeries& series)
{
  if (!series.is_rectangular())
    throw std::invalid_argument("time_average: series must be rectangular with T >= 1");
  return {series.azimuth.rowwise().mean(), series.elevation.rowwise().mean(), series.rss.rowwise().mean()};
}

}  // namespace rssaoa
