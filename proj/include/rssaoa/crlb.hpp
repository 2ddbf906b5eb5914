#pragma once

#include "estimators.hpp"
#include "geometry.hpp"
#include "measurement.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rssaoa
{

/// 3x3 Fisher information about the target position, 1/m^2.
using FisherMatrix = Eigen::Matrix3d;

enum class FimMode
{
  rss_only,
  aoa_only,
  hybrid
};

inline std::string_view to_string(FimMode mode)
{
  switch (mode)
  {
    case FimMode::rss_only: return "rss_only";
    case FimMode::aoa_only: return "aoa_only";
    case FimMode::hybrid: return "hybrid";
  }
  return "unknown";
}

inline FimMode parse_fim_mode(std::string_view name)
{
  if (name == "rss_only" || name == "rss")
    return FimMode::rss_only;
  if (name == "aoa_only" || name == "aoa")
    return FimMode::aoa_only;
  if (name == "hybrid" || name == "rss_aoa")
    return FimMode::hybrid;
  throw std::invalid_argument("unknown CRLB mode '" + std::string(name) + "' (expected rss_only, aoa_only or hybrid)");
}

/// (10 gamma / (sigma_n ln 10))^2, the information per RSS sample about log-range.
inline double rss_information(double sigma_n, const PathLossParams& params)
{
  const double g = 10.0 * params.gamma / (sigma_n * std::numbers::ln10);
  return g * g;
}

/// Fisher information of T independent samples per anchor.
///
/// Each channel contributes T * grad(h) grad(h)^T / sigma^2 where h is the noise-free
/// azimuth, elevation or power. Written out per entry, with dx, dy, dz the components of
/// x - a, d2 the planar and d the full distance:
///   azimuth:   [11] dy^2/d2^4, [22] dx^2/d2^4, [12] -dx dy/d2^4
///   elevation: [11] dx^2 dz^2/(d2^2 d^4), [12] dx dy dz^2/(d2^2 d^4), [33] d2^2/d^4,
///              [13] -dx dz/d^4, [23] -dy dz/d^4
///   rss:       eta * dj dk / d^4 for every entry (positive)
inline FisherMatrix fim(const Point3& target, std::span<const Point3> anchors, std::span<const NoiseProfile> profiles,
                        const PathLossParams& params, std::size_t t_steps, FimMode mode = FimMode::hybrid)
{
  if (anchors.size() != profiles.size())
    throw std::invalid_argument("fim: anchors and profiles differ in length");

  const bool use_rss = mode != FimMode::aoa_only;
  const bool use_aoa = mode != FimMode::rss_only;

  FisherMatrix f = FisherMatrix::Zero();
  for (std::size_t i = 0; i < anchors.size(); ++i)
  {
    const Point3 delta = target - anchors[i];
    const double d_sq = delta.squaredNorm();
    if (std::sqrt(d_sq) < kMinSeparation)
      throw GeometryError("fim: target coincides with an anchor");
    const NoiseProfile& p = profiles[i];

    if (use_rss)
    {
      const double eta = rss_information(p.sigma_n, params);
      f += (eta / (d_sq * d_sq)) * delta * delta.transpose();
    }
    if (use_aoa)
    {
      const double h_sq = delta.x() * delta.x() + delta.y() * delta.y();
      const double h = std::sqrt(h_sq);
      if (h < kMinSeparation)
        throw GeometryError("fim: zero planar distance, azimuth information undefined");

      const Point3 grad_az(-delta.y() / h_sq, delta.x() / h_sq, 0.0);
      const Point3 grad_el(delta.x() * delta.z() / (d_sq * h), delta.y() * delta.z() / (d_sq * h), -h / d_sq);
      f += grad_az * grad_az.transpose() / (p.sigma_m * p.sigma_m);
      f += grad_el * grad_el.transpose() / (p.sigma_v * p.sigma_v);
    }
  }
  return static_cast<double>(t_steps) * f;
}

/// sqrt(trace(F^-1)), or nullopt when F is singular (condition number above 1e12).
inline std::optional<double> crlb(const FisherMatrix& f)
{
  if (!f.allFinite())
    return std::nullopt;
  const Eigen::SelfAdjointEigenSolver<FisherMatrix> eig(f, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success)
    return std::nullopt;
  const Eigen::Vector3d lambda = eig.eigenvalues();  // ascending
  if (!(lambda(0) > 0.0) || lambda(2) / lambda(0) > kMaxConditionNumber)
    return std::nullopt;
  return std::sqrt(lambda.cwiseInverse().sum());
}

/// Axis-aligned grid in the x1-x2 plane at fixed height.
struct GridSpec
{
  double x1_min = 1.0;
  double x1_max = 40.0;
  double x2_min = 1.0;
  double x2_max = 40.0;
  double step = 0.5;
  double x3 = 0.0;

  void validate() const
  {
    if (!(step > 0.0))
      throw std::invalid_argument("grid: step must be positive");
    if (!(x1_max >= x1_min) || !(x2_max >= x2_min))
      throw std::invalid_argument("grid: max must not be below min");
  }

  static std::vector<double> axis(double lo, double hi, double step)
  {
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> v(count);
    for (std::size_t k = 0; k < count; ++k)
      v[k] = lo + static_cast<double>(k) * step;
    return v;
  }
};

struct CrlbGrid
{
  std::vector<double> x1;
  std::vector<double> x2;
  Eigen::MatrixXd values;  // (x1 index, x2 index); NaN where masked
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> masked;
  FimMode mode = FimMode::hybrid;
  double x3 = 0.0;

  std::size_t masked_count() const { return static_cast<std::size_t>(masked.count()); }

  struct Minimum
  {
    double x1, x2, value;
  };

  /// Smallest unmasked value, first in grid order on ties.
  std::optional<Minimum> minimum() const
  {
    std::optional<Minimum> best;
    for (Eigen::Index i = 0; i < values.rows(); ++i)
      for (Eigen::Index j = 0; j < values.cols(); ++j)
        if (!masked(i, j) && (!best || values(i, j) < best->value))
          best = Minimum{x1[static_cast<std::size_t>(i)], x2[static_cast<std::size_t>(j)], values(i, j)};
    return best;
  }
};

/// CRLB on every grid point. Points with an undefined or singular FIM are masked.
inline CrlbGrid crlb_heatmap(std::span<const Point3> anchors, std::span<const NoiseProfile> profiles,
                             const PathLossParams& params, std::size_t t_steps, const GridSpec& grid, FimMode mode)
{
  grid.validate();
  CrlbGrid out;
  out.x1 = GridSpec::axis(grid.x1_min, grid.x1_max, grid.step);
  out.x2 = GridSpec::axis(grid.x2_min, grid.x2_max, grid.step);
  out.mode = mode;
  out.x3 = grid.x3;

  const auto n1 = static_cast<Eigen::Index>(out.x1.size());
  const auto n2 = static_cast<Eigen::Index>(out.x2.size());
  out.values.setConstant(n1, n2, std::numeric_limits<double>::quiet_NaN());
  out.masked.setConstant(n1, n2, true);

  for (Eigen::Index i = 0; i < n1; ++i)
  {
    for (Eigen::Index j = 0; j < n2; ++j)
    {
      const Point3 target(out.x1[static_cast<std::size_t>(i)], out.x2[static_cast<std::size_t>(j)], grid.x3);
      std::optional<double> bound;
      try
      {
        bound = crlb(fim(target, anchors, profiles, params, t_steps, mode));
      }
      catch (const GeometryError&)
      {
        bound.reset();
      }
      if (bound)
      {
        out.values(i, j) = *bound;
        out.masked(i, j) = false;
      }
    }
  }
  return out;
}

}  // namespace rssaoa
