#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rssaoa
{

/// Position in meters. Used for anchors, targets and estimates alike.
using Point3 = Eigen::Vector3d;

/// Anchor/target separations below this are treated as coincident.
inline constexpr double kMinSeparation = 1e-9;

class GeometryError : public std::domain_error
{
public:
  using std::domain_error::domain_error;
};

/// Log-distance path-loss model parameters.
struct PathLossParams
{
  double p0 = -10.0;   // dB at the reference distance
  double d0 = 1.0;     // m
  double gamma = 2.7;  // path-loss exponent

  void validate() const
  {
    if (!(d0 > 0.0) || !std::isfinite(d0))
      throw std::invalid_argument("path loss: d0 must be positive");
    if (!(gamma > 0.0) || !std::isfinite(gamma))
      throw std::invalid_argument("path loss: gamma must be positive");
    if (!std::isfinite(p0))
      throw std::invalid_argument("path loss: p0 must be finite");
  }
};

/// Azimuth in (-pi, pi], elevation as the polar angle from +x3 in [0, pi].
struct Angles
{
  double azimuth = 0.0;
  double elevation = 0.0;
};

inline constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

inline bool is_finite(const Point3& p) { return p.allFinite(); }

inline double azimuth_true(const Point3& target, const Point3& anchor)
{
  const double dx = target.x() - anchor.x();
  const double dy = target.y() - anchor.y();
  if (std::hypot(dx, dy) < kMinSeparation)
    throw GeometryError("azimuth undefined: target and anchor share the same x1-x2 projection");
  return std::atan2(dy, dx);
}

inline double elevation_true(const Point3& target, const Point3& anchor)
{
  const Point3 delta = target - anchor;
  const double d = delta.norm();
  if (d < kMinSeparation)
    throw GeometryError("elevation undefined: target coincides with anchor");
  // Clamp guards against |dz/d| exceeding 1 by one ulp.
  return std::acos(std::clamp(delta.z() / d, -1.0, 1.0));
}

inline Angles angles_true(const Point3& target, const Point3& anchor)
{
  return {azimuth_true(target, anchor), elevation_true(target, anchor)};
}

/// Received power in dB for a given separation.
inline double rss_at_distance(double distance, const PathLossParams& params)
{
  if (distance < kMinSeparation)
    throw GeometryError("rss undefined: target coincides with anchor");
  return params.p0 - 10.0 * params.gamma * std::log10(distance / params.d0);
}

inline double rss_true(const Point3& target, const Point3& anchor, const PathLossParams& params)
{
  return rss_at_distance((target - anchor).norm(), params);
}

/// Inverse of the path-loss model: range implied by a received power.
inline double distance_from_rss(double rss_db, const PathLossParams& params)
{
  return params.d0 * std::pow(10.0, (params.p0 - rss_db) / (10.0 * params.gamma));
}

/// Direction from an anchor towards the target for the given spherical angles.
inline Point3 unit_vector(double azimuth, double elevation)
{
  const double s = std::sin(elevation);
  return {std::cos(azimuth) * s, std::sin(azimuth) * s, std::cos(elevation)};
}

inline Point3 unit_vector(const Angles& a) { return unit_vector(a.azimuth, a.elevation); }

}  // namespace rssaoa
