#pragma once

#include "geometry.hpp"
#include "measurement.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rssaoa
{

/// Normal-matrix condition numbers above this are treated as singular.
inline constexpr double kMaxConditionNumber = 1e12;

/// Lower bound on estimated residual variances (squared units of each row family).
inline constexpr double kVarianceFloor = 1e-10;

/// Stacked linearized equations W (A x - b) ~ 0.
///
/// Rows 0..N-1 are the azimuth equations, N..2N-1 the elevation equations and
/// 2N..3N-1 the RSS equations, each block in anchor order.
struct LinearSystem
{
  Eigen::MatrixX3d design;
  Eigen::VectorXd rhs;
  Eigen::VectorXd weights;

  Eigen::Index anchors() const { return design.rows() / 3; }

  /// A^T W^2 A
  Eigen::Matrix3d normal_matrix() const
  {
    const Eigen::MatrixX3d wa = weights.asDiagonal() * design;
    return wa.transpose() * wa;
  }
};

enum class Stage
{
  stage1,
  stage2,
  baseline
};

struct Estimate
{
  Point3 position = Point3::Constant(std::numeric_limits<double>::quiet_NaN());
  Stage stage = Stage::baseline;
  bool ill_conditioned = false;
  double condition_number = std::numeric_limits<double>::infinity();
};

/// Per-(anchor, time step) residuals of the three equation families.
struct Residuals
{
  Eigen::MatrixXd azimuth;
  Eigen::MatrixXd elevation;
  Eigen::MatrixXd rss;
};

struct ResidualStats
{
  Eigen::VectorXd var_azimuth;
  Eigen::VectorXd var_elevation;
  Eigen::VectorXd var_rss;
};

/// beta = d0 * 10^(P0 / (10 gamma))
inline double rss_offset(const PathLossParams& params)
{
  return params.d0 * std::pow(10.0, params.p0 / (10.0 * params.gamma));
}

/// lambda = 10^(P / (10 gamma))
inline double rss_scale(double rss_db, const PathLossParams& params)
{
  return std::pow(10.0, rss_db / (10.0 * params.gamma));
}

inline LinearSystem build_linear_system(const AveragedMeasurements& avg, std::span<const Point3> anchors,
                                        const PathLossParams& params, const Eigen::VectorXd& weights)
{
  const Eigen::Index n = avg.anchors();
  if (static_cast<std::size_t>(n) != anchors.size())
    throw std::invalid_argument("build_linear_system: measurement and anchor counts differ");
  if (weights.size() != 3 * n)
    throw std::invalid_argument("build_linear_system: expected 3N weights");

  const Point3 k = Point3::UnitZ();
  const double beta = rss_offset(params);

  LinearSystem sys{Eigen::MatrixX3d(3 * n, 3), Eigen::VectorXd(3 * n), weights};
  for (Eigen::Index i = 0; i < n; ++i)
  {
    const Point3& a = anchors[static_cast<std::size_t>(i)];
    const double phi = avg.azimuth(i);
    const double alpha = avg.elevation(i);
    const Point3 u = unit_vector(phi, alpha);
    const Point3 c(-std::sin(phi), std::cos(phi), 0.0);
    const Point3 e = std::cos(alpha) * u - k;
    const Point3 r = rss_scale(avg.rss(i), params) * u;

    sys.design.row(i) = c.transpose();
    sys.design.row(n + i) = e.transpose();
    sys.design.row(2 * n + i) = r.transpose();
    sys.rhs(i) = c.dot(a);
    sys.rhs(n + i) = e.dot(a);
    sys.rhs(2 * n + i) = r.dot(a) + beta;
  }
  return sys;
}

/// Range-based weights: w_i = 1 - d_i / sum(d), repeated for the three families.
inline Eigen::VectorXd stage1_weights(const Eigen::VectorXd& avg_rss, const PathLossParams& params)
{
  const Eigen::Index n = avg_rss.size();
  if (n < 2)
    throw std::invalid_argument("stage1_weights: range-based weights need at least two anchors");

  Eigen::VectorXd range(n);
  for (Eigen::Index i = 0; i < n; ++i)
    range(i) = distance_from_rss(avg_rss(i), params);
  const Eigen::VectorXd w = (1.0 - range.array() / range.sum()).matrix();

  Eigen::VectorXd out(3 * n);
  out << w, w, w;
  return out;
}

/// Minimizes ||W (A x - b)||^2 through an SVD of W A.
inline Estimate solve_lwls(const LinearSystem& system, Stage stage = Stage::baseline)
{
  Estimate est;
  est.stage = stage;
  if (system.design.rows() != system.rhs.size() || system.rhs.size() != system.weights.size())
    throw std::invalid_argument("solve_lwls: inconsistent system dimensions");

  const Eigen::MatrixXd wa = system.weights.asDiagonal() * system.design;
  const Eigen::VectorXd wb = system.weights.cwiseProduct(system.rhs);
  if (!wa.allFinite() || !wb.allFinite())
  {
    est.ill_conditioned = true;
    return est;
  }

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(wa, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  // cond(A^T W^2 A) is the square of cond(W A).
  const double ratio = s(2) > 0.0 ? s(0) / s(2) : std::numeric_limits<double>::infinity();
  est.condition_number = ratio * ratio;
  if (!(est.condition_number <= kMaxConditionNumber))
  {
    est.ill_conditioned = true;
    return est;
  }
  est.position = svd.solve(wb);
  if (!est.position.allFinite())
  {
    est.ill_conditioned = true;
    est.position.setConstant(std::numeric_limits<double>::quiet_NaN());
  }
  return est;
}

/// Residuals of the per-step equations evaluated at a rough position.
/// The elevation family uses the time-averaged cos(alpha) with per-step unit vectors.
inline Residuals compute_residuals(const MeasurementSeries& series, const Eigen::VectorXd& avg_elevation,
                                   const Point3& rough, std::span<const Point3> anchors, const PathLossParams& params)
{
  const Eigen::Index n = series.anchors();
  const Eigen::Index t_steps = series.steps();
  if (static_cast<std::size_t>(n) != anchors.size() || avg_elevation.size() != n)
    throw std::invalid_argument("compute_residuals: anchor counts differ");

  const Point3 k = Point3::UnitZ();
  const double beta = rss_offset(params);

  Residuals r{Eigen::MatrixXd(n, t_steps), Eigen::MatrixXd(n, t_steps), Eigen::MatrixXd(n, t_steps)};
  for (Eigen::Index i = 0; i < n; ++i)
  {
    const Point3 delta = rough - anchors[static_cast<std::size_t>(i)];
    const double cos_avg = std::cos(avg_elevation(i));
    for (Eigen::Index t = 0; t < t_steps; ++t)
    {
      const double phi = series.azimuth(i, t);
      const Point3 u = unit_vector(phi, series.elevation(i, t));
      const Point3 c(-std::sin(phi), std::cos(phi), 0.0);
      r.azimuth(i, t) = c.dot(delta);
      r.elevation(i, t) = (cos_avg * u - k).dot(delta);
      r.rss(i, t) = rss_scale(series.rss(i, t), params) * u.dot(delta) - beta;
    }
  }
  return r;
}

/// Mean of squared residuals per anchor and family, floored at kVarianceFloor.
inline ResidualStats residual_variances(const Residuals& r)
{
  auto mean_square = [](const Eigen::MatrixXd& m) -> Eigen::VectorXd {
    return m.array().square().rowwise().mean().max(kVarianceFloor).matrix();
  };
  return {mean_square(r.azimuth), mean_square(r.elevation), mean_square(r.rss)};
}

/// w = 1 / sigma for each equation, so that w^2 = 1 / sigma^2.
inline Eigen::VectorXd stage2_weights(const ResidualStats& stats)
{
  const Eigen::Index n = stats.var_azimuth.size();
  Eigen::VectorXd w(3 * n);
  w << stats.var_azimuth.cwiseSqrt().cwiseInverse(), stats.var_elevation.cwiseSqrt().cwiseInverse(),
      stats.var_rss.cwiseSqrt().cwiseInverse();
  return w;
}

struct TwoStageResult
{
  Estimate rough;
  Estimate refined;
  ResidualStats stats;
};

/// Runs both stages and keeps the intermediate products.
inline TwoStageResult estimate_two_stage_detailed(const MeasurementSeries& series, std::span<const Point3> anchors,
                                                  const PathLossParams& params)
{
  const AveragedMeasurements avg = time_average(series);
  LinearSystem sys = build_linear_system(avg, anchors, params, stage1_weights(avg.rss, params));

  TwoStageResult out;
  out.rough = solve_lwls(sys, Stage::stage1);
  if (out.rough.ill_conditioned)
  {
    out.refined = out.rough;
    return out;
  }

  out.stats = residual_variances(compute_residuals(series, avg.elevation, out.rough.position, anchors, params));
  sys.weights = stage2_weights(out.stats);
  out.refined = solve_lwls(sys, Stage::stage2);
  if (out.refined.ill_conditioned)
  {
    out.refined = out.rough;
    out.refined.ill_conditioned = true;
  }
  return out;
}

inline Estimate estimate_two_stage(const MeasurementSeries& series, std::span<const Point3> anchors,
                                   const PathLossParams& params)
{
  return estimate_two_stage_detailed(series, anchors, params).refined;
}

/// Unit weights on the time-averaged system.
inline Estimate estimate_ls(const MeasurementSeries& series, std::span<const Point3> anchors,
                            const PathLossParams& params)
{
  const AveragedMeasurements avg = time_average(series);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(3 * avg.anchors());
  return solve_lwls(build_linear_system(avg, anchors, params, ones), Stage::baseline);
}

/// Range-weighted solution; identical to the first stage of the two-stage estimator.
inline Estimate estimate_wls_d(const MeasurementSeries& series, std::span<const Point3> anchors,
                               const PathLossParams& params)
{
  const AveragedMeasurements avg = time_average(series);
  return solve_lwls(build_linear_system(avg, anchors, params, stage1_weights(avg.rss, params)), Stage::baseline);
}

enum class Method
{
  proposed,
  ls,
  wls_d
};

inline std::string_view to_string(Method m)
{
  switch (m)
  {
    case Method::proposed: return "proposed";
    case Method::ls: return "ls";
    case Method::wls_d: return "wls-d";
  }
  return "unknown";
}

inline Method parse_method(std::string_view name)
{
  if (name == "proposed" || name == "two-stage")
    return Method::proposed;
  if (name == "ls")
    return Method::ls;
  if (name == "wls-d" || name == "wls_d")
    return Method::wls_d;
  throw std::invalid_argument("unknown method '" + std::string(name) + "' (expected proposed, ls or wls-d)");
}

inline Estimate estimate(Method method, const MeasurementSeries& series, std::span<const Point3> anchors,
                         const PathLossParams& params)
{
  switch (method)
  {
    case Method::proposed: return estimate_two_stage(series, anchors, params);
    case Method::ls: return estimate_ls(series, anchors, params);
    case Method::wls_d: return estimate_wls_d(series, anchors, params);
  }
  throw std::invalid_argument("estimate: unknown method");
}

}  // namespace rssaoa
