#ifndef SUBSPACE_FORECAST_METRICS_HPP
#define SUBSPACE_FORECAST_METRICS_HPP

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "subspace_forecast/covariance_model.hpp"
#include "subspace_forecast/errors.hpp"
#include "subspace_forecast/estimators.hpp"

namespace subspace_forecast {

struct MseBreakdown {
  Method method = Method::kUnconditional;
  double theoretical_mse = 0.0;
  double empirical_mse = std::numeric_limits<double>::quiet_NaN();
  double bias_sq = 0.0;
  double variance = 0.0;
};

struct BiasDecomposition {
  double bias_sq = 0.0;
  double variance = 0.0;
};

struct EmpiricalMse {
  Eigen::VectorXd per_day;
  double total = 0.0;
};

struct DirectionalReport {
  Eigen::VectorXd per_day;  // D_j
  double mean_over_days = 0.0;
  Eigen::Index n_samples = 0;
};

namespace detail {

inline void check_split(const CovarianceModel& model, const Estimator& est, const char* who) {
  if (est.observation_dim() != model.observation_dim() || est.horizon() != model.horizon()) {
    throw ArgumentError(std::string(who) + ": estimator is " + std::to_string(est.horizon()) + "x" +
                        std::to_string(est.observation_dim()) + ", model split is " +
                        std::to_string(model.horizon()) + "x" +
                        std::to_string(model.observation_dim()));
  }
}

}  // namespace detail

/// E||z - C y||^2 = tr(S_zz) + tr(C S_yy C') - 2 tr(S_zy C') for an arbitrary linear coefficient C.
inline double linear_predictor_mse(const CovarianceModel& model, const Eigen::MatrixXd& coeff) {
  const Eigen::MatrixXd syy = model.sigma_yy();
  return model.sigma_zz().trace() + (coeff * syy * coeff.transpose()).trace() -
         2.0 * (model.sigma_zy() * coeff.transpose()).trace();
}

/// Closed-form expected squared error summed over the horizon.
inline double theoretical_mse(const CovarianceModel& model, const Estimator& est) {
  detail::check_split(model, est, "theoretical_mse");
  switch (est.method) {
    case Method::kUnconditional:
      return model.sigma_zz().trace();
    case Method::kGaussBayes:
      return model.sigma_zz().trace() - (model.sigma_zy() * est.coeff.transpose()).trace();
    case Method::kReducedDimension:
      return linear_predictor_mse(model, est.coeff);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

/// E||C E[y|z] - z||^2 = tr[(I - C R) S_zz (I - C R)'], R = S_yz S_zz^-1, for any coefficient C.
inline double conditional_bias_sq(const CovarianceModel& model, const Eigen::MatrixXd& coeff) {
  const Eigen::MatrixXd szz = model.sigma_zz();
  const double cond = condition_number(szz);
  if (std::isinf(cond)) throw IllConditionedError("bias: S_zz is singular", cond);
  const Eigen::MatrixXd r_t = szz.ldlt().solve(model.sigma_zy());  // R' = S_zz^-1 S_zy
  const Eigen::MatrixXd resid =
      Eigen::MatrixXd::Identity(szz.rows(), szz.cols()) - coeff * r_t.transpose();
  return (resid * szz * resid.transpose()).trace();
}

/// Squared bias and variance, variance = theoretical_mse - bias_sq.
///
/// Gauss-Bayes reports zero bias: its error has zero mean conditional on the
/// observation. Unconditional and reduced-dimension report the bias conditional
/// on the future block, which for the unconditional forecaster equals tr(S_zz).
/// The future-conditional bias of the Gauss-Bayes coefficient is available from
/// conditional_bias_sq and is generally nonzero.
inline BiasDecomposition bias_decomposition(const CovarianceModel& model, const Estimator& est) {
  detail::check_split(model, est, "bias_decomposition");
  const double mse = theoretical_mse(model, est);
  BiasDecomposition out;
  switch (est.method) {
    case Method::kGaussBayes:
      out.bias_sq = 0.0;
      break;
    case Method::kUnconditional:
      out.bias_sq = model.sigma_zz().trace();
      break;
    case Method::kReducedDimension:
      out.bias_sq = conditional_bias_sq(model, est.coeff);
      break;
  }
  out.variance = mse - out.bias_sq;
  return out;
}

inline MseBreakdown mse_breakdown(const CovarianceModel& model, const Estimator& est) {
  MseBreakdown out;
  out.method = est.method;
  out.theoretical_mse = theoretical_mse(model, est);
  const BiasDecomposition bias = bias_decomposition(model, est);
  out.bias_sq = bias.bias_sq;
  out.variance = bias.variance;
  return out;
}

inline EmpiricalMse empirical_mse(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& actuals) {
  if (predictions.rows() != actuals.rows() || predictions.cols() != actuals.cols()) {
    throw ArgumentError("empirical_mse: shape mismatch");
  }
  if (predictions.rows() == 0) throw ArgumentError("empirical_mse: no samples");
  EmpiricalMse out;
  out.per_day = (actuals - predictions).array().square().colwise().mean().transpose();
  out.total = out.per_day.sum();
  return out;
}

/// Fraction of windows whose forecast moves in the same direction as the actual price,
/// relative to z0 (the last observed price). A zero move on either side scores 0.
inline DirectionalReport directional_statistic(const Eigen::MatrixXd& predictions,
                                               const Eigen::MatrixXd& actuals,
                                               const Eigen::VectorXd& z0) {
  if (predictions.rows() != actuals.rows() || predictions.cols() != actuals.cols() ||
      z0.size() != actuals.rows()) {
    throw ArgumentError("directional_statistic: shape mismatch");
  }
  if (actuals.rows() == 0) throw ArgumentError("directional_statistic: no samples");
  if (!(z0.array() > 0.0).all()) throw DomainError("directional_statistic: z0 must be positive");

  const Eigen::ArrayXXd actual_move = actuals.array().colwise() - z0.array();
  const Eigen::ArrayXXd predicted_move = predictions.array().colwise() - z0.array();
  const Eigen::ArrayXXd hits = ((actual_move * predicted_move) > 0.0).cast<double>();

  DirectionalReport out;
  out.n_samples = actuals.rows();
  out.per_day = hits.colwise().mean().transpose();
  out.mean_over_days = out.per_day.mean();
  return out;
}

/// Per-day forecast standard deviation, sqrt(diag(posterior_cov)) * scale.
inline Eigen::VectorXd volatility(const Estimator& est, double scale = 1.0) {
  return est.posterior_cov.diagonal().cwiseMax(0.0).cwiseSqrt() * scale;
}

}  // namespace subspace_forecast

#endif  // SUBSPACE_FORECAST_METRICS_HPP
