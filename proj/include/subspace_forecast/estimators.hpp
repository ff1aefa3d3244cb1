#ifndef SUBSPACE_FORECAST_ESTIMATORS_HPP
#define SUBSPACE_FORECAST_ESTIMATORS_HPP

// Linear-Gaussian forecasters of the future block z from the observation y.
//
//   unconditional   zhat = 0 (the centered mean),       cov = S_zz
//   gauss-bayes     zhat = S_zy S_yy^-1 y,               cov = S_zz - S_zy S_yy^-1 S_yz
//   reduced-dim     w = G y,  zhat = S_zw S_ww^-1 w,     cov = S_zz - S_zw S_ww^-1 S_wz
//
// with G = (V_ML' V_ML)^-1 V_ML' the least-squares coordinates of y in the
// span of the first L principal directions restricted to the observed rows.
// No inverse is ever formed explicitly.

#include <limits>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "subspace_forecast/covariance_model.hpp"
#include "subspace_forecast/errors.hpp"

namespace subspace_forecast {

enum class Method { kUnconditional, kGaussBayes, kReducedDimension };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::kUnconditional: return "unc";
    case Method::kGaussBayes: return "gb";
    case Method::kReducedDimension: return "rd";
  }
  return "?";
}

inline Method parse_method(std::string_view s) {
  if (s == "unc") return Method::kUnconditional;
  if (s == "gb") return Method::kGaussBayes;
  if (s == "rd") return Method::kReducedDimension;
  throw ArgumentError("unknown method '" + std::string(s) + "' (expected unc, gb or rd)");
}

/// Filtering operator onto the principal subspace and the projected covariances.
struct ProjectionOperator {
  Eigen::MatrixXd filter;          // G, L x m
  Eigen::MatrixXd observed_basis;  // V_ML, m x L
  Eigen::MatrixXd sigma_ww;        // L x L
  Eigen::MatrixXd sigma_zw;        // H x L
  double gram_condition = 1.0;

  Eigen::Index dim() const noexcept { return filter.rows(); }
};

/// A fitted linear forecaster: zhat = coeff * y.
struct Estimator {
  Method method = Method::kUnconditional;
  Eigen::MatrixXd coeff;           // H x m
  Eigen::MatrixXd posterior_cov;   // H x H
  /// Condition number of the matrix that was inverted (S_yy or S_ww); NaN for unconditional.
  double condition = std::numeric_limits<double>::quiet_NaN();
  Eigen::Index subspace_dim = 0;   // L, reduced-dimension only

  Eigen::Index observation_dim() const noexcept { return coeff.cols(); }
  Eigen::Index horizon() const noexcept { return coeff.rows(); }
};

inline Estimator fit_unconditional(const CovarianceModel& model) {
  Estimator est;
  est.method = Method::kUnconditional;
  est.coeff = Eigen::MatrixXd::Zero(model.horizon(), model.observation_dim());
  est.posterior_cov = model.sigma_zz();
  return est;
}

/// Conditional mean of z given y. Runs in the ill-conditioned regime and reports cond(S_yy);
/// refuses only at numerical singularity.
inline Estimator fit_gauss_bayes(const CovarianceModel& model) {
  const Eigen::MatrixXd syy = model.sigma_yy();
  const double cond = condition_number(syy);
  if (std::isinf(cond)) throw IllConditionedError("gauss-bayes: S_yy is singular", cond);

  const Eigen::MatrixXd gain_t = syy.ldlt().solve(Eigen::MatrixXd(model.sigma_yz()));  // m x H
  Estimator est;
  est.method = Method::kGaussBayes;
  est.coeff = gain_t.transpose();
  est.posterior_cov = symmetrized(Eigen::MatrixXd(model.sigma_zz()) - model.sigma_zy() * gain_t);
  est.condition = cond;
  return est;
}

inline ProjectionOperator build_projection(const CovarianceModel& model, const Subspace& sub) {
  const Eigen::Index m = model.observation_dim();
  if (sub.observed_basis.rows() != m) {
    throw ArgumentError("build_projection: subspace has " + std::to_string(sub.observed_basis.rows()) +
                        " observed rows, model has m=" + std::to_string(m));
  }
  if (sub.dim > m) {
    throw ArgumentError("build_projection: L=" + std::to_string(sub.dim) + " exceeds m=" +
                        std::to_string(m));
  }
  const Eigen::MatrixXd& v = sub.observed_basis;
  const Eigen::MatrixXd gram = v.transpose() * v;
  const double gram_cond = condition_number(gram);
  if (std::isinf(gram_cond)) {
    throw IllConditionedError("build_projection: V_ML is rank deficient", gram_cond);
  }

  ProjectionOperator proj;
  proj.observed_basis = v;
  proj.filter = gram.partialPivLu().solve(Eigen::MatrixXd(v.transpose()));
  proj.sigma_ww = symmetrized(proj.filter * model.sigma_yy() * proj.filter.transpose());
  proj.sigma_zw = model.sigma_zy() * proj.filter.transpose();
  proj.gram_condition = gram_cond;
  return proj;
}

inline Estimator fit_reduced_dimension(const CovarianceModel& model, const ProjectionOperator& proj) {
  if (proj.filter.cols() != model.observation_dim() || proj.sigma_zw.rows() != model.horizon()) {
    throw ArgumentError("fit_reduced_dimension: projection does not match the model split");
  }
  const double cond = condition_number(proj.sigma_ww);
  if (std::isinf(cond)) throw IllConditionedError("reduced-dimension: S_ww is singular", cond);

  const Eigen::MatrixXd gain_t = proj.sigma_ww.ldlt().solve(Eigen::MatrixXd(proj.sigma_zw.transpose()));
  Estimator est;
  est.method = Method::kReducedDimension;
  est.coeff = gain_t.transpose() * proj.filter;
  est.posterior_cov = symmetrized(Eigen::MatrixXd(model.sigma_zz()) - proj.sigma_zw * gain_t);
  est.condition = cond;
  est.subspace_dim = proj.dim();
  return est;
}

/// Convenience: choose_subspace + build_projection + fit_reduced_dimension.
inline Estimator fit_reduced_dimension(const CovarianceModel& model, Eigen::Index l) {
  return fit_reduced_dimension(model, build_projection(model, choose_subspace(model, l)));
}

inline Eigen::VectorXd predict(const Estimator& est, const Eigen::VectorXd& y) {
  if (y.size() != est.observation_dim()) {
    throw ArgumentError("predict: observation has length " + std::to_string(y.size()) +
                        ", estimator expects " + std::to_string(est.observation_dim()));
  }
  return est.coeff * y;
}

/// Forecasts for every row of a K x m observation matrix (K x H result).
inline Eigen::MatrixXd predict_rows(const Estimator& est, const Eigen::MatrixXd& observations) {
  if (observations.cols() != est.observation_dim()) {
    throw ArgumentError("predict_rows: observations have " + std::to_string(observations.cols()) +
                        " columns, estimator expects " + std::to_string(est.observation_dim()));
  }
  return observations * est.coeff.transpose();
}

}  // namespace subspace_forecast

#endif  // SUBSPACE_FORECAST_ESTIMATORS_HPP
