#ifndef SUBSPACE_FORECAST_COVARIANCE_MODEL_HPP
#define SUBSPACE_FORECAST_COVARIANCE_MODEL_HPP

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "subspace_forecast/data_pipeline.hpp"
#include "subspace_forecast/errors.hpp"

namespace subspace_forecast {

/// Relative threshold below which the smallest singular value counts as zero.
inline constexpr double kSingularityThreshold = 1e-15;

/// Ratio of largest to smallest singular value of a symmetric matrix; +inf when numerically singular.
template <typename Derived>
double condition_number(const Eigen::MatrixBase<Derived>& a) {
  if (a.rows() != a.cols()) {
    throw ArgumentError("condition_number: matrix is " + std::to_string(a.rows()) + "x" +
                        std::to_string(a.cols()));
  }
  if (a.rows() == 0) throw ArgumentError("condition_number: empty matrix");
  const Eigen::MatrixXd sym = 0.5 * (a + a.transpose()).template cast<double>();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd s = es.eigenvalues().cwiseAbs();
  const double s_max = s.maxCoeff();
  const double s_min = s.minCoeff();
  if (s_min <= s_max * kSingularityThreshold) return std::numeric_limits<double>::infinity();
  return s_max / s_min;
}

template <typename Derived>
Eigen::MatrixXd symmetrized(const Eigen::MatrixBase<Derived>& a) {
  return 0.5 * (a + a.transpose());
}

/// Which denominator the sample covariance uses.
enum class CovarianceDenominator {
  kSamplesMinusOne,  // K - 1, the unbiased sample covariance
  kWindowMinusOne,   // N - 1 as literally printed for the GE experiment
};

/// Covariance of x = [y; z] with its block partition and eigen-decomposition.
///
/// The observation block y has dimension m, the future block z dimension H.
/// Eigenvalues are sorted in decreasing order; round-off negatives are clamped to 0.
class CovarianceModel {
public:
  CovarianceModel(const Eigen::MatrixXd& sigma, Eigen::Index observation_dim) {
    if (sigma.rows() != sigma.cols()) throw ArgumentError("covariance must be square");
    const Eigen::Index d = sigma.rows();
    if (observation_dim < 1 || observation_dim >= d) {
      throw ArgumentError("covariance split m=" + std::to_string(observation_dim) +
                          " outside [1, " + std::to_string(d - 1) + "]");
    }
    const double scale = sigma.cwiseAbs().maxCoeff();
    if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw ArgumentError("covariance is not symmetric");
    }
    sigma_ = symmetrized(sigma);
    m_ = observation_dim;

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma_);
    if (es.info() != Eigen::Success) throw DomainError("eigen-decomposition failed");
    eigenvalues_ = es.eigenvalues().reverse();
    eigenvectors_ = es.eigenvectors().rowwise().reverse();
    if (eigenvalues_(d - 1) < -1e-10 * std::max(eigenvalues_(0), 0.0)) {
      throw DomainError("covariance has a negative eigenvalue " +
                        std::to_string(eigenvalues_(d - 1)));
    }
    eigenvalues_ = eigenvalues_.cwiseMax(0.0);

    sigma_zy_ = sigma_.block(m_, 0, horizon(), m_);
  }

  Eigen::Index dim() const noexcept { return sigma_.rows(); }
  Eigen::Index observation_dim() const noexcept { return m_; }
  Eigen::Index horizon() const noexcept { return sigma_.rows() - m_; }

  const Eigen::MatrixXd& sigma_xx() const noexcept { return sigma_; }
  auto sigma_yy() const { return sigma_.topLeftCorner(m_, m_); }
  auto sigma_yz() const { return sigma_zy_.transpose(); }
  const Eigen::MatrixXd& sigma_zy() const noexcept { return sigma_zy_; }
  auto sigma_zz() const { return sigma_.bottomRightCorner(horizon(), horizon()); }

  /// Decreasing, nonnegative.
  const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }
  /// Orthonormal columns matching eigenvalues().
  const Eigen::MatrixXd& eigenvectors() const noexcept { return eigenvectors_; }

private:
  Eigen::MatrixXd sigma_;
  Eigen::MatrixXd sigma_zy_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
  Eigen::Index m_ = 0;
};

/// Sample covariance X'X / denom of centered training rows, split at m = M - 1.
inline CovarianceModel empirical_covariance(
    const DataMatrix& train, CovarianceDenominator denominator = CovarianceDenominator::kSamplesMinusOne) {
  const Eigen::Index k = train.rows();
  if (k < 2) {
    throw InsufficientDataError("empirical_covariance: need at least two training rows", 2,
                                static_cast<std::size_t>(k));
  }
  const double denom = denominator == CovarianceDenominator::kSamplesMinusOne
                           ? static_cast<double>(k - 1)
                           : static_cast<double>(train.config.window_length - 1);
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(train.values.cols(), train.values.cols());
  sigma.selfadjointView<Eigen::Lower>().rankUpdate(train.values.transpose());
  sigma = sigma.selfadjointView<Eigen::Lower>();
  sigma /= denom;
  return CovarianceModel(sigma, train.observation_dim());
}

/// The leading L principal directions.
struct Subspace {
  Eigen::Index dim = 0;             // L
  Eigen::MatrixXd basis;            // D x L
  Eigen::MatrixXd observed_basis;   // m x L, first m rows of basis
  double energy_fraction = 0.0;
};

inline Subspace choose_subspace(const CovarianceModel& model, Eigen::Index l) {
  if (l < 1 || l > model.dim()) {
    throw ArgumentError("choose_subspace: L=" + std::to_string(l) + " outside [1, " +
                        std::to_string(model.dim()) + "]");
  }
  Subspace sub;
  sub.dim = l;
  sub.basis = model.eigenvectors().leftCols(l);
  sub.observed_basis = sub.basis.topRows(model.observation_dim());
  const double total = model.eigenvalues().sum();
  sub.energy_fraction = total > 0.0 ? model.eigenvalues().head(l).sum() / total : 1.0;
  return sub;
}

}  // namespace subspace_forecast

#endif  // SUBSPACE_FORECAST_COVARIANCE_MODEL_HPP
