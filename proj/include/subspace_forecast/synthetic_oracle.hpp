#ifndef SUBSPACE_FORECAST_SYNTHETIC_ORACLE_HPP
#define SUBSPACE_FORECAST_SYNTHETIC_ORACLE_HPP

// Ground truth for the closed forms: draws from a known multivariate Gaussian
// and estimates MSE and squared bias by plain sampling.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "subspace_forecast/errors.hpp"
#include "subspace_forecast/estimators.hpp"
#include "subspace_forecast/io.hpp"

namespace subspace_forecast {

struct GaussianSpec {
  Eigen::MatrixXd cov;
  Eigen::VectorXd mean;
  std::uint64_t seed = 0;

  GaussianSpec() = default;

  GaussianSpec(Eigen::MatrixXd covariance, std::uint64_t seed_value)
      : GaussianSpec(covariance, Eigen::VectorXd::Zero(covariance.rows()), seed_value) {}

  GaussianSpec(Eigen::MatrixXd covariance, Eigen::VectorXd mean_vector, std::uint64_t seed_value)
      : cov(std::move(covariance)), mean(std::move(mean_vector)), seed(seed_value) {
    if (cov.rows() != cov.cols() || cov.rows() == 0) {
      throw ArgumentError("gaussian: covariance must be square and non-empty");
    }
    if (mean.size() != cov.rows()) throw ArgumentError("gaussian: mean length mismatch");
    const double scale = cov.cwiseAbs().maxCoeff();
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw DomainError("gaussian: covariance is not symmetric");
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10 * std::max(es.eigenvalues().maxCoeff(), 0.0)) {
      throw DomainError("gaussian: covariance is not positive semi-definite");
    }
  }

  Eigen::Index dim() const noexcept { return cov.rows(); }
};

/// Monte-Carlo estimate with its standard error.
struct McEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  Eigen::Index samples = 0;
};

/// Symmetric PSD square root V sqrt(S) V'; negative round-off eigenvalues are clamped.
inline Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& a) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(a));
  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

namespace detail {

inline Eigen::MatrixXd standard_normals(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd z(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) z(i, j) = normal(rng);
  }
  return z;
}

inline void check_oracle_split(const GaussianSpec& spec, const Estimator& est, Eigen::Index m) {
  if (m < 1 || m >= spec.dim() || est.observation_dim() != m || est.horizon() != spec.dim() - m) {
    throw ArgumentError("oracle: estimator is " + std::to_string(est.horizon()) + "x" +
                        std::to_string(est.observation_dim()) + ", gaussian dim " +
                        std::to_string(spec.dim()) + " split at m=" + std::to_string(m));
  }
}

inline McEstimate summarize(const Eigen::VectorXd& draws) {
  McEstimate out;
  out.samples = draws.size();
  out.value = draws.mean();
  if (draws.size() > 1) {
    const double var = (draws.array() - out.value).square().sum() / static_cast<double>(draws.size() - 1);
    out.standard_error = std::sqrt(var / static_cast<double>(draws.size()));
  }
  return out;
}

}  // namespace detail

/// n i.i.d. rows from N(spec.mean, spec.cov); deterministic for a fixed seed.
inline Eigen::MatrixXd sample(const GaussianSpec& spec, Eigen::Index n) {
  if (n < 1) throw ArgumentError("sample: n must be positive");
  std::mt19937_64 rng(spec.seed);
  const Eigen::MatrixXd root = psd_sqrt(spec.cov);
  Eigen::MatrixXd x = detail::standard_normals(rng, n, spec.dim()) * root;
  x.rowwise() += spec.mean.transpose();
  return x;
}

/// Average of ||z - zhat||^2 over n fresh draws, zhat = mean_z + coeff (y - mean_y).
/// The estimator is expected to come from the sampled Gaussian's true covariance.
inline McEstimate mc_mse(const GaussianSpec& spec, const Estimator& est, Eigen::Index m,
                         Eigen::Index n) {
  detail::check_oracle_split(spec, est, m);
  const Eigen::Index h = spec.dim() - m;
  const Eigen::MatrixXd x = sample(spec, n);
  const Eigen::MatrixXd y = x.leftCols(m).rowwise() - spec.mean.head(m).transpose();
  const Eigen::MatrixXd z = x.rightCols(h).rowwise() - spec.mean.tail(h).transpose();
  const Eigen::MatrixXd err = z - y * est.coeff.transpose();
  return detail::summarize(err.rowwise().squaredNorm());
}

/// Estimate of E||E[zhat | z] - z||^2 by stratifying on z.
///
/// For each of n / draws_per_z draws of z, draws_per_z observations are sampled from
/// y | z ~ N(mean_y + R (z - mean_z), S_yy - S_yz S_zz^-1 S_zy). The within-stratum spread
/// is subtracted so each stratum contributes an unbiased estimate of the squared bias.
inline McEstimate mc_bias(const GaussianSpec& spec, const Estimator& est, Eigen::Index m,
                          Eigen::Index n, Eigen::Index draws_per_z = 8) {
  detail::check_oracle_split(spec, est, m);
  if (draws_per_z < 2) throw ArgumentError("mc_bias: need at least two draws per stratum");
  const Eigen::Index h = spec.dim() - m;
  const Eigen::Index strata = std::max<Eigen::Index>(2, n / draws_per_z);

  const Eigen::MatrixXd szz = spec.cov.bottomRightCorner(h, h);
  const double cond = condition_number(szz);
  if (std::isinf(cond)) throw IllConditionedError("mc_bias: S_zz is singular", cond);
  const Eigen::MatrixXd syz = spec.cov.topRightCorner(m, h);
  const Eigen::MatrixXd r = szz.ldlt().solve(syz.transpose()).transpose();  // m x h
  const Eigen::MatrixXd cond_cov = spec.cov.topLeftCorner(m, m) - r * syz.transpose();
  const Eigen::MatrixXd z_root = psd_sqrt(szz);
  const Eigen::MatrixXd y_root = psd_sqrt(cond_cov);

  std::mt19937_64 rng(spec.seed);
  Eigen::VectorXd per_stratum(strata);
  for (Eigen::Index s = 0; s < strata; ++s) {
    const Eigen::VectorXd z = z_root * detail::standard_normals(rng, h, 1);
    const Eigen::VectorXd y_mean = r * z;
    const Eigen::MatrixXd ys =
        (y_root * detail::standard_normals(rng, m, draws_per_z)).colwise() + y_mean;
    const Eigen::MatrixXd zhat = est.coeff * ys;  // h x draws_per_z
    const Eigen::VectorXd zbar = zhat.rowwise().mean();
    const double spread = (zhat.colwise() - zbar).squaredNorm() / static_cast<double>(draws_per_z - 1);
    per_stratum(s) = (zbar - z).squaredNorm() - spread / static_cast<double>(draws_per_z);
  }
  return detail::summarize(per_stratum);
}

/// Haar-distributed orthogonal matrix.
inline Eigen::MatrixXd random_orthogonal(Eigen::Index d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Eigen::MatrixXd g = detail::standard_normals(rng, d, d);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
  const Eigen::MatrixXd rmat = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < d; ++j) {
    if (rmat(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

/// V diag(spectrum) V' with V = random_orthogonal(seed).
inline Eigen::MatrixXd covariance_with_spectrum(const Eigen::VectorXd& spectrum, std::uint64_t seed) {
  const Eigen::MatrixXd v = random_orthogonal(spectrum.size(), seed);
  return symmetrized(v * spectrum.asDiagonal() * v.transpose());
}

/// d eigenvalues decaying geometrically from 1 down to 1 / condition.
inline Eigen::VectorXd geometric_spectrum(Eigen::Index d, double condition) {
  Eigen::VectorXd s(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    s(k) = d == 1 ? 1.0 : std::pow(condition, -static_cast<double>(k) / static_cast<double>(d - 1));
  }
  return s;
}

inline GaussianSpec load_gaussian_spec(const std::string& path, std::uint64_t seed) {
  return GaussianSpec(read_matrix_csv(path), seed);
}

}  // namespace subspace_forecast

#endif  // SUBSPACE_FORECAST_SYNTHETIC_ORACLE_HPP
