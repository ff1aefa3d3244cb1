#ifndef SUBSPACE_FORECAST_TESTS_FIXTURES_HPP
#define SUBSPACE_FORECAST_TESTS_FIXTURES_HPP

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "subspace_forecast/subspace_forecast.hpp"

namespace subspace_forecast::testing {

class TempDir {
public:
  explicit TempDir(const std::string& stem) {
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() / (stem + "_" + std::to_string(stamp));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

/// Calendar labels 2000-01-01 + i days (weekends included; only the order matters).
inline std::string day_label(std::size_t i) {
  const int year = 2000 + static_cast<int>(i / 336);
  const int month = 1 + static_cast<int>((i % 336) / 28);
  const int day = 1 + static_cast<int>(i % 28);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
  return buf;
}

inline void write_price_csv(const std::filesystem::path& path, const std::vector<double>& prices) {
  std::ofstream out(path, std::ios::binary);
  out << "date,close\n";
  for (std::size_t i = 0; i < prices.size(); ++i) {
    out << day_label(i) << ',' << format_double(prices[i]) << '\n';
  }
}

/// Geometric random walk with small drift: log-returns N(drift, vol^2).
inline std::vector<double> random_walk_prices(std::size_t n, std::uint64_t seed, double start = 50.0,
                                              double drift = 2e-4, double vol = 0.015) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> p;
  p.reserve(n);
  double lp = std::log(start);
  for (std::size_t i = 0; i < n; ++i) {
    lp += drift + vol * normal(rng);
    p.push_back(std::exp(lp));
  }
  return p;
}

/// level + a_t with a_t a stationary Gaussian AR(1): a_t = phi a_{t-1} + sigma e_t.
inline std::vector<double> ar1_level_prices(std::size_t n, std::uint64_t seed, double level,
                                            double phi, double sigma) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> p;
  p.reserve(n);
  double a = sigma / std::sqrt(1.0 - phi * phi) * normal(rng);
  for (std::size_t i = 0; i < n; ++i) {
    p.push_back(level + a);
    a = phi * a + sigma * normal(rng);
  }
  return p;
}

/// Covariance of the centered normalized window of ar1_level_prices to first order in a/level:
/// x_j ~ 1 + (a_j - a_Q) / level, so cov_ij = (g(i-j) - g(i-Q) - g(j-Q) + g(0)) / level^2,
/// with the Q column removed.
inline Eigen::MatrixXd ar1_window_covariance(std::size_t n, std::size_t q, double level, double phi,
                                             double sigma) {
  const double g0 = sigma * sigma / (1.0 - phi * phi);
  auto g = [&](long lag) { return g0 * std::pow(phi, std::abs(static_cast<double>(lag))); };
  std::vector<long> days;
  for (std::size_t d = 1; d <= n; ++d) {
    if (d != q) days.push_back(static_cast<long>(d));
  }
  const auto dim = static_cast<Eigen::Index>(days.size());
  Eigen::MatrixXd c(dim, dim);
  const long ql = static_cast<long>(q);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      const long a = days[static_cast<std::size_t>(i)];
      const long b = days[static_cast<std::size_t>(j)];
      c(i, j) = (g(a - b) - g(a - ql) - g(b - ql) + g(0)) / (level * level);
    }
  }
  return c;
}

/// Random symmetric PSD matrix with spectrum spread over `decades`.
inline Eigen::MatrixXd random_psd(Eigen::Index d, std::uint64_t seed, double decades = 2.0) {
  return covariance_with_spectrum(geometric_spectrum(d, std::pow(10.0, decades)), seed);
}

}  // namespace subspace_forecast::testing

#endif  // SUBSPACE_FORECAST_TESTS_FIXTURES_HPP
