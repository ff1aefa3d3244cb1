#ifndef SUBSPACE_FORECAST_DATA_PIPELINE_HPP
#define SUBSPACE_FORECAST_DATA_PIPELINE_HPP

// Price ingestion and the Hankel -> normalized -> centered transform.
//
// A window of N consecutive prices t_1..t_N is divided by its own price on
// day Q (the normalization day), the column Q (identically 1) is dropped,
// and the per-column mean over the training rows is subtracted. The first
// M-1 remaining columns form the observation block y, the last H = N-M the
// future block z. Q is restricted to the observation part (Q <= M) so that
// a forecast never needs an unknown price to normalize.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "subspace_forecast/errors.hpp"

namespace subspace_forecast {

/// Ordered end-of-day prices of one instrument. Day index means trading-day index.
class PriceSeries {
public:
  PriceSeries() = default;

  PriceSeries(std::string ticker, std::vector<std::string> dates, std::vector<double> prices)
      : ticker_(std::move(ticker)), dates_(std::move(dates)), prices_(std::move(prices)) {
    if (dates_.size() != prices_.size()) {
      throw ArgumentError("price series: " + std::to_string(dates_.size()) + " dates but " +
                          std::to_string(prices_.size()) + " prices");
    }
    for (std::size_t i = 0; i < prices_.size(); ++i) {
      if (!(prices_[i] > 0.0) || !std::isfinite(prices_[i])) {
        throw DomainError("price series: non-positive price on " + dates_[i]);
      }
      if (i > 0 && !(dates_[i - 1] < dates_[i])) {
        throw DomainError("price series: dates not strictly increasing at " + dates_[i]);
      }
    }
  }

  /// Series with synthetic labels "t0000001", ... for data that has no calendar.
  static PriceSeries from_prices(std::string ticker, std::vector<double> prices) {
    std::vector<std::string> labels;
    labels.reserve(prices.size());
    for (std::size_t i = 0; i < prices.size(); ++i) {
      std::string digits = std::to_string(i + 1);
      labels.push_back("t" + std::string(digits.size() < 7 ? 7 - digits.size() : 0, '0') + digits);
    }
    return PriceSeries(std::move(ticker), std::move(labels), std::move(prices));
  }

  const std::string& ticker() const noexcept { return ticker_; }
  const std::vector<std::string>& dates() const noexcept { return dates_; }
  const std::vector<double>& prices() const noexcept { return prices_; }
  std::size_t size() const noexcept { return prices_.size(); }

private:
  std::string ticker_;
  std::vector<std::string> dates_;
  std::vector<double> prices_;
};

/// Window geometry: N total days, M observed days, normalization day Q (1-based).
struct WindowConfig {
  std::size_t window_length = 0;       // N
  std::size_t observation_length = 0;  // M
  std::size_t normalization_day = 0;   // Q

  /// Validated construction; Q = 0 selects the default Q = M.
  static WindowConfig make(std::size_t window_length, std::size_t observation_length,
                           std::size_t normalization_day = 0) {
    if (observation_length < 1 || observation_length >= window_length) {
      throw ArgumentError("window config: need 1 <= M < N, got M=" +
                          std::to_string(observation_length) +
                          " N=" + std::to_string(window_length));
    }
    const std::size_t q = normalization_day == 0 ? observation_length : normalization_day;
    if (q < 1 || q > observation_length) {
      throw ArgumentError("window config: need 1 <= Q <= M, got Q=" + std::to_string(q));
    }
    return WindowConfig{window_length, observation_length, q};
  }

  static WindowConfig from_horizon(std::size_t observation_length, std::size_t horizon) {
    return make(observation_length + horizon, observation_length);
  }

  std::size_t horizon() const noexcept { return window_length - observation_length; }
  /// Length of the observation block after the unit column is removed.
  std::size_t observation_dim() const noexcept { return observation_length - 1; }
  std::size_t dim() const noexcept { return window_length - 1; }

  friend bool operator==(const WindowConfig&, const WindowConfig&) = default;
};

/// Normalized, centered sample matrix plus what is needed to undo the transform.
struct DataMatrix {
  Eigen::MatrixXd values;  // K x (N-1), centered
  Eigen::VectorXd mean;    // length N-1, column means that were removed
  Eigen::VectorXd scales;  // length K, t_i(Q) per row
  WindowConfig config;
  std::size_t dropped_col = 0;  // 1-based, equals Q
  std::size_t first_row = 0;    // series index where row 0 starts

  Eigen::Index rows() const noexcept { return values.rows(); }
  Eigen::Index observation_dim() const noexcept {
    return static_cast<Eigen::Index>(config.observation_dim());
  }
  Eigen::Index horizon() const noexcept { return static_cast<Eigen::Index>(config.horizon()); }

  auto observations() const { return values.leftCols(observation_dim()); }
  auto futures() const { return values.rightCols(horizon()); }

  /// Raw price of row `row` on window day `day` (1-based), reconstructed from the stored transform.
  double raw_price(Eigen::Index row, std::size_t day) const {
    if (day < 1 || day > config.window_length) {
      throw ArgumentError("raw_price: day " + std::to_string(day) + " outside window");
    }
    if (day == dropped_col) return scales(row);
    const auto col = static_cast<Eigen::Index>(day < dropped_col ? day - 1 : day - 2);
    return (values(row, col) + mean(col)) * scales(row);
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline bool is_iso_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  const int month = (s[5] - '0') * 10 + (s[6] - '0');
  const int day = (s[8] - '0') * 10 + (s[9] - '0');
  return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

inline bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace detail

/// Reads `date,close` lines (optional `date,close` header). Output is sorted by date.
inline PriceSeries load_csv(const std::string& path, std::string ticker) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);

  struct Row {
    std::string date;
    double price;
    std::size_t line;
  };
  std::vector<Row> rows;
  std::string line;
  std::size_t line_no = 0;
  bool seen_content = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view text = line;
    if (line_no == 1 && text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
    text = detail::trim(text);
    if (text.empty()) continue;

    const auto comma = text.find(',');
    if (comma == std::string_view::npos || text.find(',', comma + 1) != std::string_view::npos) {
      throw ParseError("expected 'date,close', got '" + std::string(text) + "'", line_no);
    }
    const auto date = detail::trim(text.substr(0, comma));
    const auto close = detail::trim(text.substr(comma + 1));
    if (!seen_content) {
      seen_content = true;
      if (detail::iequals(date, "date") && detail::iequals(close, "close")) continue;
    }
    if (!detail::is_iso_date(date)) {
      throw ParseError("bad date '" + std::string(date) + "'", line_no);
    }
    double price = 0.0;
    const auto [end, ec] = std::from_chars(close.data(), close.data() + close.size(), price);
    if (ec != std::errc{} || end != close.data() + close.size() || !std::isfinite(price)) {
      throw ParseError("bad price '" + std::string(close) + "'", line_no);
    }
    if (!(price > 0.0)) {
      throw DomainError("line " + std::to_string(line_no) + ": non-positive price " +
                        std::string(close));
    }
    rows.push_back({std::string(date), price, line_no});
  }
  if (rows.size() < 2) {
    throw InsufficientDataError("price file " + path + " has too few rows", 2, rows.size());
  }

  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.date < b.date; });
  std::vector<std::string> dates;
  std::vector<double> prices;
  dates.reserve(rows.size());
  prices.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && rows[i].date == dates.back()) {
      throw ParseError("duplicate date " + rows[i].date, std::max(rows[i].line, rows[i - 1].line));
    }
    dates.push_back(std::move(rows[i].date));
    prices.push_back(rows[i].price);
  }
  return PriceSeries(std::move(ticker), std::move(dates), std::move(prices));
}

/// K x N matrix whose row i is prices[i .. i+N-1].
inline Eigen::MatrixXd build_hankel(std::span<const double> prices, std::size_t window_length,
                                    std::size_t samples) {
  if (window_length < 1 || samples < 1) {
    throw ArgumentError("build_hankel: N and K must be positive");
  }
  const std::size_t required = samples + window_length - 1;
  if (prices.size() < required) {
    throw InsufficientDataError("build_hankel: series too short", required, prices.size());
  }
  Eigen::MatrixXd raw(static_cast<Eigen::Index>(samples), static_cast<Eigen::Index>(window_length));
  for (std::size_t i = 0; i < samples; ++i) {
    for (std::size_t j = 0; j < window_length; ++j) {
      raw(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = prices[i + j];
    }
  }
  return raw;
}

inline Eigen::MatrixXd build_hankel(const PriceSeries& series, std::size_t window_length,
                                    std::size_t samples) {
  return build_hankel(std::span<const double>(series.prices()), window_length, samples);
}

/// Divides each row by its day-Q price, removes column Q, and centers the columns.
inline DataMatrix normalize_and_center(const Eigen::MatrixXd& raw, const WindowConfig& config,
                                       std::size_t first_row = 0) {
  const auto n = static_cast<Eigen::Index>(config.window_length);
  if (raw.cols() != n) {
    throw ArgumentError("normalize_and_center: raw has " + std::to_string(raw.cols()) +
                        " columns, config expects N=" + std::to_string(n));
  }
  if (raw.rows() < 1) throw ArgumentError("normalize_and_center: empty matrix");
  const auto q = static_cast<Eigen::Index>(config.normalization_day) - 1;
  if (!(raw.col(q).array() > 0.0).all()) {
    throw DomainError("normalize_and_center: non-positive price on normalization day");
  }

  DataMatrix out;
  out.config = config;
  out.dropped_col = config.normalization_day;
  out.first_row = first_row;
  out.scales = raw.col(q);

  Eigen::MatrixXd normalized(raw.rows(), n - 1);
  normalized.leftCols(q) = raw.leftCols(q).array().colwise() / out.scales.array();
  normalized.rightCols(n - 1 - q) = raw.rightCols(n - 1 - q).array().colwise() / out.scales.array();

  out.mean = normalized.colwise().mean().transpose();
  out.values = normalized.rowwise() - out.mean.transpose();
  return out;
}

/// Chronological split; centering statistics are re-estimated on the training rows only.
inline std::pair<DataMatrix, DataMatrix> split_train_test(const DataMatrix& data,
                                                          std::size_t n_test) {
  const auto k = static_cast<std::size_t>(data.rows());
  if (n_test == 0 || n_test >= k) {
    throw ArgumentError("split_train_test: need 0 < n_test < K, got n_test=" +
                        std::to_string(n_test) + " K=" + std::to_string(k));
  }
  const auto n_train = static_cast<Eigen::Index>(k - n_test);
  const Eigen::MatrixXd normalized = data.values.rowwise() + data.mean.transpose();

  DataMatrix train;
  train.config = data.config;
  train.dropped_col = data.dropped_col;
  train.first_row = data.first_row;
  train.mean = normalized.topRows(n_train).colwise().mean().transpose();
  train.values = normalized.topRows(n_train).rowwise() - train.mean.transpose();
  train.scales = data.scales.head(n_train);

  DataMatrix test;
  test.config = data.config;
  test.dropped_col = data.dropped_col;
  test.first_row = data.first_row + static_cast<std::size_t>(n_train);
  test.mean = train.mean;
  test.values = normalized.bottomRows(static_cast<Eigen::Index>(n_test)).rowwise() -
                train.mean.transpose();
  test.scales = data.scales.tail(static_cast<Eigen::Index>(n_test));
  return {std::move(train), std::move(test)};
}

/// Maps a centered-normalized forecast back to prices: (zhat + mean tail) * scale.
inline Eigen::VectorXd denormalize_forecast(const Eigen::VectorXd& zhat, const Eigen::VectorXd& mean,
                                            double scale) {
  if (zhat.size() > mean.size()) {
    throw ArgumentError("denormalize_forecast: forecast length " + std::to_string(zhat.size()) +
                        " exceeds mean length " + std::to_string(mean.size()));
  }
  return (zhat + mean.tail(zhat.size())) * scale;
}

/// A new observation window in model coordinates.
struct Observation {
  Eigen::VectorXd centered;  // length M-1
  double scale = 0.0;        // price on day Q
};

/// Normalizes and centers the M most recent prices with the training statistics of `train`.
inline Observation prepare_observation(std::span<const double> window, const DataMatrix& train) {
  const WindowConfig& cfg = train.config;
  if (window.size() != cfg.observation_length) {
    throw ArgumentError("prepare_observation: expected " + std::to_string(cfg.observation_length) +
                        " prices, got " + std::to_string(window.size()));
  }
  Observation obs;
  obs.scale = window[cfg.normalization_day - 1];
  if (!(obs.scale > 0.0)) throw DomainError("prepare_observation: non-positive normalization price");
  obs.centered.resize(static_cast<Eigen::Index>(cfg.observation_dim()));
  Eigen::Index col = 0;
  for (std::size_t day = 1; day <= cfg.observation_length; ++day) {
    if (day == cfg.normalization_day) continue;
    obs.centered(col) = window[day - 1] / obs.scale - train.mean(col);
    ++col;
  }
  return obs;
}

}  // namespace subspace_forecast

#endif  // SUBSPACE_FORECAST_DATA_PIPELINE_HPP
