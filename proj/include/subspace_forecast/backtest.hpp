#ifndef SUBSPACE_FORECAST_BACKTEST_HPP
#define SUBSPACE_FORECAST_BACKTEST_HPP

// Out-of-sample experiments over a grid of observation lengths M and
// condition-number caps. For each M the covariance is fitted once on the
// chronologically earlier windows; the last n_test windows are only ever
// predicted.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "subspace_forecast/covariance_model.hpp"
#include "subspace_forecast/data_pipeline.hpp"
#include "subspace_forecast/errors.hpp"
#include "subspace_forecast/estimators.hpp"
#include "subspace_forecast/io.hpp"
#include "subspace_forecast/metrics.hpp"

namespace subspace_forecast {

enum class SelectionObjective {
  kTheoreticalRdMse,  // closed-form RD MSE under the training covariance
  kValidationMse,     // empirical MSE on a held-out tail of the training rows
};

inline std::string_view to_string(SelectionObjective o) {
  return o == SelectionObjective::kTheoreticalRdMse ? "theoretical_rd_mse" : "validation_mse";
}

struct SweepConfig {
  std::vector<std::size_t> m_values;
  std::size_t horizon = 10;
  std::vector<double> caps{1e3, 1e4};
  std::size_t n_test = 2200;
  SelectionObjective objective = SelectionObjective::kTheoreticalRdMse;
  /// Share of training rows held out when objective == kValidationMse.
  double validation_fraction = 0.2;
  CovarianceDenominator denominator = CovarianceDenominator::kSamplesMinusOne;

  /// M = 20, 50, ..., 440 with H = 10, caps {1e3, 1e4}, 2200 test windows.
  static SweepConfig default_grid() {
    SweepConfig cfg;
    for (std::size_t m = 20; m <= 440; m += 30) cfg.m_values.push_back(m);
    return cfg;
  }

  void validate() const {
    if (m_values.empty()) throw ArgumentError("sweep: no observation lengths given");
    for (std::size_t m : m_values) {
      if (m < 2) throw ArgumentError("sweep: every M must be >= 2, got " + std::to_string(m));
    }
    if (horizon < 1) throw ArgumentError("sweep: horizon must be >= 1");
    if (caps.empty()) throw ArgumentError("sweep: no condition caps given");
    for (double c : caps) {
      if (!(c >= 1.0)) throw ArgumentError("sweep: caps must be >= 1");
    }
    if (n_test < 1) throw ArgumentError("sweep: n_test must be >= 1");
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
      throw ArgumentError("sweep: validation_fraction must lie in (0, 1)");
    }
  }
};

/// One point of the MSE-versus-L curve.
struct CurvePoint {
  Eigen::Index l = 0;
  double cond_ww = std::numeric_limits<double>::infinity();
  double mse_rd = std::numeric_limits<double>::quiet_NaN();     // theoretical, training covariance
  double objective = std::numeric_limits<double>::quiet_NaN();  // what selection minimizes
};

/// Held-out rows and the covariance fitted without them.
struct ValidationSet {
  CovarianceModel fit_model;
  Eigen::MatrixXd observations;
  Eigen::MatrixXd futures;
};

struct LSelection {
  Eigen::Index l = 0;
  double cond_ww = 0.0;
  double objective = 0.0;
};

/// Evaluates every L = 1..m: conditioning of S_ww and the selection objective.
inline std::vector<CurvePoint> subspace_curve(const CovarianceModel& model,
                                              SelectionObjective objective,
                                              const ValidationSet* validation = nullptr) {
  if (objective == SelectionObjective::kValidationMse && validation == nullptr) {
    throw ArgumentError("subspace_curve: validation objective needs a validation set");
  }
  std::vector<CurvePoint> curve;
  curve.reserve(static_cast<std::size_t>(model.observation_dim()));
  for (Eigen::Index l = 1; l <= model.observation_dim(); ++l) {
    CurvePoint pt;
    pt.l = l;
    try {
      const ProjectionOperator proj = build_projection(model, choose_subspace(model, l));
      pt.cond_ww = condition_number(proj.sigma_ww);
      const Estimator rd = fit_reduced_dimension(model, proj);
      pt.mse_rd = theoretical_mse(model, rd);
    } catch (const IllConditionedError&) {
      curve.push_back(pt);
      continue;
    }
    if (objective == SelectionObjective::kTheoreticalRdMse) {
      pt.objective = pt.mse_rd;
    } else {
      try {
        const Estimator rd_val = fit_reduced_dimension(validation->fit_model, l);
        pt.objective =
            empirical_mse(predict_rows(rd_val, validation->observations), validation->futures).total;
      } catch (const IllConditionedError&) {
      }
    }
    curve.push_back(pt);
  }
  return curve;
}

/// Minimal objective among L with cond(S_ww) <= cap; ties go to the smaller L.
inline LSelection select_from_curve(const std::vector<CurvePoint>& curve, double cap) {
  if (!(cap >= 1.0)) throw ArgumentError("select_L: cap must be >= 1");
  std::optional<LSelection> best;
  double min_cond = std::numeric_limits<double>::infinity();
  for (const CurvePoint& pt : curve) {
    min_cond = std::min(min_cond, pt.cond_ww);
    if (!(pt.cond_ww <= cap) || !std::isfinite(pt.objective)) continue;
    if (!best || pt.objective < best->objective) best = LSelection{pt.l, pt.cond_ww, pt.objective};
  }
  if (!best) throw NoFeasibleSubspaceError(cap, min_cond);
  return *best;
}

inline LSelection select_L(const CovarianceModel& model, double cap,
                           SelectionObjective objective = SelectionObjective::kTheoreticalRdMse,
                           const ValidationSet* validation = nullptr) {
  if (!(cap >= 1.0)) throw ArgumentError("select_L: cap must be >= 1");
  return select_from_curve(subspace_curve(model, objective, validation), cap);
}

struct MethodResult {
  Method method = Method::kUnconditional;
  bool available = false;
  std::string note;
  MseBreakdown mse;
  Eigen::VectorXd empirical_mse_per_day;
  double empirical_mse_price = std::numeric_limits<double>::quiet_NaN();
  DirectionalReport directional;
  Eigen::VectorXd volatility;  // centered-normalized units
  double condition = std::numeric_limits<double>::quiet_NaN();
};

struct BacktestCell {
  std::size_t m = 0;
  double cap = 0.0;
  bool skipped = false;
  std::string skip_reason;
  Eigen::Index best_l = 0;
  double energy_fraction = std::numeric_limits<double>::quiet_NaN();
  double cond_yy = std::numeric_limits<double>::quiet_NaN();
  double cond_ww = std::numeric_limits<double>::quiet_NaN();
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  MethodResult unc;
  MethodResult gb;
  MethodResult rd;
};

struct MseCurve {
  std::size_t m = 0;
  std::vector<CurvePoint> points;
};

struct BacktestReport {
  std::string ticker;
  SweepConfig config;
  std::vector<BacktestCell> cells;
  std::vector<MseCurve> curves;
};

namespace detail {

/// Test-set evaluation of one fitted estimator in both normalized and price units.
inline MethodResult evaluate_method(const CovarianceModel& model, const Estimator& est,
                                    const DataMatrix& test, const Eigen::MatrixXd& raw_test) {
  MethodResult out;
  out.method = est.method;
  out.available = true;
  out.condition = est.condition;
  out.mse.method = est.method;
  out.mse.theoretical_mse = theoretical_mse(model, est);
  try {
    const BiasDecomposition bias = bias_decomposition(model, est);
    out.mse.bias_sq = bias.bias_sq;
    out.mse.variance = bias.variance;
  } catch (const IllConditionedError& e) {
    out.mse.bias_sq = std::numeric_limits<double>::quiet_NaN();
    out.mse.variance = std::numeric_limits<double>::quiet_NaN();
    out.note = e.what();
  }

  const Eigen::MatrixXd pred = predict_rows(est, test.observations());
  const EmpiricalMse emp = empirical_mse(pred, test.futures());
  out.mse.empirical_mse = emp.total;
  out.empirical_mse_per_day = emp.per_day;

  const Eigen::Index h = test.horizon();
  const auto m_len = static_cast<Eigen::Index>(test.config.observation_length);
  const Eigen::MatrixXd pred_price =
      (pred.rowwise() + test.mean.tail(h).transpose()).array().colwise() * test.scales.array();
  const Eigen::MatrixXd actual_price = raw_test.rightCols(h);
  out.empirical_mse_price = empirical_mse(pred_price, actual_price).total;
  out.directional = directional_statistic(pred_price, actual_price, raw_test.col(m_len - 1));
  out.volatility = volatility(est);
  return out;
}

inline MethodResult unavailable(Method method, std::string note) {
  MethodResult out;
  out.method = method;
  out.mse.method = method;
  out.mse.theoretical_mse = std::numeric_limits<double>::quiet_NaN();
  out.mse.bias_sq = out.mse.variance = std::numeric_limits<double>::quiet_NaN();
  out.note = std::move(note);
  return out;
}

}  // namespace detail

/// Runs the (M, cap) grid. Cells that cannot be computed are recorded as skipped.
inline BacktestReport run_backtest(const PriceSeries& series, const SweepConfig& sweep,
                                   const std::function<void(const BacktestCell&)>& on_cell = {}) {
  sweep.validate();
  BacktestReport report;
  report.ticker = series.ticker();
  report.config = sweep;

  auto skip_all = [&](std::size_t m, const std::string& reason) {
    for (double cap : sweep.caps) {
      BacktestCell cell;
      cell.m = m;
      cell.cap = cap;
      cell.skipped = true;
      cell.skip_reason = reason;
      if (on_cell) on_cell(cell);
      report.cells.push_back(std::move(cell));
    }
  };

  for (std::size_t m : sweep.m_values) {
    const WindowConfig cfg = WindowConfig::from_horizon(m, sweep.horizon);
    const std::size_t n = cfg.window_length;
    const std::size_t required = n + sweep.n_test + 1;  // two training windows at least
    if (series.size() < required) {
      skip_all(m, "insufficient data: required " + std::to_string(required) + " prices, available " +
                      std::to_string(series.size()));
      continue;
    }
    const std::size_t k = series.size() - n + 1;
    const Eigen::MatrixXd raw = build_hankel(series, n, k);
    const DataMatrix data = normalize_and_center(raw, cfg);
    const auto [train, test] = split_train_test(data, sweep.n_test);
    const Eigen::MatrixXd raw_test = raw.bottomRows(static_cast<Eigen::Index>(sweep.n_test));

    std::optional<CovarianceModel> model;
    try {
      model.emplace(empirical_covariance(train, sweep.denominator));
    } catch (const Error& e) {
      skip_all(m, e.what());
      continue;
    }

    const double cond_yy = condition_number(model->sigma_yy());
    const MethodResult unc = detail::evaluate_method(*model, fit_unconditional(*model), test, raw_test);
    MethodResult gb;
    try {
      gb = detail::evaluate_method(*model, fit_gauss_bayes(*model), test, raw_test);
    } catch (const IllConditionedError& e) {
      gb = detail::unavailable(Method::kGaussBayes, e.what());
    }

    std::optional<ValidationSet> validation;
    if (sweep.objective == SelectionObjective::kValidationMse) {
      const auto n_val = static_cast<std::size_t>(
          std::ceil(sweep.validation_fraction * static_cast<double>(train.rows())));
      try {
        const auto [fit_rows, val_rows] = split_train_test(train, n_val);
        validation.emplace(ValidationSet{empirical_covariance(fit_rows, sweep.denominator),
                                         val_rows.observations(), val_rows.futures()});
      } catch (const Error& e) {
        skip_all(m, std::string("validation split failed: ") + e.what());
        continue;
      }
    }
    MseCurve curve{m, subspace_curve(*model, sweep.objective, validation ? &*validation : nullptr)};

    for (double cap : sweep.caps) {
      BacktestCell cell;
      cell.m = m;
      cell.cap = cap;
      cell.cond_yy = cond_yy;
      cell.n_train = static_cast<std::size_t>(train.rows());
      cell.n_test = sweep.n_test;
      cell.unc = unc;
      cell.gb = gb;
      try {
        const LSelection sel = select_from_curve(curve.points, cap);
        const Subspace sub = choose_subspace(*model, sel.l);
        const Estimator rd = fit_reduced_dimension(*model, build_projection(*model, sub));
        cell.best_l = sel.l;
        cell.cond_ww = rd.condition;
        cell.energy_fraction = sub.energy_fraction;
        cell.rd = detail::evaluate_method(*model, rd, test, raw_test);
      } catch (const Error& e) {
        cell.skipped = true;
        cell.skip_reason = e.what();
        cell.rd = detail::unavailable(Method::kReducedDimension, e.what());
      }
      if (on_cell) on_cell(cell);
      report.cells.push_back(std::move(cell));
    }
    report.curves.push_back(std::move(curve));
  }
  return report;
}

namespace detail {

inline nlohmann::json to_json(const Eigen::VectorXd& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

inline nlohmann::json to_json(const MethodResult& r) {
  nlohmann::json j;
  j["available"] = r.available;
  if (!r.note.empty()) j["note"] = r.note;
  if (!r.available) return j;
  j["theoretical_mse"] = r.mse.theoretical_mse;
  j["empirical_mse"] = r.mse.empirical_mse;
  j["empirical_mse_per_day"] = to_json(r.empirical_mse_per_day);
  j["empirical_mse_price"] = r.empirical_mse_price;
  j["bias_sq"] = r.mse.bias_sq;
  j["variance"] = r.mse.variance;
  j["condition"] = r.condition;
  j["directional"] = {{"per_day", to_json(r.directional.per_day)},
                      {"mean_over_days", r.directional.mean_over_days},
                      {"n_samples", r.directional.n_samples}};
  j["volatility"] = to_json(r.volatility);
  return j;
}

inline std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

inline std::string fmt(double x) { return format_double(x); }

}  // namespace detail

inline nlohmann::json report_to_json(const BacktestReport& report) {
  using nlohmann::json;
  json root;
  root["ticker"] = report.ticker;
  json cfg;
  cfg["m_values"] = report.config.m_values;
  cfg["horizon"] = report.config.horizon;
  cfg["caps"] = report.config.caps;
  cfg["n_test"] = report.config.n_test;
  cfg["q_rule"] = "m";
  cfg["objective"] = std::string(to_string(report.config.objective));
  cfg["covariance_denominator"] =
      report.config.denominator == CovarianceDenominator::kSamplesMinusOne ? "samples_minus_one"
                                                                           : "window_minus_one";
  root["config"] = cfg;

  json cells = json::array();
  for (const BacktestCell& c : report.cells) {
    json jc;
    jc["M"] = c.m;
    jc["cap"] = c.cap;
    jc["skipped"] = c.skipped;
    if (c.skipped) jc["reason"] = c.skip_reason;
    if (!c.skipped) {
      jc["best_L"] = c.best_l;
      jc["energy_fraction"] = c.energy_fraction;
      jc["cond_yy"] = c.cond_yy;
      jc["cond_ww"] = c.cond_ww;
      jc["n_train"] = c.n_train;
      jc["n_test"] = c.n_test;
      jc["methods"] = {{"unc", detail::to_json(c.unc)},
                       {"gb", detail::to_json(c.gb)},
                       {"rd", detail::to_json(c.rd)}};
    }
    cells.push_back(std::move(jc));
  }
  root["cells"] = std::move(cells);

  json curves = json::array();
  for (const MseCurve& curve : report.curves) {
    json pts = json::array();
    for (const CurvePoint& p : curve.points) {
      pts.push_back({{"L", p.l}, {"cond_ww", p.cond_ww}, {"mse_rd", p.mse_rd}, {"objective", p.objective}});
    }
    curves.push_back({{"M", curve.m}, {"points", std::move(pts)}});
  }
  root["curves"] = std::move(curves);
  return root;
}

/// Writes the five CSV families and summary.json into `dir`.
inline void emit_report(const BacktestReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create output directory " + dir.string());
  }
  using detail::fmt;

  auto mse_vs_l = detail::open_for_write(dir / "mse_vs_L.csv");
  mse_vs_l << "M,L,cond_ww,mse_rd\n";
  for (const MseCurve& curve : report.curves) {
    for (const CurvePoint& p : curve.points) {
      mse_vs_l << curve.m << ',' << p.l << ',' << fmt(p.cond_ww) << ',' << fmt(p.mse_rd) << '\n';
    }
  }

  auto best = detail::open_for_write(dir / "best_mse.csv");
  best << "M,cap,best_L,mse_unc,mse_gb,mse_rd\n";
  auto cond = detail::open_for_write(dir / "condition.csv");
  cond << "M,cond_yy,cond_ww\n";
  auto dir_csv = detail::open_for_write(dir / "directional.csv");
  dir_csv << "M,cap,method,day,D_j\n";
  auto vol = detail::open_for_write(dir / "volatility.csv");
  vol << "M,cap,method,day,std\n";

  for (const BacktestCell& c : report.cells) {
    if (c.skipped) continue;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    best << c.m << ',' << fmt(c.cap) << ',' << c.best_l << ',' << fmt(c.unc.mse.empirical_mse) << ','
         << fmt(c.gb.available ? c.gb.mse.empirical_mse : nan) << ',' << fmt(c.rd.mse.empirical_mse)
         << '\n';
    cond << c.m << ',' << fmt(c.cond_yy) << ',' << fmt(c.cond_ww) << '\n';
    for (const MethodResult* r : {&c.unc, &c.gb, &c.rd}) {
      if (!r->available) continue;
      for (Eigen::Index j = 0; j < r->directional.per_day.size(); ++j) {
        dir_csv << c.m << ',' << fmt(c.cap) << ',' << to_string(r->method) << ',' << j + 1 << ','
                << fmt(r->directional.per_day(j)) << '\n';
      }
      for (Eigen::Index j = 0; j < r->volatility.size(); ++j) {
        vol << c.m << ',' << fmt(c.cap) << ',' << to_string(r->method) << ',' << j + 1 << ','
            << fmt(r->volatility(j)) << '\n';
      }
    }
  }

  auto summary = detail::open_for_write(dir / "summary.json");
  summary << report_to_json(report).dump(2) << '\n';
  for (std::ofstream* f : {&mse_vs_l, &best, &cond, &dir_csv, &vol, &summary}) {
    f->flush();
    if (!*f) throw IoError("write failed in " + dir.string());
  }
}

}  // namespace subspace_forecast

#endif  // SUBSPACE_FORECAST_BACKTEST_HPP
