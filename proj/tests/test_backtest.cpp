#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "fixtures.hpp"
#include "subspace_forecast/backtest.hpp"

namespace subspace_forecast {
namespace {

std::size_t count_lines(const std::filesystem::path& p) {
  std::istringstream in(testing::read_text(p));
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

CovarianceModel halving_spectrum_model() {
  Eigen::VectorXd s(30);
  for (Eigen::Index k = 0; k < 30; ++k) s(k) = std::pow(0.5, static_cast<double>(k));
  return CovarianceModel(covariance_with_spectrum(s, 7), 20);
}

TEST(SelectL, DiagonalPicksSmallestL) {
  Eigen::VectorXd d(8);
  d << 8, 7, 6, 5, 4, 3, 2, 1;
  const CovarianceModel model(Eigen::MatrixXd(d.asDiagonal()), 5);
  const LSelection sel = select_L(model, 10.0);
  EXPECT_EQ(sel.l, 1);
  EXPECT_DOUBLE_EQ(sel.cond_ww, 1.0);
}

TEST(SelectL, InfeasibleCapReportsMinimum) {
  const CovarianceModel model = halving_spectrum_model();
  const std::vector<CurvePoint> curve = subspace_curve(model, SelectionObjective::kTheoreticalRdMse);
  double min_cond = curve.front().cond_ww;
  for (const CurvePoint& p : curve) min_cond = std::min(min_cond, p.cond_ww);
  if (min_cond > 1.0 + 1e-9) {
    EXPECT_THROW(select_from_curve(curve, 1.0), NoFeasibleSubspaceError);
  }
  EXPECT_THROW(select_L(model, 0.5), ArgumentError);
}

TEST(SelectL, LooserCapsNeverShrinkL) {
  const CovarianceModel model = halving_spectrum_model();
  const auto curve = subspace_curve(model, SelectionObjective::kTheoreticalRdMse);
  Eigen::Index prev = 0;
  for (double cap : {1e1, 1e2, 1e3, 1e4, 1e5, 1e6}) {
    const LSelection sel = select_from_curve(curve, cap);
    EXPECT_LE(sel.cond_ww, cap);
    EXPECT_GE(sel.l, prev) << "cap=" << cap;
    prev = sel.l;
  }
}

TEST(SubspaceCurve, NonincreasingTheoreticalMse) {
  const auto curve = subspace_curve(halving_spectrum_model(), SelectionObjective::kTheoreticalRdMse);
  ASSERT_EQ(curve.size(), 20u);
  for (std::size_t i = 1; i < curve.size(); ++i) {
    EXPECT_LE(curve[i].mse_rd, curve[i - 1].mse_rd * (1.0 + 1e-10)) << "L=" << curve[i].l;
  }
  EXPECT_THROW(subspace_curve(halving_spectrum_model(), SelectionObjective::kValidationMse),
               ArgumentError);
}

TEST(RunBacktest, GaussBayesMatchesKnownCovariance) {
  const double level = 100.0, phi = 0.9, sigma = 0.5;
  const auto prices = testing::ar1_level_prices(60000, 3, level, phi, sigma);
  SweepConfig sweep;
  sweep.m_values = {10};
  sweep.horizon = 5;
  sweep.caps = {1e6};
  sweep.n_test = 20000;
  const BacktestReport report = run_backtest(PriceSeries::from_prices("AR", prices), sweep);
  ASSERT_EQ(report.cells.size(), 1u);
  const BacktestCell& cell = report.cells.front();
  ASSERT_FALSE(cell.skipped) << cell.skip_reason;
  ASSERT_TRUE(cell.gb.available);

  const CovarianceModel known(testing::ar1_window_covariance(15, 10, level, phi, sigma), 9);
  const double closed = theoretical_mse(known, fit_gauss_bayes(known));
  EXPECT_NEAR(cell.gb.mse.empirical_mse, closed, 0.05 * closed);
  EXPECT_NEAR(cell.gb.mse.theoretical_mse, closed, 0.05 * closed);
  EXPECT_LE(cell.gb.mse.empirical_mse, cell.unc.mse.empirical_mse);
  EXPECT_EQ(cell.n_test, 20000u);
  EXPECT_EQ(cell.n_train, 60000u - 15u + 1u - 20000u);
}

TEST(RunBacktest, CellsRespectCapsAndSkipShortSeries) {
  const auto prices = testing::random_walk_prices(1500, 42);
  SweepConfig sweep;
  sweep.m_values = {20, 50, 1600};
  sweep.caps = {1e2, 1e3, 1e4};
  sweep.n_test = 100;
  std::size_t callbacks = 0;
  const BacktestReport report = run_backtest(PriceSeries::from_prices("RW", prices), sweep,
                                             [&](const BacktestCell&) { ++callbacks; });
  ASSERT_EQ(report.cells.size(), 9u);
  EXPECT_EQ(callbacks, 9u);
  EXPECT_EQ(report.curves.size(), 2u);
  for (const BacktestCell& c : report.cells) {
    if (c.m == 1600) {
      EXPECT_TRUE(c.skipped);
      EXPECT_NE(c.skip_reason.find("insufficient data"), std::string::npos);
      continue;
    }
    if (c.skipped) continue;
    EXPECT_LE(c.cond_ww, c.cap);
    EXPECT_GE(c.best_l, 1);
    EXPECT_LE(c.best_l, static_cast<Eigen::Index>(c.m - 1));
    for (const MethodResult* r : {&c.unc, &c.gb, &c.rd}) {
      if (!r->available) continue;
      for (Eigen::Index j = 0; j < r->directional.per_day.size(); ++j) {
        EXPECT_GE(r->directional.per_day(j), 0.0);
        EXPECT_LE(r->directional.per_day(j), 1.0);
      }
    }
  }
}

TEST(RunBacktest, SingleTestWindow) {
  const auto prices = testing::random_walk_prices(60, 8);
  SweepConfig sweep;
  sweep.m_values = {5};
  sweep.horizon = 3;
  sweep.caps = {1e8};
  sweep.n_test = 1;
  const BacktestReport report = run_backtest(PriceSeries::from_prices("X", prices), sweep);
  ASSERT_EQ(report.cells.size(), 1u);
  EXPECT_FALSE(report.cells[0].skipped);
  EXPECT_EQ(report.cells[0].n_test, 1u);
  EXPECT_EQ(report.cells[0].rd.directional.n_samples, 1);
}

TEST(RunBacktest, ValidationObjective) {
  const auto prices = testing::random_walk_prices(1200, 17);
  SweepConfig sweep;
  sweep.m_values = {20};
  sweep.caps = {1e4};
  sweep.n_test = 100;
  sweep.objective = SelectionObjective::kValidationMse;
  const BacktestReport report = run_backtest(PriceSeries::from_prices("V", prices), sweep);
  ASSERT_EQ(report.cells.size(), 1u);
  const BacktestCell& c = report.cells[0];
  ASSERT_FALSE(c.skipped) << c.skip_reason;
  EXPECT_LE(c.cond_ww, 1e4);
  const auto& pts = report.curves[0].points;
  for (const CurvePoint& p : pts) {
    if (p.cond_ww <= 1e4 && std::isfinite(p.objective)) {
      EXPECT_GE(p.objective, pts[static_cast<std::size_t>(c.best_l - 1)].objective);
    }
  }
}

TEST(EmitReport, EmptyReportWritesHeaders) {
  testing::TempDir dir("emit_empty");
  BacktestReport report;
  report.ticker = "NONE";
  report.config.m_values = {20};
  emit_report(report, dir.path());
  for (const char* f : {"mse_vs_L.csv", "best_mse.csv", "condition.csv", "directional.csv",
                        "volatility.csv"}) {
    EXPECT_EQ(count_lines(dir / f), 1u) << f;
  }
  const auto summary = nlohmann::json::parse(testing::read_text(dir / "summary.json"));
  EXPECT_TRUE(summary["cells"].empty());
}

TEST(EmitReport, RowCountsAndDeterminism) {
  const auto prices = testing::random_walk_prices(800, 5);
  SweepConfig sweep;
  sweep.m_values = {20, 30};
  sweep.horizon = 4;
  sweep.caps = {1e3, 1e4};
  sweep.n_test = 50;
  const BacktestReport report = run_backtest(PriceSeries::from_prices("RW", prices), sweep);
  std::size_t live = 0, methods = 0;
  for (const BacktestCell& c : report.cells) {
    if (c.skipped) continue;
    ++live;
    methods += (c.unc.available ? 1 : 0) + (c.gb.available ? 1 : 0) + (c.rd.available ? 1 : 0);
  }
  testing::TempDir a("emit_a"), b("emit_b");
  emit_report(report, a.path());
  emit_report(report, b.path());
  EXPECT_EQ(count_lines(a / "mse_vs_L.csv"), 1u + 19u + 29u);
  EXPECT_EQ(count_lines(a / "best_mse.csv"), 1u + live);
  EXPECT_EQ(count_lines(a / "condition.csv"), 1u + live);
  EXPECT_EQ(count_lines(a / "directional.csv"), 1u + 4u * methods);
  EXPECT_EQ(count_lines(a / "volatility.csv"), 1u + 4u * methods);
  for (const char* f : {"mse_vs_L.csv", "best_mse.csv", "condition.csv", "directional.csv",
                        "volatility.csv", "summary.json"}) {
    EXPECT_EQ(testing::read_text(a / f), testing::read_text(b / f)) << f;
  }
}

TEST(EmitReport, UnwritableDirectory) {
  testing::TempDir dir("emit_bad");
  testing::write_text(dir / "file", "x");
  EXPECT_THROW(emit_report(BacktestReport{}, dir / "file"), IoError);
}

}  // namespace
}  // namespace subspace_forecast
