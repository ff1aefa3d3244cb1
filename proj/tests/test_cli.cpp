#include <gtest/gtest.h>

#include <cmath>

#include "cli_runner.hpp"
#include "fixtures.hpp"

namespace subspace_forecast {
namespace {

using testing::run_cli;

class Cli : public ::testing::Test {
protected:
  void SetUp() override {
    prices_ = testing::random_walk_prices(600, 99);
    csv_ = (dir_ / "rw.csv").string();
    testing::write_price_csv(csv_, prices_);
  }
  std::string csv_arg() const { return "--csv '" + csv_ + "'"; }

  testing::TempDir dir_{"cli"};
  std::vector<double> prices_;
  std::string csv_;
};

TEST_F(Cli, ForecastPrintsHorizonTable) {
  const auto r = run_cli("forecast " + csv_arg() + " --m 20", dir_.path());
  ASSERT_EQ(r.exit_code, 0) << r.out;
  EXPECT_EQ(testing::forecast_column(r.out).size(), 10u);
  EXPECT_NE(r.out.find("# L="), std::string::npos);
}

TEST_F(Cli, UnconditionalForecastIsMeanRatioPath) {
  const auto r = run_cli("forecast " + csv_arg() + " --m 20 --h 5 --method unc", dir_.path());
  ASSERT_EQ(r.exit_code, 0);
  const auto got = testing::forecast_column(r.out);
  ASSERT_EQ(got.size(), 5u);
  const std::size_t k = prices_.size() - 25 + 1;
  for (std::size_t j = 0; j < 5; ++j) {
    double ratio = 0.0;
    for (std::size_t i = 0; i < k; ++i) ratio += prices_[i + 20 + j] / prices_[i + 19];
    const double expected = ratio / static_cast<double>(k) * prices_.back();
    EXPECT_NEAR(got[j], expected, 1e-10 * expected);
  }
}

TEST_F(Cli, FullSubspaceForecastMatchesGaussBayes) {
  const auto gb = run_cli("forecast " + csv_arg() + " --m 20 --method gb", dir_.path());
  const auto rd = run_cli("forecast " + csv_arg() + " --m 20 --method rd --l 19 --cap 1e12", dir_.path());
  ASSERT_EQ(gb.exit_code, 0);
  ASSERT_EQ(rd.exit_code, 0);
  const auto a = testing::forecast_column(gb.out), b = testing::forecast_column(rd.out);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t j = 0; j < a.size(); ++j) EXPECT_NEAR(b[j], a[j], 1e-6 * std::abs(a[j]));
}

TEST_F(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run_cli("forecast " + csv_arg(), dir_.path()).exit_code, 1);
  EXPECT_EQ(run_cli("forecast " + csv_arg() + " --m 20 --method ols", dir_.path()).exit_code, 1);
  EXPECT_EQ(run_cli("forecast " + csv_arg() + " --m 20 --l 40", dir_.path()).exit_code, 1);
  EXPECT_EQ(run_cli("", dir_.path()).exit_code, 1);
}

TEST_F(Cli, DataErrorsExitTwo) {
  testing::write_text(dir_ / "bad.csv", "date,close\n2020-01-01,1\n2020-01-02,x\n");
  EXPECT_EQ(run_cli("forecast --csv '" + (dir_ / "bad.csv").string() + "' --m 5", dir_.path()).exit_code, 2);
  testing::write_price_csv(dir_ / "short.csv", {1.0, 2.0, 3.0});
  EXPECT_EQ(run_cli("forecast --csv '" + (dir_ / "short.csv").string() + "' --m 5", dir_.path()).exit_code, 2);
}

TEST_F(Cli, NumericalErrorsExitThree) {
  testing::write_price_csv(dir_ / "flat.csv", std::vector<double>(200, 10.0));
  const std::string flat = "--csv '" + (dir_ / "flat.csv").string() + "'";
  EXPECT_EQ(run_cli("forecast " + flat + " --m 10 --method gb", dir_.path()).exit_code, 3);
  EXPECT_EQ(run_cli("forecast " + csv_arg() + " --m 20 --l 19 --cap 1", dir_.path()).exit_code, 3);
}

TEST_F(Cli, SweepWritesReport) {
  testing::write_price_csv(dir_ / "small.csv", testing::random_walk_prices(100, 4));
  const std::string out = (dir_ / "report").string();
  const auto r = run_cli("sweep --csv '" + (dir_ / "small.csv").string() +
                             "' --m-list 20 --n-test 5 --out '" + out + "'",
                         dir_.path());
  ASSERT_EQ(r.exit_code, 0) << r.out;
  EXPECT_NE(r.out.find("M=20 cap=1000"), std::string::npos);
  for (const char* f : {"mse_vs_L.csv", "best_mse.csv", "condition.csv", "directional.csv",
                        "volatility.csv", "summary.json"}) {
    EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(out) / f)) << f;
  }
}

TEST_F(Cli, BacktestIsDeterministic) {
  const std::string args = "backtest " + csv_arg() + " --m 20 --n-test 100 --out ";
  ASSERT_EQ(run_cli(args + "'" + (dir_ / "a").string() + "'", dir_.path()).exit_code, 0);
  ASSERT_EQ(run_cli(args + "'" + (dir_ / "b").string() + "'", dir_.path()).exit_code, 0);
  EXPECT_EQ(testing::read_text(dir_ / "a" / "summary.json"),
            testing::read_text(dir_ / "b" / "summary.json"));
}

TEST_F(Cli, VerifySmallSampleIsAdvisory) {
  const auto r = run_cli("verify --n 10", dir_.path());
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_NE(r.out.find("ADVISORY: insufficient samples"), std::string::npos);
  EXPECT_EQ(r.out, run_cli("verify --n 10", dir_.path()).out);
  EXPECT_NE(r.out, run_cli("verify --n 10 --seed other", dir_.path()).out);
}

TEST_F(Cli, VerifyInjectedFaultExitsThree) {
  const auto r = run_cli("verify --n 20000 --inject-fault zero-gb-coeff", dir_.path());
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_NE(r.out.find("verify: FAILED"), std::string::npos);
}

}  // namespace
}  // namespace subspace_forecast
