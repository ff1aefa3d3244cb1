// Command-line front end: forecast, backtest, sweep, verify.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical error.

#include <cstdint>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "subspace_forecast/subspace_forecast.hpp"

namespace sf = subspace_forecast;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("subspace_forecast");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  const char* env = std::getenv("SUBSPACE_FORECAST_LOG");
  const std::string level = env ? env : "info";
  if (level == "quiet") {
    spdlog::set_level(spdlog::level::off);
  } else if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else {
    spdlog::set_level(spdlog::level::info);
  }
}

/// Numeric tokens are used as-is; anything else is hashed (FNV-1a) so every token is reproducible.
std::uint64_t seed_from_token(const std::string& token) {
  if (!token.empty() && token.find_first_not_of("0123456789") == std::string::npos) {
    return std::stoull(token);
  }
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : token) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << v[i];
  return os.str();
}

std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + sf::format_double(v[i]);
  return s;
}

struct ForecastOptions {
  std::string csv;
  std::string ticker;
  std::size_t m = 0;
  std::size_t h = 10;
  double cap = 1e4;
  std::string method = "rd";
  std::size_t fixed_l = 0;
  std::string q_rule = "m";
};

struct SweepOptions {
  std::string csv;
  std::string ticker;
  std::vector<std::size_t> m_list;
  std::size_t h = 10;
  std::vector<double> caps{1e3, 1e4};
  std::size_t n_test = 2200;
  std::string out;
  std::string q_rule = "m";
  std::string objective = "theoretical";
};

struct VerifyOptions {
  std::string seed = "20160101";
  long long n = 100000;
  std::string fault = "none";
};

int run_forecast(const ForecastOptions& opt) {
  const sf::Method method = sf::parse_method(opt.method);
  spdlog::info("forecast: csv={} ticker={} m={} h={} method={} cap={} l={} q-rule={}", opt.csv,
               opt.ticker, opt.m, opt.h, opt.method, sf::format_double(opt.cap),
               opt.fixed_l == 0 ? std::string("auto") : std::to_string(opt.fixed_l), opt.q_rule);

  const sf::PriceSeries series = sf::load_csv(opt.csv, opt.ticker);
  const sf::WindowConfig cfg = sf::WindowConfig::from_horizon(opt.m, opt.h);
  const std::size_t n = cfg.window_length;
  if (series.size() < n + 1) {
    throw sf::InsufficientDataError("forecast: need two complete windows", n + 1, series.size());
  }
  const std::size_t k = series.size() - n + 1;
  const sf::DataMatrix train = sf::normalize_and_center(sf::build_hankel(series, n, k), cfg);
  const sf::CovarianceModel model = sf::empirical_covariance(train);

  sf::Estimator est;
  switch (method) {
    case sf::Method::kUnconditional:
      est = sf::fit_unconditional(model);
      break;
    case sf::Method::kGaussBayes:
      est = sf::fit_gauss_bayes(model);
      break;
    case sf::Method::kReducedDimension: {
      Eigen::Index l = static_cast<Eigen::Index>(opt.fixed_l);
      if (l == 0) l = sf::select_L(model, opt.cap).l;
      est = sf::fit_reduced_dimension(model, l);
      if (!(est.condition <= opt.cap)) throw sf::NoFeasibleSubspaceError(opt.cap, est.condition);
      break;
    }
  }

  const auto& prices = series.prices();
  const std::span<const double> last(prices.data() + prices.size() - cfg.observation_length,
                                     cfg.observation_length);
  const sf::Observation obs = sf::prepare_observation(last, train);
  const Eigen::VectorXd point = sf::denormalize_forecast(sf::predict(est, obs.centered), train.mean, obs.scale);
  const Eigen::VectorXd stdev = sf::volatility(est, obs.scale);

  std::cout << "# ticker=" << series.ticker() << " last=" << series.dates().back()
            << " method=" << sf::to_string(method) << " M=" << opt.m << " H=" << opt.h
            << " windows=" << k << '\n';
  if (method == sf::Method::kReducedDimension) {
    std::cout << "# L=" << est.subspace_dim << " cond_ww=" << sf::format_double(est.condition) << '\n';
  } else if (method == sf::Method::kGaussBayes) {
    std::cout << "# cond_yy=" << sf::format_double(est.condition) << '\n';
  }
  std::cout << std::left << std::setw(6) << "day" << std::setw(26) << "forecast" << "std\n";
  for (Eigen::Index j = 0; j < point.size(); ++j) {
    std::cout << std::left << std::setw(6) << ("+" + std::to_string(j + 1)) << std::setw(26)
              << sf::format_double(point(j)) << sf::format_double(stdev(j)) << '\n';
  }
  return kExitOk;
}

int run_sweep(const SweepOptions& opt, const char* name) {
  sf::SweepConfig sweep = opt.m_list.empty() ? sf::SweepConfig::default_grid() : sf::SweepConfig{};
  if (!opt.m_list.empty()) sweep.m_values = opt.m_list;
  sweep.horizon = opt.h;
  sweep.caps = opt.caps;
  sweep.n_test = opt.n_test;
  sweep.objective = opt.objective == "validation" ? sf::SelectionObjective::kValidationMse
                                                  : sf::SelectionObjective::kTheoreticalRdMse;
  sweep.validate();
  spdlog::info("{}: csv={} ticker={} m-list={} h={} caps={} n-test={} objective={} q-rule={} out={}",
               name, opt.csv, opt.ticker, join(sweep.m_values), sweep.horizon,
               join_doubles(sweep.caps), sweep.n_test, sf::to_string(sweep.objective), opt.q_rule,
               opt.out.empty() ? std::string("(none)") : opt.out);

  const sf::PriceSeries series = sf::load_csv(opt.csv, opt.ticker);
  const sf::BacktestReport report = sf::run_backtest(series, sweep, [](const sf::BacktestCell& c) {
    std::cout << "M=" << c.m << " cap=" << sf::format_double(c.cap);
    if (c.skipped) {
      std::cout << " skipped: " << c.skip_reason << '\n';
      return;
    }
    std::cout << " L=" << c.best_l << " cond_yy=" << sf::format_double(c.cond_yy)
              << " cond_ww=" << sf::format_double(c.cond_ww)
              << " mse_unc=" << sf::format_double(c.unc.mse.empirical_mse) << " mse_gb="
              << (c.gb.available ? sf::format_double(c.gb.mse.empirical_mse) : std::string("n/a"))
              << " mse_rd=" << sf::format_double(c.rd.mse.empirical_mse)
              << " dir_rd=" << sf::format_double(c.rd.directional.mean_over_days) << '\n';
  });
  if (!opt.out.empty()) {
    sf::emit_report(report, opt.out);
    spdlog::info("wrote report to {}", opt.out);
  }
  std::size_t skipped = 0;
  for (const auto& c : report.cells) skipped += c.skipped ? 1 : 0;
  if (skipped > 0) spdlog::warn("{} of {} cells skipped", skipped, report.cells.size());
  return kExitOk;
}

int run_verify(const VerifyOptions& opt) {
  if (opt.n < 1) throw sf::ArgumentError("verify: --n must be positive");
  const sf::OracleFault fault =
      opt.fault == "zero-gb-coeff" ? sf::OracleFault::kZeroGaussBayesCoeff : sf::OracleFault::kNone;
  const std::uint64_t seed = seed_from_token(opt.seed);
  spdlog::info("verify: seed={} ({}) n={} fault={}", opt.seed, seed, opt.n, opt.fault);

  const sf::OracleSuiteResult result =
      sf::run_oracle_suite(sf::default_oracle_fixture(seed), static_cast<Eigen::Index>(opt.n), fault);
  std::cout << "# oracle suite: D=30 m=20 H=10 seed=" << opt.seed << " n=" << opt.n << '\n';
  if (result.insufficient_samples) {
    std::cout << "# ADVISORY: insufficient samples (n < " << sf::kMinOracleSamples
              << "); checks reported with widened tolerances and not enforced\n";
  }
  for (const sf::OracleCheck& c : result.checks) {
    const char* status = c.passed() ? "PASS" : (c.advisory ? "WARN" : "FAIL");
    std::cout << '[' << status << "] " << c.name << ": value=" << sf::format_double(c.value)
              << " reference=" << sf::format_double(c.reference)
              << (c.upper_bound ? " bound=value<=reference+tol" : " bound=|value-reference|<=tol")
              << " tol=" << sf::format_double(c.tolerance)
              << " margin=" << sf::format_double(c.margin()) << '\n';
  }
  const bool ok = result.all_passed();
  std::cout << (ok ? "verify: all checks passed\n" : "verify: FAILED\n");
  return ok ? kExitOk : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Subspace-projected linear-Gaussian price forecasting"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "Print this help message and exit");  // -h is taken by the horizon flag

  ForecastOptions fopt;
  auto* forecast = app.add_subcommand("forecast", "Forecast the next H prices from the latest M");
  forecast->add_option("--csv", fopt.csv, "date,close price file")->required()->check(CLI::ExistingFile);
  forecast->add_option("--ticker", fopt.ticker, "Label for the series");
  forecast->add_option("--m", fopt.m, "Observation length M (days)")->required()->check(CLI::Range(2, 1 << 20));
  forecast->add_option("--h", fopt.h, "Horizon H (days)")->check(CLI::Range(1, 1 << 20))->capture_default_str();
  forecast->add_option("--cap", fopt.cap, "Condition-number cap for S_ww")->check(CLI::Range(1.0, 1e300))->capture_default_str();
  forecast->add_option("--method", fopt.method, "unc, gb or rd")->check(CLI::IsMember({"unc", "gb", "rd"}))->capture_default_str();
  forecast->add_option("--l", fopt.fixed_l, "Fixed subspace dimension L (rd only; default: best under cap)");
  forecast->add_option("--q-rule", fopt.q_rule, "Normalization day rule")->check(CLI::IsMember({"m"}))->capture_default_str();

  SweepOptions bopt;
  auto* backtest = app.add_subcommand("backtest", "Out-of-sample evaluation for a single M");
  std::size_t single_m = 0;
  backtest->add_option("--csv", bopt.csv)->required()->check(CLI::ExistingFile);
  backtest->add_option("--ticker", bopt.ticker);
  backtest->add_option("--m", single_m, "Observation length M")->required()->check(CLI::Range(2, 1 << 20));
  backtest->add_option("--h", bopt.h)->check(CLI::Range(1, 1 << 20))->capture_default_str();
  backtest->add_option("--caps", bopt.caps, "Condition-number caps")->capture_default_str();
  backtest->add_option("--n-test", bopt.n_test, "Test windows")->check(CLI::Range(1, 1 << 30))->capture_default_str();
  backtest->add_option("--out", bopt.out, "Output directory for CSV/JSON report");
  backtest->add_option("--q-rule", bopt.q_rule)->check(CLI::IsMember({"m"}))->capture_default_str();
  backtest->add_option("--objective", bopt.objective, "L selection objective")->check(CLI::IsMember({"theoretical", "validation"}))->capture_default_str();

  SweepOptions sopt;
  auto* sweep = app.add_subcommand("sweep", "Out-of-sample evaluation over a grid of M and caps");
  sweep->add_option("--csv", sopt.csv)->required()->check(CLI::ExistingFile);
  sweep->add_option("--ticker", sopt.ticker);
  sweep->add_option("--m-list", sopt.m_list, "Observation lengths (default 20,50,...,440)");
  sweep->add_option("--h", sopt.h)->check(CLI::Range(1, 1 << 20))->capture_default_str();
  sweep->add_option("--caps", sopt.caps, "Condition-number caps")->capture_default_str();
  sweep->add_option("--n-test", sopt.n_test, "Test windows")->check(CLI::Range(1, 1 << 30))->capture_default_str();
  sweep->add_option("--out", sopt.out, "Output directory for CSV/JSON report");
  sweep->add_option("--q-rule", sopt.q_rule)->check(CLI::IsMember({"m"}))->capture_default_str();
  sweep->add_option("--objective", sopt.objective, "L selection objective")->check(CLI::IsMember({"theoretical", "validation"}))->capture_default_str();

  VerifyOptions vopt;
  auto* verify = app.add_subcommand("verify", "Closed-form versus Monte-Carlo oracle checks");
  verify->add_option("--seed", vopt.seed, "Seed token")->capture_default_str();
  verify->add_option("--n", vopt.n, "Monte-Carlo draws")->capture_default_str();
  verify->add_option("--inject-fault", vopt.fault, "Negative control (testing only)")
      ->check(CLI::IsMember({"none", "zero-gb-coeff"}))
      ->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*forecast) {
      if (fopt.ticker.empty()) fopt.ticker = std::filesystem::path(fopt.csv).stem().string();
      return run_forecast(fopt);
    }
    if (*backtest) {
      if (bopt.ticker.empty()) bopt.ticker = std::filesystem::path(bopt.csv).stem().string();
      bopt.m_list = {single_m};
      return run_sweep(bopt, "backtest");
    }
    if (*sweep) {
      if (sopt.ticker.empty()) sopt.ticker = std::filesystem::path(sopt.csv).stem().string();
      return run_sweep(sopt, "sweep");
    }
    if (*verify) return run_verify(vopt);
  } catch (const sf::ArgumentError& e) {
    spdlog::error("{}", e.what());
    return kExitUsage;
  } catch (const sf::IllConditionedError& e) {
    spdlog::error("{}", e.what());
    return kExitNumerical;
  } catch (const sf::NoFeasibleSubspaceError& e) {
    spdlog::error("{}", e.what());
    return kExitNumerical;
  } catch (const sf::Error& e) {
    spdlog::error("{}", e.what());
    return kExitData;
  }
  return kExitUsage;
}
