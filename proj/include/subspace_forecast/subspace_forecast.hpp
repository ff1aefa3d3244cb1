#ifndef SUBSPACE_FORECAST_SUBSPACE_FORECAST_HPP
#define SUBSPACE_FORECAST_SUBSPACE_FORECAST_HPP

#include "subspace_forecast/errors.hpp"
#include "subspace_forecast/io.hpp"
#include "subspace_forecast/data_pipeline.hpp"
#include "subspace_forecast/covariance_model.hpp"
#include "subspace_forecast/estimators.hpp"
#include "subspace_forecast/metrics.hpp"
#include "subspace_forecast/synthetic_oracle.hpp"
#include "subspace_forecast/oracle_suite.hpp"
#include "subspace_forecast/backtest.hpp"

#endif  // SUBSPACE_FORECAST_SUBSPACE_FORECAST_HPP
