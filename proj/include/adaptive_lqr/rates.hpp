#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "adaptive_lqr/lqr_sim.hpp"

namespace adaptive_lqr {

struct RatePoint {
  double T = 0.0;
  double statistic = 0.0;
};

// OLS fit of log(statistic) = intercept + slope * log(T).
struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;  // NaN with two points
  double ci_low = 0.0;        // 95% Student-t interval on the slope
  double ci_high = 0.0;
  double r_squared = 0.0;
  std::vector<std::pair<double, double>> points;  // (log T, log statistic)
};

// Throws kInvalidInput on a non-positive T or statistic and
// kInsufficientData with fewer than max(min_points, 2) points or a single
// distinct T.
RateFit FitRate(const std::vector<RatePoint>& points, int min_points = 2);

// Nearest-rank empirical quantile: the ceil(q N)-th smallest value.
// Throws kInvalidInput unless 0 < q < 1, kInsufficientData on empty input.
double NearestRankQuantile(std::vector<double> values, double q);

struct QuantileRow {
  std::int64_t T = 0;
  std::size_t count = 0;
  std::vector<double> regret;  // one entry per requested level
  std::vector<double> est_err_theta;
  std::vector<double> est_err_K;
};

// Per-horizon quantiles over non-failed records, ordered by T.
std::vector<QuantileRow> AggregateQuantiles(const std::vector<RunRecord>& records,
                                            const std::vector<double>& levels);

// Spearman rank correlation with an exact one-sided permutation p-value for
// the alternative "decreasing" (rho < 0). Ties get average ranks. Intended for
// short series (n <= 10); larger n fall back to a t approximation.
struct TrendTest {
  double rho = 0.0;
  double p_decreasing = 1.0;
};
TrendTest SpearmanTrend(const std::vector<double>& x, const std::vector<double>& y);

// Acceptance band on a fitted slope; unset ends are open.
struct SlopeBand {
  std::optional<double> lo;
  std::optional<double> hi;
  bool Contains(double slope) const {
    return (!lo || slope >= *lo) && (!hi || slope <= *hi);
  }
};

struct RateEntry {
  std::string name;
  SlopeBand band;
  std::vector<RatePoint> medians;
  std::optional<RateFit> fit;  // empty when a median is non-positive
  std::string note;
  bool pass = false;
};

struct RateReport {
  std::vector<std::int64_t> horizons;
  std::size_t records_used = 0;
  std::size_t records_failed = 0;
  std::vector<RateEntry> entries;
  // Median regret > 0 at every horizon >= 2^12.
  bool regret_positive = false;
  bool all_pass = false;
};

inline constexpr std::int64_t kRegretSignHorizon = 4096;

/// Fits the growth exponents of the per-horizon medians of regret,
/// estimation errors, the Gram subspace statistics and |D_T|, and checks them
/// against the acceptance bands. Throws kInsufficientData with fewer than
/// `min_horizons` distinct horizons.
RateReport BuildRateReport(const std::vector<RunRecord>& records,
                           int min_horizons = 4);

}  // namespace adaptive_lqr
