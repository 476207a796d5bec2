#include "adaptive_lqr/rates.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>

#include <boost/math/distributions/students_t.hpp>

#include "adaptive_lqr/errors.hpp"

namespace adaptive_lqr {

namespace {

std::vector<double> AverageRanks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double Pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

double Median(std::vector<double> v) { return NearestRankQuantile(std::move(v), 0.5); }

}  // namespace

RateFit FitRate(const std::vector<RatePoint>& points, int min_points) {
  const std::size_t need = static_cast<std::size_t>(std::max(min_points, 2));
  if (points.size() < need) {
    throw Error(ErrorKind::kInsufficientData,
                "rate fit needs at least " + std::to_string(need) + " points");
  }
  RateFit fit;
  std::set<double> distinct;
  for (const RatePoint& p : points) {
    if (!(p.T > 0.0) || !std::isfinite(p.T)) ThrowInvalid("rate fit: T must be positive");
    if (!(p.statistic > 0.0) || !std::isfinite(p.statistic)) {
      ThrowInvalid("rate fit: statistic must be positive");
    }
    fit.points.emplace_back(std::log(p.T), std::log(p.statistic));
    distinct.insert(p.T);
  }
  if (distinct.size() < 2) {
    throw Error(ErrorKind::kInsufficientData, "rate fit needs two distinct T");
  }
  const double n = static_cast<double>(fit.points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [lx, ly] : fit.points) {
    mx += lx;
    my += ly;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [lx, ly] : fit.points) {
    sxx += (lx - mx) * (lx - mx);
    sxy += (lx - mx) * (ly - my);
    syy += (ly - my) * (ly - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (const auto& [lx, ly] : fit.points) {
    const double r = ly - fit.intercept - fit.slope * lx;
    ssr += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  const double dof = n - 2.0;
  if (dof > 0.0) {
    fit.stderr_slope = std::sqrt(ssr / dof / sxx);
    const boost::math::students_t dist(dof);
    const double tq = boost::math::quantile(dist, 0.975);
    fit.ci_low = fit.slope - tq * fit.stderr_slope;
    fit.ci_high = fit.slope + tq * fit.stderr_slope;
  } else {
    fit.stderr_slope = std::numeric_limits<double>::quiet_NaN();
    fit.ci_low = fit.ci_high = std::numeric_limits<double>::quiet_NaN();
  }
  return fit;
}

double NearestRankQuantile(std::vector<double> values, double q) {
  if (!(q > 0.0 && q < 1.0)) ThrowInvalid("quantile level must lie in (0, 1)");
  if (values.empty()) {
    throw Error(ErrorKind::kInsufficientData, "quantile of an empty sample");
  }
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(q * n));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

std::vector<QuantileRow> AggregateQuantiles(const std::vector<RunRecord>& records,
                                            const std::vector<double>& levels) {
  for (double q : levels) {
    if (!(q > 0.0 && q < 1.0)) ThrowInvalid("quantile level must lie in (0, 1)");
  }
  std::map<std::int64_t, std::vector<const RunRecord*>> groups;
  for (const RunRecord& r : records) {
    auto& g = groups[r.T];
    if (!r.failed) g.push_back(&r);
  }
  if (groups.empty()) throw Error(ErrorKind::kInsufficientData, "no records");
  std::vector<QuantileRow> rows;
  for (const auto& [T, group] : groups) {
    if (group.empty()) {
      throw Error(ErrorKind::kInsufficientData,
                  "no usable records at T=" + std::to_string(T));
    }
    QuantileRow row;
    row.T = T;
    row.count = group.size();
    std::vector<double> regret, theta, gain;
    for (const RunRecord* r : group) {
      regret.push_back(r->regret);
      theta.push_back(r->est_err_theta);
      gain.push_back(r->est_err_K);
    }
    for (double q : levels) {
      row.regret.push_back(NearestRankQuantile(regret, q));
      row.est_err_theta.push_back(NearestRankQuantile(theta, q));
      row.est_err_K.push_back(NearestRankQuantile(gain, q));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

TrendTest SpearmanTrend(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) ThrowInvalid("trend test: length mismatch");
  if (x.size() < 3) {
    throw Error(ErrorKind::kInsufficientData, "trend test needs 3 points");
  }
  const std::vector<double> rx = AverageRanks(x);
  std::vector<double> ry = AverageRanks(y);
  TrendTest out;
  out.rho = Pearson(rx, ry);
  const std::size_t n = x.size();
  if (n <= 10) {
    std::sort(ry.begin(), ry.end());
    std::size_t at_most = 0, total = 0;
    do {
      ++total;
      if (Pearson(rx, ry) <= out.rho + 1e-12) ++at_most;
    } while (std::next_permutation(ry.begin(), ry.end()));
    out.p_decreasing = static_cast<double>(at_most) / static_cast<double>(total);
  } else {
    const double dof = static_cast<double>(n) - 2.0;
    const double r = std::clamp(out.rho, -0.999999999, 0.999999999);
    const double t = r * std::sqrt(dof / (1.0 - r * r));
    out.p_decreasing = boost::math::cdf(boost::math::students_t(dof), t);
  }
  return out;
}

RateReport BuildRateReport(const std::vector<RunRecord>& records,
                           int min_horizons) {
  std::map<std::int64_t, std::vector<const RunRecord*>> groups;
  RateReport report;
  for (const RunRecord& r : records) {
    if (r.failed) {
      ++report.records_failed;
      continue;
    }
    groups[r.T].push_back(&r);
    ++report.records_used;
  }
  if (groups.size() < static_cast<std::size_t>(std::max(min_horizons, 2))) {
    throw Error(ErrorKind::kInsufficientData,
                "rate report needs at least " + std::to_string(min_horizons) +
                    " horizons, found " + std::to_string(groups.size()));
  }
  for (const auto& [T, g] : groups) report.horizons.push_back(T);

  using Getter = std::function<double(const RunRecord&)>;
  auto diag = [](const RunRecord& r) -> const CheckpointDiag& {
    if (r.checkpoints.empty()) {
      throw Error(ErrorKind::kInsufficientData,
                  "record at T=" + std::to_string(r.T) + " has no diagnostics");
    }
    return r.checkpoints.front();
  };
  struct Metric {
    const char* name;
    SlopeBand band;
    Getter get;
  };
  const std::vector<Metric> metrics = {
      {"regret", {0.35, 0.65}, [](const RunRecord& r) { return r.regret; }},
      {"est_err_theta", {-0.35, -0.15},
       [](const RunRecord& r) { return r.est_err_theta; }},
      {"est_err_K", {-0.35, -0.15}, [](const RunRecord& r) { return r.est_err_K; }},
      {"lam_parallel", {0.9, 1.1},
       [&](const RunRecord& r) { return diag(r).lam_parallel; }},
      {"lam_perp", {0.35, 0.75}, [&](const RunRecord& r) { return diag(r).lam_perp; }},
      {"lam_delta", {0.3, 0.75}, [&](const RunRecord& r) { return diag(r).lam_delta; }},
      {"decomp_residual", {std::nullopt, 0.75},
       [&](const RunRecord& r) { return std::abs(diag(r).decomp_residual); }},
  };

  report.all_pass = true;
  for (const Metric& m : metrics) {
    RateEntry e;
    e.name = m.name;
    e.band = m.band;
    bool positive = true;
    for (const auto& [T, group] : groups) {
      std::vector<double> values;
      values.reserve(group.size());
      for (const RunRecord* r : group) values.push_back(m.get(*r));
      const double med = Median(std::move(values));
      e.medians.push_back({static_cast<double>(T), med});
      if (!(med > 0.0)) positive = false;
    }
    if (positive) {
      e.fit = FitRate(e.medians, min_horizons);
      e.pass = e.band.Contains(e.fit->slope);
    } else {
      e.note = "non-positive median; slope unavailable";
      e.pass = false;
    }
    report.all_pass = report.all_pass && e.pass;
    report.entries.push_back(std::move(e));
  }

  report.regret_positive = true;
  for (const RatePoint& p : report.entries.front().medians) {
    if (p.T >= static_cast<double>(kRegretSignHorizon) && !(p.statistic > 0.0)) {
      report.regret_positive = false;
    }
  }
  report.all_pass = report.all_pass && report.regret_positive;
  return report;
}

}  // namespace adaptive_lqr
