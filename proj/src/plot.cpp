#include "adaptive_lqr/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string_view>

#include "adaptive_lqr/errors.hpp"

namespace adaptive_lqr {

namespace {

constexpr double kPanelWidth = 420.0;
constexpr double kPanelHeight = 320.0;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 60.0;

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string Sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

struct Series {
  const RateEntry* entry;
  const char* color;
  const char* label;
};

const RateEntry* Find(const RateReport& report, std::string_view name) {
  for (const RateEntry& e : report.entries) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

class Panel {
 public:
  Panel(double x_offset, double lx_min, double lx_max, double ly_min, double ly_max)
      : x0_(x_offset + kMarginLeft),
        x1_(x_offset + kPanelWidth - kMarginRight),
        y0_(kMarginTop),
        y1_(kPanelHeight - kMarginBottom),
        lx_min_(lx_min),
        lx_max_(lx_max),
        ly_min_(ly_min),
        ly_max_(ly_max) {}

  double X(double lx) const { return x0_ + (lx - lx_min_) / (lx_max_ - lx_min_) * (x1_ - x0_); }
  double Y(double ly) const { return y1_ - (ly - ly_min_) / (ly_max_ - ly_min_) * (y1_ - y0_); }

  void Axes(std::ostringstream& os, const std::string& title, const std::string& ylabel) const {
    os << "<rect x=\"" << Num(x0_) << "\" y=\"" << Num(y0_) << "\" width=\""
       << Num(x1_ - x0_) << "\" height=\"" << Num(y1_ - y0_)
       << "\" fill=\"none\" stroke=\"#333\"/>\n";
    os << "<text x=\"" << Num(0.5 * (x0_ + x1_)) << "\" y=\"" << Num(y0_ - 15)
       << "\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
    os << "<text x=\"" << Num(0.5 * (x0_ + x1_)) << "\" y=\"" << Num(y1_ + 40)
       << "\" text-anchor=\"middle\" font-size=\"12\">horizon T (log scale)</text>\n";
    os << "<text x=\"" << Num(x0_ - 55) << "\" y=\"" << Num(0.5 * (y0_ + y1_))
       << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 "
       << Num(x0_ - 55) << " " << Num(0.5 * (y0_ + y1_)) << ")\">" << ylabel
       << "</text>\n";
    // x ticks on powers of two, y ticks on powers of ten.
    const double l2 = std::log(2.0);
    for (int k = static_cast<int>(std::ceil(lx_min_ / l2 - 1e-9));
         k <= static_cast<int>(std::floor(lx_max_ / l2 + 1e-9)); ++k) {
      const double px = X(k * l2);
      os << "<line x1=\"" << Num(px) << "\" y1=\"" << Num(y1_) << "\" x2=\"" << Num(px)
         << "\" y2=\"" << Num(y1_ + 5) << "\" stroke=\"#333\"/>\n";
      os << "<text x=\"" << Num(px) << "\" y=\"" << Num(y1_ + 18)
         << "\" text-anchor=\"middle\" font-size=\"10\">2^" << k << "</text>\n";
    }
    const double l10 = std::log(10.0);
    for (int k = static_cast<int>(std::ceil(ly_min_ / l10 - 1e-9));
         k <= static_cast<int>(std::floor(ly_max_ / l10 + 1e-9)); ++k) {
      const double py = Y(k * l10);
      os << "<line x1=\"" << Num(x0_ - 5) << "\" y1=\"" << Num(py) << "\" x2=\"" << Num(x0_)
         << "\" y2=\"" << Num(py) << "\" stroke=\"#333\"/>\n";
      os << "<text x=\"" << Num(x0_ - 8) << "\" y=\"" << Num(py + 3)
         << "\" text-anchor=\"end\" font-size=\"10\">1e" << k << "</text>\n";
    }
  }

  void Draw(std::ostringstream& os, const Series& s, int legend_row) const {
    for (const RatePoint& p : s.entry->medians) {
      if (!(p.statistic > 0.0)) continue;
      os << "<circle cx=\"" << Num(X(std::log(p.T))) << "\" cy=\""
         << Num(Y(std::log(p.statistic))) << "\" r=\"3.5\" fill=\"" << s.color
         << "\"/>\n";
    }
    std::string legend = std::string(s.label);
    if (s.entry->fit) {
      const RateFit& f = *s.entry->fit;
      os << "<line x1=\"" << Num(X(lx_min_)) << "\" y1=\""
         << Num(Y(f.intercept + f.slope * lx_min_)) << "\" x2=\"" << Num(X(lx_max_))
         << "\" y2=\"" << Num(Y(f.intercept + f.slope * lx_max_)) << "\" stroke=\""
         << s.color << "\" stroke-width=\"1.5\"/>\n";
      legend += " slope " + Num(f.slope);
    } else {
      legend += " slope n/a";
    }
    os << "<text x=\"" << Num(x0_ + 8) << "\" y=\"" << Num(y0_ + 16 + 14 * legend_row)
       << "\" font-size=\"11\" fill=\"" << s.color << "\">" << legend << "</text>\n";
  }

 private:
  double x0_, x1_, y0_, y1_;
  double lx_min_, lx_max_, ly_min_, ly_max_;
};

void Bounds(const std::vector<Series>& series, double* lo, double* hi) {
  *lo = std::numeric_limits<double>::infinity();
  *hi = -std::numeric_limits<double>::infinity();
  for (const Series& s : series) {
    for (const RatePoint& p : s.entry->medians) {
      if (!(p.statistic > 0.0)) continue;
      *lo = std::min(*lo, std::log(p.statistic));
      *hi = std::max(*hi, std::log(p.statistic));
    }
  }
  if (!std::isfinite(*lo)) {
    *lo = 0.0;
    *hi = 1.0;
  }
  const double pad = std::max(0.1 * (*hi - *lo), 0.2);
  *lo -= pad;
  *hi += pad;
}

}  // namespace

std::string RenderRatePlot(const RateReport& report) {
  const RateEntry* regret = Find(report, "regret");
  const RateEntry* theta = Find(report, "est_err_theta");
  const RateEntry* gain = Find(report, "est_err_K");
  if (regret == nullptr || theta == nullptr || gain == nullptr || report.horizons.empty()) {
    throw Error(ErrorKind::kInsufficientData, "rate report lacks the plotted series");
  }
  const double lx_min = std::log(static_cast<double>(report.horizons.front())) - 0.2;
  const double lx_max = std::log(static_cast<double>(report.horizons.back())) + 0.2;

  const std::vector<Series> left = {{regret, "#1f77b4", "median regret"}};
  const std::vector<Series> right = {{theta, "#d62728", "median ||Theta_hat - Theta||"},
                                     {gain, "#2ca02c", "median ||K_hat - K||"}};
  double ly0, ly1, ry0, ry1;
  Bounds(left, &ly0, &ly1);
  Bounds(right, &ry0, &ry1);

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << Num(2 * kPanelWidth)
     << "\" height=\"" << Num(kPanelHeight) << "\" font-family=\"sans-serif\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  const Panel lp(0.0, lx_min, lx_max, ly0, ly1);
  lp.Axes(os, "Regret", "median regret (log scale)");
  for (std::size_t i = 0; i < left.size(); ++i) lp.Draw(os, left[i], static_cast<int>(i));

  const Panel rp(kPanelWidth, lx_min, lx_max, ry0, ry1);
  rp.Axes(os, "Estimation error", "median error (log scale)");
  for (std::size_t i = 0; i < right.size(); ++i) rp.Draw(os, right[i], static_cast<int>(i));

  os << "<text x=\"" << Num(kPanelWidth) << "\" y=\"" << Num(kPanelHeight - 8)
     << "\" text-anchor=\"middle\" font-size=\"10\" fill=\"#555\">records "
     << report.records_used << ", horizons " << report.horizons.size()
     << ", T " << Sci(static_cast<double>(report.horizons.front())) << " .. "
     << Sci(static_cast<double>(report.horizons.back())) << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace adaptive_lqr
