#pragma once

#include <string>

#include "adaptive_lqr/rates.hpp"

namespace adaptive_lqr {

// Standalone SVG with two log-log panels: median regret, and median
// estimation errors (Theta and K), each with its fitted power law. Output is a
// pure function of the report.
std::string RenderRatePlot(const RateReport& report);

}  // namespace adaptive_lqr
