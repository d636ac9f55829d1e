#pragma once

#include <span>

namespace qho {

// Least-squares fit of log y = log C + slope * log x over entries with x, y > 0.
struct PowerFit {
  double C = 0.0;
  double slope = 0.0;
  std::size_t used = 0;
};

PowerFit fit_power_law(std::span<const double> x, std::span<const double> y);

}  // namespace qho
