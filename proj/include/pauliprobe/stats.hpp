#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace pauliprobe {

/**
 * Two-sided Wilson score interval for a binomial proportion. Used wherever
 * an empirical success rate has to be reported with a confidence statement
 * (experiment aggregates, calibration checks). Chosen over the plain normal
 * approximation because it stays inside [0, 1] and behaves sensibly at 0
 * or n successes.
 */
struct WilsonInterval {
  double lower = 0.0;
  double upper = 1.0;
};

/// The default z is the two-sided 95% normal quantile. The expression is
/// evaluated in a fixed order so results are reproducible bit-for-bit
/// across platforms (tests freeze exact values).
inline WilsonInterval wilson_interval(std::uint64_t successes,
                                      std::uint64_t trials,
                                      double z = 1.959963984540054) {
  if (trials == 0)
    throw std::invalid_argument("wilson_interval: trials must be positive");
  if (successes > trials)
    throw std::invalid_argument("wilson_interval: successes exceed trials");
  if (!(z > 0.0) || !std::isfinite(z))
    throw std::invalid_argument("wilson_interval: z must be positive and finite");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  WilsonInterval out;
  // At 0 or n successes one endpoint is algebraically exact (center == half,
  // resp. center + half == 1); snap it so floating-point noise cannot push
  // the interval past the point estimate.
  out.lower = successes == 0 ? 0.0 : std::max(0.0, center - half);
  out.upper = successes == trials ? 1.0 : std::min(1.0, center + half);
  return out;
}

}  // namespace pauliprobe
