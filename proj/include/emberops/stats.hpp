#pragma once

#include <span>
#include <vector>

namespace emberops {

// out[i] = mean(series[i .. i + window - 1]); length len - window + 1.
// Throws WindowTooLarge when window > len, OutOfRange when window < 1.
std::vector<double> moving_average(std::span<const double> series, std::size_t window);

struct StatsReport {
  double mean_a = 0.0, mean_b = 0.0;
  double median_a = 0.0, median_b = 0.0;
  double u_a = 0.0;  // pairs (a, b) with a > b, ties counting one half
  double u_b = 0.0;
  double z = 0.0;  // continuity-corrected, signed towards a; 0 for exact tests
  double p_value = 1.0;
  bool exact = false;
  std::size_t n_a = 0, n_b = 0;
};

// Two-sided Mann-Whitney U with midranks. Normal approximation with tie
// and continuity correction when min(n_a, n_b) >= 8; otherwise the exact
// permutation distribution of the (tied) rank sum. Throws EmptySample.
StatsReport mann_whitney_u(std::span<const double> a, std::span<const double> b);

double mean(std::span<const double> x);
// Linear interpolation between order statistics (q in [0, 1]).
double quantile(std::span<const double> x, double q);
double median(std::span<const double> x);
double iqr(std::span<const double> x);

}  // namespace emberops
