#include "emberops/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <numeric>

#include "emberops/errors.hpp"

namespace emberops {

std::vector<double> moving_average(std::span<const double> series, std::size_t window) {
  if (window < 1) throw OutOfRange("moving-average window must be at least 1");
  if (window > series.size())
    throw WindowTooLarge("window " + std::to_string(window) + " exceeds series length " +
                         std::to_string(series.size()));
  std::vector<double> out;
  out.reserve(series.size() - window + 1);
  for (std::size_t i = window - 1; i < series.size(); ++i) {
    double sum = 0.0;
    for (std::size_t j = i + 1 - window; j <= i; ++j) sum += series[j];
    out.push_back(sum / static_cast<double>(window));
  }
  return out;
}

double mean(std::span<const double> x) {
  if (x.empty()) throw EmptySample("mean of an empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double quantile(std::span<const double> x, double q) {
  if (x.empty()) throw EmptySample("quantile of an empty sample");
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return s[lo] + (s[hi] - s[lo]) * frac;
}

double median(std::span<const double> x) { return quantile(x, 0.5); }

double iqr(std::span<const double> x) { return quantile(x, 0.75) - quantile(x, 0.25); }

namespace {

// Doubled midranks (integers) of the pooled sample; a first, then b.
std::vector<std::int64_t> doubled_midranks(std::span<const double> a, std::span<const double> b,
                                           double& tie_term) {
  const std::size_t n = a.size() + b.size();
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return pooled[i] < pooled[j]; });

  std::vector<std::int64_t> ranks(n);
  tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    // positions i..j (0-based) share rank ((i+1) + (j+1)) / 2
    const auto doubled = static_cast<std::int64_t>(i + j + 2);
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = doubled;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }
  return ranks;
}

// Two-sided exact p for the rank sum of a subset of size m drawn from the
// pooled doubled ranks, by dynamic programming over (size, doubled sum).
double exact_p(const std::vector<std::int64_t>& ranks, std::size_t m, std::int64_t observed) {
  const std::size_t n = ranks.size();
  std::int64_t max_sum = 0;
  {
    std::vector<std::int64_t> sorted(ranks);
    std::sort(sorted.rbegin(), sorted.rend());
    for (std::size_t i = 0; i < m; ++i) max_sum += sorted[i];
  }
  std::vector<std::vector<double>> count(m + 1, std::vector<double>(static_cast<std::size_t>(max_sum) + 1, 0.0));
  count[0][0] = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t r = ranks[i];
    for (std::size_t k = std::min(m, i + 1); k >= 1; --k) {
      auto& dst = count[k];
      const auto& src = count[k - 1];
      for (std::int64_t s = max_sum; s >= r; --s) dst[s] += src[s - r];
    }
  }
  // Doubled expectation of the sum: m * (n + 1).
  const std::int64_t expected = static_cast<std::int64_t>(m) * static_cast<std::int64_t>(n + 1);
  const std::int64_t dev = std::llabs(observed - expected);
  double total = 0.0, extreme = 0.0;
  for (std::int64_t s = 0; s <= max_sum; ++s) {
    const double c = count[m][s];
    total += c;
    if (std::llabs(s - expected) >= dev) extreme += c;
  }
  return std::min(1.0, extreme / total);
}

}  // namespace

StatsReport mann_whitney_u(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw EmptySample("both samples need at least one value");
  StatsReport r;
  r.n_a = a.size();
  r.n_b = b.size();
  r.mean_a = mean(a);
  r.mean_b = mean(b);
  r.median_a = median(a);
  r.median_b = median(b);

  double tie_term = 0.0;
  const std::vector<std::int64_t> ranks = doubled_midranks(a, b, tie_term);
  std::int64_t sum_a2 = 0, sum_b2 = 0;
  for (std::size_t i = 0; i < a.size(); ++i) sum_a2 += ranks[i];
  for (std::size_t i = a.size(); i < ranks.size(); ++i) sum_b2 += ranks[i];

  const double na = static_cast<double>(r.n_a), nb = static_cast<double>(r.n_b);
  // U from doubled rank sums keeps the half-integers exact.
  r.u_a = (static_cast<double>(sum_a2) - na * (na + 1.0)) / 2.0;
  r.u_b = (static_cast<double>(sum_b2) - nb * (nb + 1.0)) / 2.0;

  if (std::min(r.n_a, r.n_b) >= 8) {
    const double n = na + nb;
    const double mu = na * nb / 2.0;
    const double var = na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if (var <= 0.0) {
      r.z = 0.0;
      r.p_value = 1.0;
    } else {
      const double diff = r.u_a - mu;
      const double corrected = std::max(0.0, std::abs(diff) - 0.5);
      r.z = (diff < 0.0 ? -corrected : corrected) / std::sqrt(var);
      r.p_value = std::min(1.0, std::erfc(std::abs(r.z) / std::sqrt(2.0)));
    }
  } else {
    r.exact = true;
    if (r.n_a <= r.n_b)
      r.p_value = exact_p(ranks, r.n_a, sum_a2);
    else {
      // Subset enumeration over the smaller sample; same two-sided p.
      std::vector<std::int64_t> swapped(ranks.begin() + static_cast<std::ptrdiff_t>(r.n_a), ranks.end());
      swapped.insert(swapped.end(), ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(r.n_a));
      r.p_value = exact_p(swapped, r.n_b, sum_b2);
    }
  }
  return r;
}

}  // namespace emberops
