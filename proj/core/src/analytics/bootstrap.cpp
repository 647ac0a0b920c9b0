#include "paperfeed/analytics/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "paperfeed/common/errors.hpp"

namespace paperfeed::analytics {

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw ValidationError("quantile of empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * std::clamp(q, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

Interval percentile_interval(std::span<const double> replicates, double point, double level) {
  std::vector<double> finite;
  finite.reserve(replicates.size());
  for (double r : replicates) {
    if (!std::isnan(r)) finite.push_back(r);
  }
  if (finite.empty()) return {point, point};
  const double tail = (1.0 - level) / 2.0;
  Interval ci{quantile(finite, tail), quantile(finite, 1.0 - tail)};
  ci.low = std::min(ci.low, point);
  ci.high = std::max(ci.high, point);
  return ci;
}

std::vector<std::size_t> resample_indices(std::size_t n, Rng& rng) {
  std::vector<std::size_t> out(n);
  for (auto& i : out) i = rng.below(n);
  return out;
}

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_sd(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

}  // namespace paperfeed::analytics
