#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "paperfeed/common/random.hpp"

namespace paperfeed::analytics {

inline constexpr std::size_t kDefaultBootstrapSamples = 1000;

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

/// Linear-interpolation quantile (Hyndman-Fan type 7) of unsorted values;
/// q in [0, 1]. Throws ValidationError on empty input.
double quantile(std::vector<double> values, double q);

/// 95% percentile interval of bootstrap replicates, widened if needed so
/// that it contains `point`. NaN replicates are ignored; with none left the
/// interval collapses to the point.
Interval percentile_interval(std::span<const double> replicates, double point, double level = 0.95);

/// Draws `n` indices uniformly with replacement from [0, n).
std::vector<std::size_t> resample_indices(std::size_t n, Rng& rng);

double mean(std::span<const double> values);
/// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 values.
double sample_sd(std::span<const double> values);

}  // namespace paperfeed::analytics
