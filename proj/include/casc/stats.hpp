#pragma once

#include <cstdint>
#include <span>

namespace casc {

// Odd count: middle element. Even count: mean of the two middle elements.
// Throws on empty input.
double median(std::span<const double> values);

// Nearest-rank percentile over a copy of the values, q in [0, 1].
double percentile(std::span<const double> values, double q);

double mean(std::span<const double> values);

// Index of the fullest fixed-width histogram bin (ties -> lowest bin).
// Bin k covers [k*bin_width, (k+1)*bin_width).
std::int64_t histogram_mode_bin(std::span<const double> values, double bin_width);

}  // namespace casc
