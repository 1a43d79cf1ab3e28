#include "casc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "casc/error.hpp"

namespace casc {

double median(std::span<const double> values) {
    if (values.empty()) throw ConfigError("median: empty input");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double percentile(std::span<const double> values, double q) {
    if (values.empty()) throw ConfigError("percentile: empty input");
    if (q < 0.0 || q > 1.0) throw ConfigError("percentile: q outside [0,1]");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    if (q == 0.0) return v.front();
    const std::size_t rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size())));
    return v[rank - 1];
}

double mean(std::span<const double> values) {
    if (values.empty()) throw ConfigError("mean: empty input");
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
}

std::int64_t histogram_mode_bin(std::span<const double> values, double bin_width) {
    if (values.empty()) throw ConfigError("histogram_mode_bin: empty input");
    if (!(bin_width > 0.0)) throw ConfigError("histogram_mode_bin: bin_width must be positive");
    std::map<std::int64_t, std::int64_t> counts;
    for (double v : values) {
        ++counts[static_cast<std::int64_t>(std::floor(v / bin_width))];
    }
    std::int64_t best_bin = counts.begin()->first;
    std::int64_t best_count = counts.begin()->second;
    for (const auto& [bin, count] : counts) {
        if (count > best_count) {
            best_bin = bin;
            best_count = count;
        }
    }
    return best_bin;
}

}  // namespace casc
