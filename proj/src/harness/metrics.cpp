#include "planshape/harness/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace planshape::harness {

Aggregate aggregate(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("aggregate needs at least one value");
    Aggregate agg;
    for (double v : values) agg.mean += v;
    agg.mean /= static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - agg.mean) * (v - agg.mean);
        agg.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return agg;
}

std::string format_number(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", value);
    return buf;
}

std::string format_mean_std(const Aggregate& agg) {
    return format_number(agg.mean) + " ± " + format_number(agg.std);
}

double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median needs at least one value");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace planshape::harness
