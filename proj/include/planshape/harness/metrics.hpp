#pragma once

#include <string>
#include <vector>

namespace planshape::harness {

struct Aggregate {
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation, (n-1) denominator; 0 for n = 1
};

// Throws std::invalid_argument on empty input.
Aggregate aggregate(const std::vector<double>& values);

// Shortest clean rendering: integers print bare ("16"), fractions keep up to
// six significant digits ("0.955").
std::string format_number(double value);

// "16 ± 8" / "5 ± 0", matching the report tables.
std::string format_mean_std(const Aggregate& agg);

double median(std::vector<double> values);  // throws on empty

}  // namespace planshape::harness
