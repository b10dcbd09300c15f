#pragma once

#include <cstddef>
#include <vector>

namespace silo {

struct HistogramSummary {
  std::vector<double> bin_edges;     // ascending, size bins + 1
  std::vector<std::size_t> counts;   // size bins, sums to n
  double mean = 0.0;
  double std = 0.0;                  // population
  std::size_t n = 0;
};

// 1 + ceil(log2(n)); n = 1 gives 1. Throws on n = 0.
std::size_t sturges_bin_count(std::size_t n);

// Equal-width bins spanning [min, max] of the data; the max value lands in
// the last bin. Constant data get a unit-width window centered on the value.
// Throws on empty input or bins = 0.
HistogramSummary build_histogram(const std::vector<double>& values,
                                 std::size_t bins);

}  // namespace silo
