#include "silo/histogram.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace silo {

std::size_t sturges_bin_count(std::size_t n) {
  if (n == 0) throw std::invalid_argument("sturges_bin_count: n must be >= 1");
  if (n == 1) return 1;
  // ceil(log2(n)) without floating point: position of the top bit of n-1.
  return 1 + static_cast<std::size_t>(std::bit_width(n - 1));
}

HistogramSummary build_histogram(const std::vector<double>& values,
                                 std::size_t bins) {
  if (values.empty()) {
    throw std::invalid_argument("build_histogram: empty input");
  }
  if (bins == 0) throw std::invalid_argument("build_histogram: bins must be >= 1");

  double lo = values[0], hi = values[0];
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (lo == hi) {
    // Degenerate range; keep the edges strictly ascending.
    lo -= 0.5;
    hi += 0.5;
  }

  HistogramSummary h;
  h.n = values.size();
  h.bin_edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) {
    h.bin_edges[i] = lo + (hi - lo) * static_cast<double>(i) /
                              static_cast<double>(bins);
  }
  h.bin_edges[bins] = hi;

  h.counts.assign(bins, 0);
  const double width = hi - lo;
  for (double v : values) {
    auto idx = static_cast<std::size_t>(
        std::floor((v - lo) / width * static_cast<double>(bins)));
    if (idx >= bins) idx = bins - 1;  // max value belongs to the last bin
    ++h.counts[idx];
  }

  double sum = 0.0;
  for (double v : values) sum += v;
  h.mean = sum / static_cast<double>(h.n);
  double ss = 0.0;
  for (double v : values) ss += (v - h.mean) * (v - h.mean);
  h.std = std::sqrt(ss / static_cast<double>(h.n));
  return h;
}

}  // namespace silo
