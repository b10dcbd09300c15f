#include "silo/theory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "silo/special.hpp"

namespace silo {
namespace {

constexpr double kSqrtPi = 1.7724538509055160273;
constexpr std::size_t kMcShard = 250;

// Exact small-integer power, so depth-1 collapses bitwise to the theorem
// bound (std::pow rounding is not guaranteed identical to x*x).
double ipow(double x, std::size_t n) {
  double r = 1.0;
  for (std::size_t i = 0; i < n; ++i) r *= x;
  return r;
}

// Sum over rows of (1/N) sum_j h_j^2 at hidden layer `layer`; shared by
// measure_eaa and the MC estimator so sharded and whole-batch evaluation add
// the same terms in the same order.
double eaa_row_sum(const MaskedNetwork& net, const Matrix& data,
                   std::size_t layer) {
  const ForwardTrace t = forward(net, data);
  if (layer >= t.post.size()) {
    throw std::invalid_argument("measure_eaa: no such hidden layer");
  }
  const Matrix& h = t.post[layer];
  const double inv_n = 1.0 / static_cast<double>(h.cols);
  double total = 0.0;
  for (std::size_t i = 0; i < h.rows; ++i) {
    const double* row = h.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < h.cols; ++j) s += row[j] * row[j];
    total += inv_n * s;
  }
  return total;
}

// floor(p * active) smallest-magnitude weights of layer 0 get masked, ties
// by ascending flat index; repeated k times (the theorem's layer-wise rate).
void prune_first_layer(MaskedNetwork& net, double p, std::size_t k) {
  auto& w = net.weights[0];
  auto& mask = net.masks[0];
  for (std::size_t cycle = 0; cycle < k; ++cycle) {
    std::vector<std::pair<double, std::size_t>> active;
    active.reserve(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (mask.data[i] != 0.0) active.emplace_back(std::fabs(w.data[i]), i);
    }
    const auto n_prune = static_cast<std::size_t>(
        p * static_cast<double>(active.size()));
    std::sort(active.begin(), active.end());
    for (std::size_t i = 0; i < n_prune; ++i) {
      mask.data[active[i].second] = 0.0;
      w.data[active[i].second] = 0.0;
    }
  }
}

}  // namespace

double prune_survival_tau(double p, std::size_t k) {
  return 1.0 - std::pow(1.0 - p, static_cast<double>(k));
}

double pruned_gaussian_second_moment(double sigma_w, double tau) {
  if (tau <= 0.0) return sigma_w * sigma_w;
  double tail = 0.0;
  if (tau < 1.0 - 1e-12) {
    const double r = erfinv(tau);
    tail = (2.0 / kSqrtPi) * r * std::exp(-r * r);
  }
  // tau within 1e-12 of 1: the erfinv term's analytic limit is 0.
  return (sigma_w * sigma_w) * ((1.0 - tau) + tail);
}

double thm1_lower_bound(const TheoryParams& params) {
  const double tau = prune_survival_tau(params.p, params.k);
  return params.sigma_w * params.sigma_w +
         static_cast<double>(params.d) * (params.sigma_x * params.sigma_x) *
             pruned_gaussian_second_moment(params.sigma_w, tau);
}

double corollary1_lower_bound(const TheoryParams& params) {
  if (params.depth < 1) {
    throw std::invalid_argument("corollary1_lower_bound: depth must be >= 1");
  }
  const double tau = prune_survival_tau(params.p, params.k);
  const double sw2 = params.sigma_w * params.sigma_w;
  // Effective variance sigma_w^{2D} / 2^{D-1}; at D = 1 this is exactly sw2
  // and the expression below is bitwise thm1_lower_bound.
  const double sigma_eff2 = ipow(sw2, params.depth) / ipow(2.0, params.depth - 1);
  return sw2 + static_cast<double>(params.d) *
                   (params.sigma_x * params.sigma_x) *
                   (sigma_eff2 * pruned_gaussian_second_moment(1.0, tau));
}

McActivationResult mc_activation_energy_detailed(const TheoryParams& params,
                                                 std::size_t width,
                                                 std::size_t n_samples,
                                                 const Rng& rng) {
  if (width == 0 || n_samples == 0) {
    throw std::invalid_argument("mc_activation_energy: width, n_samples >= 1");
  }

  McActivationResult res;
  MaskedNetwork& net = res.net;
  net.layer_sizes = {params.d, width, 1};
  net.activation = Activation::relu;
  Rng w_rng = rng.child(0);
  net.weights.push_back(
      gaussian_matrix(w_rng, params.d, width, params.sigma_w));
  net.masks.emplace_back(params.d, width, 1.0);
  std::vector<double> b(width);
  Rng b_rng = rng.child(1);
  for (auto& v : b) v = b_rng.gaussian() * params.sigma_w;
  net.biases.push_back(std::move(b));
  net.weights.emplace_back(width, 1);
  net.masks.emplace_back(width, 1, 1.0);
  net.biases.emplace_back(1, 0.0);

  prune_first_layer(net, params.p, params.k);

  // Fixed-size input shards with per-shard child generators: the estimate is
  // identical whether shards are evaluated here or replayed in one pass.
  res.inputs = Matrix(n_samples, params.d);
  double total = 0.0;
  std::size_t done = 0;
  for (std::size_t shard = 0; done < n_samples; ++shard) {
    const std::size_t take = std::min(kMcShard, n_samples - done);
    Rng x_rng = rng.child(2 + shard);
    Matrix x = gaussian_matrix(x_rng, take, params.d, params.sigma_x);
    std::copy(x.data.begin(), x.data.end(),
              res.inputs.data.begin() +
                  static_cast<std::ptrdiff_t>(done * params.d));
    total += eaa_row_sum(net, x, 0);
    done += take;
  }
  res.estimate = total / static_cast<double>(n_samples);
  return res;
}

double mc_activation_energy(const TheoryParams& params, std::size_t width,
                            std::size_t n_samples, const Rng& rng) {
  return mc_activation_energy_detailed(params, width, n_samples, rng).estimate;
}

double measure_ewg(const Matrix& before, const Matrix& after,
                   const Matrix& mask) {
  if (!before.same_shape(after) || !before.same_shape(mask)) {
    throw std::invalid_argument("measure_ewg: shape mismatch");
  }
  double sum = 0.0;
  std::size_t active = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask.data[i] == 0.0) continue;
    const double diff = before.data[i] - after.data[i];
    sum += diff * diff;
    ++active;
  }
  if (active == 0) throw std::invalid_argument("measure_ewg: no active weights");
  return sum / static_cast<double>(active);
}

double measure_ewg(const std::vector<Matrix>& before,
                   const std::vector<Matrix>& after,
                   const std::vector<Matrix>& masks) {
  if (before.size() != after.size() || before.size() != masks.size()) {
    throw std::invalid_argument("measure_ewg: layer count mismatch");
  }
  double sum = 0.0;
  std::size_t active = 0;
  for (std::size_t l = 0; l < masks.size(); ++l) {
    if (!before[l].same_shape(after[l]) || !before[l].same_shape(masks[l])) {
      throw std::invalid_argument("measure_ewg: shape mismatch");
    }
    for (std::size_t i = 0; i < masks[l].size(); ++i) {
      if (masks[l].data[i] == 0.0) continue;
      const double diff = before[l].data[i] - after[l].data[i];
      sum += diff * diff;
      ++active;
    }
  }
  if (active == 0) throw std::invalid_argument("measure_ewg: no active weights");
  return sum / static_cast<double>(active);
}

double measure_eaa(const MaskedNetwork& net, const Matrix& data,
                   std::size_t layer) {
  if (data.rows == 0) throw std::invalid_argument("measure_eaa: empty data");
  return eaa_row_sum(net, data, layer) / static_cast<double>(data.rows);
}

}  // namespace silo
