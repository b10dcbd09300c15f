#pragma once

#include <cstddef>
#include <vector>

#include "silo/matrix.hpp"
#include "silo/network.hpp"
#include "silo/rng.hpp"

namespace silo {

struct TheoryParams {
  double sigma_x = 1.0;      // input std
  double sigma_w = 1.0;      // weight/bias std
  std::size_t d = 10;        // input dimension
  double p = 0.2;            // per-cycle pruning rate
  std::size_t k = 0;         // pruning cycles applied
  std::size_t depth = 1;     // hidden depth D (corollary bound)
  double big_k = 1.0;        // target weight-gradient energy K
  double gamma_const = 1.0;  // the free constant of the E_WG bound
};

// Fraction of weight mass pruned after k cycles at rate p: 1 - (1-p)^k.
double prune_survival_tau(double p, std::size_t k);

// Second moment of N(0, sigma_w^2) after zeroing the smallest-magnitude tau
// fraction: sigma_w^2 ((1-tau) + (2 erfinv(tau)/sqrt(pi)) e^{-erfinv(tau)^2}).
// For tau within 1e-12 of 1 the erfinv term takes its analytic limit 0.
double pruned_gaussian_second_moment(double sigma_w, double tau);

// Lower bound C(sigma_x, sigma_w, p, k) on 4x the average activation energy
// of a width-N -> infinity single-hidden-layer ReLU net pruned k times:
//   sigma_w^2 + d sigma_x^2 * pruned_gaussian_second_moment(sigma_w, tau).
double thm1_lower_bound(const TheoryParams& params);

// Depth-D variant: prefactor d sigma_x^2 sigma_w^{2D} / 2^{D-1} on the same
// bracket. Depth 1 reduces to thm1_lower_bound exactly. Hidden layers beyond
// the first carry per-weight variance sigma_w^2 / M (the proof's usage; the
// statement's 1/sqrt(M) reading differs, see README).
double corollary1_lower_bound(const TheoryParams& params);

// Finite-width Monte-Carlo estimate of E_AA(H): builds a d -> width ReLU
// layer with N(0, sigma_w^2) weights and biases, prunes the smallest-
// magnitude weights k times at rate p (within the layer), and averages
// (1/width) sum_j h_j(X)^2 over n_samples inputs X ~ N(0, sigma_x^2 I).
// Sampling is sharded with child generators in fixed order, so the estimate
// is deterministic per seed at any thread count.
double mc_activation_energy(const TheoryParams& params, std::size_t width,
                            std::size_t n_samples, const Rng& rng);

// Same estimate plus the constructed net and sampled inputs, so tests can
// replay the exact computation through measure_eaa.
struct McActivationResult {
  double estimate = 0.0;
  MaskedNetwork net;
  Matrix inputs;
};
McActivationResult mc_activation_energy_detailed(const TheoryParams& params,
                                                 std::size_t width,
                                                 std::size_t n_samples,
                                                 const Rng& rng);

// Mean squared per-position change over active (mask = 1) weights; the
// E_WG(W, W') of the weight-gradient-energy bound. Throws when the mask has
// no active weights.
double measure_ewg(const Matrix& before, const Matrix& after,
                   const Matrix& mask);
double measure_ewg(const std::vector<Matrix>& before,
                   const std::vector<Matrix>& after,
                   const std::vector<Matrix>& masks);

// Empirical E_AA of hidden layer `layer` (0-based among hidden layers):
// mean over data rows of (1/N_layer) sum_j h_j^2.
double measure_eaa(const MaskedNetwork& net, const Matrix& data,
                   std::size_t layer);

}  // namespace silo
